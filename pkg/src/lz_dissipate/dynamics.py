"""Time evolution of the bipartite state under one-sided noise.

Two independent propagators are provided: ``evolve_numeric`` integrates the 12
real Bloch/correlation components (the reference vector is constant and is not
integrated), and ``evolve_full_master`` integrates the full 4x4 density matrix
with the single-qubit generator lifted by the identity on the reference
factor. ``evolve_slow_analytic`` evaluates the constant-coefficient closed
form valid for slow driving near the crossing.

Both numeric propagators use the adaptive Dormand-Prince 5(4) core from
``_kernels`` (default rtol 1e-8, atol 1e-10) with dense output on the caller's
grid; a fixed-step RK4 audit mode is available via ``method="rk4"``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .bath import BathParams, lamb_shift_difference
from .generator import slow_limit_coefficients, timescales
from .linalg import ID2, PAULI, SIGMA_MINUS, SIGMA_PLUS, SIGMA_Y, SIGMA_Z, kron
from .lz_model import LZParams, gap


class SolverError(RuntimeError):
    """Integration aborted; carries the failure time and any partial trajectory.

    Extra attributes default so the exception survives pickling across the
    sweep worker pool (only the message crosses the process boundary).
    """

    def __init__(self, message: str, t_fail: float = math.nan, partial: "Trajectory | None" = None):
        super().__init__(message)
        self.t_fail = t_fail
        self.partial = partial


class SlowRegimeWarning(UserWarning):
    """Closed-form slow-driving solution evaluated outside its validity window."""


@dataclass(frozen=True)
class PauliState:
    """Bipartite state as Bloch vectors ``s`` (system), ``r`` (reference) and
    correlation tensor ``chi``."""

    s: np.ndarray
    r: np.ndarray
    chi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s", np.asarray(self.s, dtype=float).reshape(3).copy())
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float).reshape(3).copy())
        object.__setattr__(self, "chi", np.asarray(self.chi, dtype=float).reshape(3, 3).copy())

    def validate(self, tol: float = 1e-8) -> None:
        """Check Bloch-vector / correlation bounds and positivity of the
        assembled density matrix (least eigenvalue >= -1e-8)."""
        if np.linalg.norm(self.s) > 1.0 + tol or np.linalg.norm(self.r) > 1.0 + tol:
            raise ValueError("Bloch vector norm exceeds 1")
        if np.abs(self.chi).max() > 1.0 + tol:
            raise ValueError("correlation tensor entry exceeds 1 in magnitude")
        from .entanglement import assemble_density
        from .linalg import hermitian_eigenvalues

        lo = hermitian_eigenvalues(assemble_density(self)).min()
        if lo < -1e-8:
            raise ValueError(f"assembled density matrix has eigenvalue {lo:.3e} < -1e-8")


@dataclass(frozen=True)
class SolverStats:
    method: str
    rtol: float
    atol: float
    n_accepted: int
    n_rejected: int
    n_rhs: int
    max_trace_defect: float = 0.0


@dataclass
class Trajectory:
    """Sampled evolution: per-time state components, negativity and validity flags."""

    times: np.ndarray
    s: np.ndarray            # (n, 3)
    r: np.ndarray            # (n, 3)
    chi: np.ndarray          # (n, 3, 3)
    negativity: np.ndarray   # (n,), NaN when not computed
    secular_ok: np.ndarray   # (n,) bool
    secular_margin: np.ndarray
    solver_stats: SolverStats = field(
        default_factory=lambda: SolverStats("none", 0.0, 0.0, 0, 0, 0)
    )

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 1 or np.any(np.diff(t) <= 0):
            raise ValueError("times must be a strictly increasing 1-d sequence")

    def state(self, i: int) -> PauliState:
        return PauliState(self.s[i], self.r[i], self.chi[i])

    @property
    def n_times(self) -> int:
        return len(self.times)


def schmidt_initial(eta: float) -> PauliState:
    """Pure two-qubit state cos(eta)|00> + sin(eta)|11> in Pauli components.

    eta in [0, pi/2]; eta = pi/4 is the maximally entangled point, eta = 0
    the |00> product state.
    """
    if not 0.0 <= eta <= math.pi / 2:
        raise ValueError(f"eta must lie in [0, pi/2], got {eta}")
    c2 = math.cos(2.0 * eta)
    s2 = math.sin(2.0 * eta)
    return PauliState(
        s=np.array([0.0, 0.0, c2]),
        r=np.array([0.0, 0.0, c2]),
        chi=np.diag([s2, -s2, 1.0]),
    )


# ---------------------------------------------------------------------------
# master-equation superoperator basis (weights: k, phi_dot, f, g, l)
# ---------------------------------------------------------------------------

def _sup(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator matrix of X -> A X B on row-major vec(X)."""
    return np.kron(a, b.T)


def _real_embedding(m: np.ndarray) -> np.ndarray:
    re, im = m.real, m.imag
    n = m.shape[0]
    out = np.empty((2 * n, 2 * n))
    out[:n, :n] = re
    out[:n, n:] = -im
    out[n:, :n] = im
    out[n:, n:] = re
    return out


def _build_master_superops():
    id4 = np.eye(4, dtype=complex)
    sz = kron(SIGMA_Z, ID2)
    sy = kron(SIGMA_Y, ID2)
    sm = kron(SIGMA_MINUS, ID2)
    sp = kron(SIGMA_PLUS, ID2)
    spsm = sp @ sm
    smsp = sm @ sp
    blocks = [
        -1j * (_sup(sz, id4) - _sup(id4, sz)),                        # weight k
        1j * (_sup(sy, id4) - _sup(id4, sy)),                         # weight phi_dot
        _sup(sm, sp) - 0.5 * (_sup(spsm, id4) + _sup(id4, spsm)),     # weight f
        _sup(sp, sm) - 0.5 * (_sup(smsp, id4) + _sup(id4, smsp)),     # weight g
        _sup(sz, sz) - _sup(id4, id4),                                # weight l
    ]
    dense = np.stack([_real_embedding(b) for b in blocks])  # (5, 32, 32)
    mask = (np.abs(dense) > 1e-15).any(axis=0)
    indptr = np.zeros(33, dtype=np.int64)
    cols = []
    data5 = []
    for i in range(32):
        nz = np.nonzero(mask[i])[0]
        indptr[i + 1] = indptr[i] + nz.size
        for j in nz:
            cols.append(j)
            data5.append(dense[:, i, j])
    return (
        dense,
        indptr,
        np.asarray(cols, dtype=np.int64),
        np.asarray(data5, dtype=float).reshape(-1, 5),
    )


_MASTER_DENSE, _SP_INDPTR, _SP_COLS, _SP_DATA5 = _build_master_superops()
_EMPTY = np.empty(0)

# Pauli projection operators for extracting (s, r, chi) from a 4x4 matrix
_PROJ_S = np.stack([kron(P, ID2) for P in PAULI])
_PROJ_R = np.stack([kron(ID2, P) for P in PAULI])
_PROJ_C = np.stack([np.stack([kron(Pi, Pj) for Pj in PAULI]) for Pi in PAULI])


def _pack_params(p: LZParams, b: BathParams) -> np.ndarray:
    gamma0 = 0.0 if b.gamma0_vanishes else 2.0 * math.pi * b.temperature
    return np.array(
        [
            p.delta,
            p.v,
            math.sin(b.angle),
            math.cos(b.angle),
            b.temperature,
            b.cutoff,
            b.coupling * b.coupling,
            gamma0,
            1.0 if b.lamb_shift_enabled else 0.0,
        ]
    )


def _lamb_table(p: LZParams, b: BathParams, t_int: float, t_end: float):
    """Tabulate S(2*Omega) - S(-2*Omega) over the run's Omega range.

    The table is linearly interpolated inside the RHS (per-run memoization);
    density scales with the range measured against the cutoff.
    """
    if not b.lamb_shift_enabled:
        return _EMPTY, _EMPTY
    om_max = float(max(gap(t_int, p), gap(t_end, p)))
    om_min = p.delta
    n = int(np.clip(math.ceil((om_max - om_min) / b.cutoff * 96.0) + 2, 2, 769))
    xs = np.linspace(om_min, max(om_max, om_min * (1.0 + 1e-12)), n)
    ys = np.array([lamb_shift_difference(2.0 * x, b) for x in xs])
    return xs, ys


def _pauli_from_master_rows(Y: np.ndarray):
    nt = Y.shape[0]
    rho = Y[:, :16].reshape(nt, 4, 4) + 1j * Y[:, 16:].reshape(nt, 4, 4)
    s = np.einsum("iab,tba->ti", _PROJ_S, rho).real
    r = np.einsum("iab,tba->ti", _PROJ_R, rho).real
    chi = np.einsum("ijab,tba->tij", _PROJ_C, rho).real
    trace_defect = float(np.abs(np.einsum("taa->t", rho) - 1.0).max())
    return s, r, chi, trace_defect


_STATUS_MESSAGES = {
    _kernels.STATUS_STEP_UNDERFLOW: "step size underflow",
    _kernels.STATUS_INVARIANT: "state invariant violated beyond 1e-6",
    _kernels.STATUS_MAX_STEPS: "maximum step count exceeded",
}


def _default_grid(t_int: float, t_end: float) -> np.ndarray:
    return np.linspace(t_int, t_end, 201)


def _evolve(
    mode: int,
    init: PauliState,
    t_int: float,
    t_end: float,
    p: LZParams,
    b: BathParams,
    grid,
    rtol: float,
    atol: float,
    method: str,
    compute_negativity: bool,
    secular_threshold: float,
    check_invariants: bool,
    max_steps: int,
) -> Trajectory:
    if not t_int < t_end:
        raise ValueError("t_int must be smaller than t_end")
    grid = _default_grid(t_int, t_end) if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[0] < t_int - 1e-12 or grid[-1] > t_end + 1e-12:
        raise ValueError("grid must lie within [t_int, t_end]")

    cp = _pack_params(p, b)
    ls_x, ls_y = _lamb_table(p, b, t_int, t_end)
    if mode == 0:
        y0 = np.concatenate([init.s, init.chi[:, 0], init.chi[:, 1], init.chi[:, 2]])
        rvec = init.r.copy()
    else:
        from .entanglement import assemble_density

        rho0 = assemble_density(init)
        y0 = np.concatenate([rho0.real.ravel(), rho0.imag.ravel()])
        rvec = np.zeros(3)

    if method == "rk45":
        status, t_fail, Y, n_done, nacc, nrej, nrhs = _kernels.integrate_adaptive(
            mode, y0, float(t_int), float(t_end), float(rtol), float(atol),
            grid, cp, rvec, _SP_INDPTR, _SP_COLS, _SP_DATA5, ls_x, ls_y,
            1 if check_invariants else 0, max_steps,
        )
    elif method == "rk4":
        om_max = float(max(gap(t_int, p), gap(t_end, p)))
        h_base = min(1.0 / (40.0 * om_max), (t_end - t_int) / 1e5)
        full = grid
        if full[0] > t_int:
            full = np.concatenate([[t_int], full])
        status, t_fail, Y, n_done, nacc, nrej, nrhs = _kernels.integrate_rk4(
            mode, y0, full, h_base, cp, rvec,
            _SP_INDPTR, _SP_COLS, _SP_DATA5, ls_x, ls_y,
            1 if check_invariants else 0,
        )
        if full.size != grid.size:
            Y = Y[1:]
            n_done = max(0, n_done - 1)
    else:
        raise ValueError(f"unknown method {method!r} (use 'rk45' or 'rk4')")

    stats = SolverStats(method, rtol, atol, int(nacc), int(nrej), int(nrhs))
    if status != _kernels.STATUS_OK:
        partial = None
        if n_done > 0:
            partial = _finalize(
                mode, grid[:n_done], Y[:n_done], init, p, b, stats,
                compute_negativity=False, secular_threshold=secular_threshold,
            )
        raise SolverError(
            f"{_STATUS_MESSAGES.get(status, 'solver failure')} at t = {t_fail:.6g}",
            t_fail=float(t_fail),
            partial=partial,
        )
    return _finalize(
        mode, grid, Y, init, p, b, stats,
        compute_negativity=compute_negativity, secular_threshold=secular_threshold,
    )


def _finalize(mode, times, Y, init, p, b, stats, compute_negativity, secular_threshold):
    nt = len(times)
    if mode == 0:
        s = Y[:, 0:3].copy()
        chi = np.stack([Y[:, 3:6], Y[:, 6:9], Y[:, 9:12]], axis=2)
        r = np.broadcast_to(init.r, (nt, 3)).copy()
    else:
        s, r, chi, trace_defect = _pauli_from_master_rows(Y)
        stats = SolverStats(
            stats.method, stats.rtol, stats.atol,
            stats.n_accepted, stats.n_rejected, stats.n_rhs,
            max_trace_defect=trace_defect,
        )
    neg = np.full(nt, np.nan)
    if compute_negativity:
        from .entanglement import assemble_density, negativity

        for i in range(nt):
            neg[i] = negativity(
                assemble_density(PauliState(s[i], r[i], chi[i])), validate=False
            ).value
    ok = np.empty(nt, dtype=bool)
    margin = np.empty(nt)
    for i, t in enumerate(times):
        rep = timescales(float(t), p, b, threshold=secular_threshold)
        ok[i] = rep.secular_ok
        margin[i] = rep.margin
    return Trajectory(
        times=np.asarray(times, dtype=float).copy(),
        s=s, r=r, chi=chi,
        negativity=neg, secular_ok=ok, secular_margin=margin,
        solver_stats=stats,
    )


def evolve_numeric(
    init: PauliState,
    t_int: float,
    t_end: float,
    p: LZParams,
    b: BathParams,
    grid=None,
    *,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    method: str = "rk45",
    compute_negativity: bool = True,
    secular_threshold: float = 10.0,
    check_invariants: bool = True,
    max_steps: int = 50_000_000,
) -> Trajectory:
    """Integrate ds/dt = Q s + q and dchi_j/dt = Q chi_j + r_j q on [t_int, t_end].

    The reference Bloch vector is held exactly constant. Aborts with
    :class:`SolverError` on step-size underflow or a state-bound violation
    beyond 1e-6.
    """
    return _evolve(
        0, init, t_int, t_end, p, b, grid, rtol, atol, method,
        compute_negativity, secular_threshold, check_invariants, max_steps,
    )


def evolve_full_master(
    init: PauliState,
    t_int: float,
    t_end: float,
    p: LZParams,
    b: BathParams,
    grid=None,
    *,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    method: str = "rk45",
    compute_negativity: bool = True,
    secular_threshold: float = 10.0,
    check_invariants: bool = True,
    max_steps: int = 50_000_000,
) -> Trajectory:
    """Integrate the full 4x4 density matrix under (generator ⊗ id).

    Independent of :func:`evolve_numeric` (different state representation and
    right-hand side); the pair is cross-checked in the acceptance suite. The
    largest |trace - 1| over the output grid is recorded in ``solver_stats``.
    """
    return _evolve(
        1, init, t_int, t_end, p, b, grid, rtol, atol, method,
        compute_negativity, secular_threshold, check_invariants, max_steps,
    )


def evolve_slow_analytic(
    init: PauliState, t_int: float, t: float, p: LZParams, b: BathParams,
) -> PauliState:
    """Closed-form state at time ``t`` for slow driving near the crossing.

    Coefficients are frozen at their crossing values (Omega = delta, mixing
    angle pi/4, frame velocity 0). Transverse components spiral with angular
    frequency 2k and damping b; longitudinal components relax at 2*a_plus
    toward -a_minus/a_plus (the r-column offset enters the correlation rows).
    The zero-damping case a_plus = 0 is taken as the exact limit: longitudinal
    components stay constant.

    Outside v*max(|t|, |t_int|) <= 0.1*delta a :class:`SlowRegimeWarning` is
    attached.
    """
    if p.v * max(abs(t), abs(t_int)) > 0.1 * p.delta:
        warnings.warn(
            "slow-driving closed form evaluated outside its validity window "
            f"(v*|t| = {p.v * max(abs(t), abs(t_int)):.3g} vs 0.1*delta = {0.1 * p.delta:.3g})",
            SlowRegimeWarning,
            stacklevel=2,
        )
    co = slow_limit_coefficients(p, b)
    tau = t - t_int
    eb = math.exp(-co.b * tau)
    cos2k = math.cos(2.0 * co.k * tau)
    sin2k = math.sin(2.0 * co.k * tau)

    def spiral(x, y):
        return eb * (cos2k * x - sin2k * y), eb * (sin2k * x + cos2k * y)

    s = np.empty(3)
    s[0], s[1] = spiral(init.s[0], init.s[1])
    chi = np.empty((3, 3))
    for j in range(3):
        chi[0, j], chi[1, j] = spiral(init.chi[0, j], init.chi[1, j])
    if co.a_plus > 0.0:
        m = co.a_minus / co.a_plus
        ea = math.exp(-2.0 * co.a_plus * tau)
        s[2] = (init.s[2] + m) * ea - m
        for j in range(3):
            chi[2, j] = (init.chi[2, j] + m * init.r[j]) * ea - m * init.r[j]
    else:
        s[2] = init.s[2]
        chi[2, :] = init.chi[2, :]
    return PauliState(s=s, r=init.r, chi=chi)
