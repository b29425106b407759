"""Rotated-frame Lindblad generator of the dissipative avoided-crossing qubit.

Coefficients (k, f, g, l) multiply, respectively, the coherent sigma_z part,
the lowering and raising jump channels, and the pure-dephasing channel; the
inertial term -phidot*sigma_y comes from the time dependence of the frame.
The equivalent affine Bloch form is ds/dt = Q(t) s + q(t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bath import BathParams, kossakowski_rate, lamb_shift_difference, spectral_density, mean_occupation
from .linalg import SIGMA_MINUS, SIGMA_PLUS, SIGMA_Y, SIGMA_Z, _as_square, hermiticity_defect
from .lz_model import LZParams, gap, mixing_angle_rate


@dataclass(frozen=True)
class GeneratorCoefficients:
    k: float        # coherent precession (energy)
    f: float        # lowering-channel rate
    g: float        # raising-channel rate
    l: float        # pure-dephasing rate
    a_plus: float   # (f + g) / 2
    a_minus: float  # (f - g) / 2
    b: float        # a_plus + 2 l (transverse damping)
    phi_dot: float  # frame angular velocity


@dataclass(frozen=True)
class TimescaleReport:
    """Secular-validity check: intrinsic beat vs relaxation and drive-change times.

    ``tau_r`` is the literal spectral expression 1/(2 pi J(w1)(n(w1)+1)); the
    coupling strength is not folded in, so the effective relaxation time is
    tau_r / coupling^2. ``margin`` = min(tau_r, tau_a) / tau_s.
    """

    tau_s: float
    tau_r: float
    tau_a: float
    secular_ok: bool
    margin: float
    threshold: float


def _trig_theta_minus_2phi(t: float, p: LZParams, b: BathParams) -> tuple[float, float, float]:
    """(sin(theta-2phi), cos(theta-2phi), Omega) without evaluating phi itself."""
    vt = p.v * t
    om = float(np.hypot(vt, p.delta))
    sin_th, cos_th = np.sin(b.angle), np.cos(b.angle)
    s = (sin_th * vt - cos_th * p.delta) / om
    c = (cos_th * vt + sin_th * p.delta) / om
    return s, c, om


def coefficients(t: float, p: LZParams, b: BathParams) -> GeneratorCoefficients:
    """Generator coefficients at time ``t`` (frequency-shift terms only when enabled)."""
    s, c, om = _trig_theta_minus_2phi(t, p, b)
    lam2 = b.coupling * b.coupling
    w1 = 2.0 * om
    gamma1 = kossakowski_rate(w1, b)
    gamma2 = kossakowski_rate(-w1, b)
    gamma0 = kossakowski_rate(0.0, b)
    k = om
    if b.lamb_shift_enabled:
        k += 0.5 * lam2 * s * s * lamb_shift_difference(w1, b)
    f = 0.25 * lam2 * s * s * gamma1
    g = 0.25 * lam2 * s * s * gamma2
    l = 0.25 * lam2 * c * c * gamma0
    a_plus = 0.5 * (f + g)
    a_minus = 0.5 * (f - g)
    return GeneratorCoefficients(
        k=k, f=f, g=g, l=l,
        a_plus=a_plus, a_minus=a_minus, b=a_plus + 2.0 * l,
        phi_dot=float(mixing_angle_rate(t, p)),
    )


def bloch_matrix(t: float, p: LZParams, b: BathParams) -> tuple[np.ndarray, np.ndarray]:
    """Affine Bloch dynamics (Q, q) with ds/dt = Q s + q."""
    co = coefficients(t, p, b)
    q_mat = np.array(
        [
            [-co.b, -2.0 * co.k, -2.0 * co.phi_dot],
            [2.0 * co.k, -co.b, 0.0],
            [2.0 * co.phi_dot, 0.0, -2.0 * co.a_plus],
        ]
    )
    q_vec = np.array([0.0, 0.0, -2.0 * co.a_minus])
    return q_mat, q_vec


def apply_generator(rho, t: float, p: LZParams, b: BathParams) -> np.ndarray:
    """Generator action on a Hermitian 2x2 matrix; output is traceless Hermitian."""
    r = _as_square(rho, dim=2)
    if hermiticity_defect(r) > 1e-10:
        raise ValueError("apply_generator expects a Hermitian input")
    co = coefficients(t, p, b)
    h = co.k * SIGMA_Z - co.phi_dot * SIGMA_Y
    out = -1.0j * (h @ r - r @ h)
    sp_sm = SIGMA_PLUS @ SIGMA_MINUS
    sm_sp = SIGMA_MINUS @ SIGMA_PLUS
    out += co.f * (SIGMA_MINUS @ r @ SIGMA_PLUS - 0.5 * (sp_sm @ r + r @ sp_sm))
    out += co.g * (SIGMA_PLUS @ r @ SIGMA_MINUS - 0.5 * (sm_sp @ r + r @ sm_sp))
    out += co.l * (SIGMA_Z @ r @ SIGMA_Z - r)
    return out


def slow_limit_coefficients(p: LZParams, b: BathParams) -> GeneratorCoefficients:
    """Coefficients frozen at the slow-driving crossing values.

    Omega -> delta, mixing angle -> pi/4 and frame velocity -> 0, so
    sin^2(theta - 2 phi) -> cos^2(theta) and cos^2 -> sin^2(theta).
    """
    lam2 = b.coupling * b.coupling
    cos2 = np.cos(b.angle) ** 2
    sin2 = np.sin(b.angle) ** 2
    w1 = 2.0 * p.delta
    k = p.delta
    if b.lamb_shift_enabled:
        k += 0.5 * lam2 * cos2 * lamb_shift_difference(w1, b)
    f = 0.25 * lam2 * cos2 * kossakowski_rate(w1, b)
    g = 0.25 * lam2 * cos2 * kossakowski_rate(-w1, b)
    l = 0.25 * lam2 * sin2 * kossakowski_rate(0.0, b)
    a_plus = 0.5 * (f + g)
    a_minus = 0.5 * (f - g)
    return GeneratorCoefficients(
        k=float(k), f=float(f), g=float(g), l=float(l),
        a_plus=float(a_plus), a_minus=float(a_minus), b=float(a_plus + 2.0 * l),
        phi_dot=0.0,
    )


def timescales(t: float, p: LZParams, b: BathParams, threshold: float = 10.0) -> TimescaleReport:
    """Secular-approximation timescales and validity flag at time ``t``.

    The drive-change time is piecewise with a factor-2 jump at t = delta/v;
    within 1% of that seam the smaller branch value is used (conservative).
    """
    om = float(gap(t, p))
    w1 = 2.0 * om
    tau_s = 1.0 / w1
    rate = float(
        2.0 * np.pi * spectral_density(w1, b) * (mean_occupation(w1, b.temperature) + 1.0)
    )
    # far beyond the cutoff the spectral weight underflows: no relaxation at all
    tau_r = 1.0 / rate if rate > 0.0 else np.inf
    seam = p.delta / p.v
    branch1 = 2.0 * om * om / (p.v * p.delta)
    branch2 = om * om / (p.v * p.v * t) if t > 0 else np.inf
    if abs(t - seam) <= 0.01 * seam:
        tau_a = min(branch1, branch2)
    elif t <= seam:
        tau_a = branch1
    else:
        tau_a = branch2
    margin = min(tau_r, tau_a) / tau_s
    return TimescaleReport(
        tau_s=tau_s,
        tau_r=tau_r,
        tau_a=float(tau_a),
        secular_ok=bool(margin >= threshold),
        margin=float(margin),
        threshold=float(threshold),
    )
