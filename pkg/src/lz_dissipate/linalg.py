"""Dense complex matrix helpers sized for the 2x2 and 4x4 problems of this package.

Matrices are plain ``numpy`` ``complex128`` arrays. Hermitian eigenvalues are
computed with a cyclic Jacobi sweep on the 2n x 2n real-symmetric embedding of
the Hermitian matrix; inputs that are Hermitian only up to integrator drift are
symmetrized first.
"""

from __future__ import annotations

import numpy as np
from numba import njit

ID2 = np.eye(2, dtype=complex)
ID4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)   # |0><1|
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |1><0|
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

for _m in (ID2, ID4, SIGMA_X, SIGMA_Y, SIGMA_Z, SIGMA_PLUS, SIGMA_MINUS):
    _m.setflags(write=False)


class NonHermitianError(ValueError):
    """Input matrix is not Hermitian within the requested tolerance."""


def _as_square(m, dim=None) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"expected a {dim}x{dim} matrix, got shape {a.shape}")
    return a


def hermiticity_defect(m) -> float:
    """max |M - M^dagger| over entries."""
    a = _as_square(m)
    return float(np.abs(a - a.conj().T).max())


def kron(a, b) -> np.ndarray:
    """Kronecker product of two square complex matrices."""
    return np.kron(_as_square(a), _as_square(b))


def partial_transpose_second(m) -> np.ndarray:
    """Transpose the second tensor factor of a two-qubit (4x4) matrix.

    Exact entry permutation, hence an exact involution that preserves the
    trace and Hermiticity.
    """
    a = _as_square(m, dim=4)
    return a.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4).copy()


@njit(cache=True)
def _jacobi_eigvals(a, tol, max_sweeps):
    """Cyclic Jacobi eigenvalues of a real symmetric matrix (in-place on a copy).

    Returns (eigenvalues ascending, final off-diagonal Frobenius norm).
    """
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += 2.0 * a[p, q] * a[p, q]
        off = np.sqrt(off)
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
    off = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            off += 2.0 * a[p, q] * a[p, q]
    off = np.sqrt(off)
    vals = np.empty(n)
    for k in range(n):
        vals[k] = a[k, k]
    return np.sort(vals), off


def hermitian_eigenvalues(m, tol: float = 1e-12) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix.

    The input must be Hermitian within ``tol`` (it is symmetrized before
    solving to suppress integrator drift). Uses a cyclic Jacobi iteration on
    the 2n x 2n real-symmetric embedding [[A, -B], [B, A]] of M = A + iB;
    each eigenvalue of M appears twice in the embedding.
    """
    a = _as_square(m)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NonHermitianError(
            f"matrix is not Hermitian: max|M - M^dagger| = {defect:.3e} > {tol:.1e}"
        )
    h = 0.5 * (a + a.conj().T)
    n = h.shape[0]
    re = np.ascontiguousarray(h.real)
    im = np.ascontiguousarray(h.imag)
    emb = np.empty((2 * n, 2 * n))
    emb[:n, :n] = re
    emb[n:, n:] = re
    emb[:n, n:] = -im
    emb[n:, :n] = im
    # Jacobi convergence threshold is relative: work on the unit-Frobenius-norm
    # matrix (an absolute 1e-13 sits below the roundoff floor for ||M|| >> 1).
    scale = float(np.linalg.norm(emb))
    if scale == 0.0:
        return np.zeros(n)
    vals2, off = _jacobi_eigvals(emb / scale, 1e-13, 60)
    if off >= 1e-12:
        raise RuntimeError(f"Jacobi iteration stalled: off-diagonal norm {off:.3e}")
    vals2 *= scale
    # eigenvalues come doubled; average each adjacent pair of the sorted list
    return 0.5 * (vals2[0::2] + vals2[1::2])


def require_density(m, trace_tol: float = 1e-8, min_eigenvalue: float = -1e-7) -> np.ndarray:
    """Validate that ``m`` is a density matrix within tolerance; return it symmetrized.

    Checks Hermiticity (1e-12), unit trace within ``trace_tol`` and spectrum
    bounded below by ``min_eigenvalue``.
    """
    a = _as_square(m)
    defect = hermiticity_defect(a)
    if defect > 1e-12:
        raise NonHermitianError(
            f"density matrix not Hermitian: defect {defect:.3e}"
        )
    h = 0.5 * (a + a.conj().T)
    tr = float(h.trace().real)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr!r} deviates from 1 by {abs(tr - 1.0):.3e}")
    lo = float(hermitian_eigenvalues(h).min())
    if lo < min_eigenvalue:
        raise ValueError(f"density matrix has eigenvalue {lo:.3e} < {min_eigenvalue:.1e}")
    return h
