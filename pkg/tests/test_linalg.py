import numpy as np
import pytest

from lz_dissipate.linalg import (
    ID2,
    ID4,
    NonHermitianError,
    PAULI,
    SIGMA_X,
    SIGMA_Z,
    hermitian_eigenvalues,
    hermiticity_defect,
    kron,
    partial_transpose_second,
    require_density,
)


def bell_density():
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1.0 / np.sqrt(2.0)
    return np.outer(psi, psi.conj())


def random_hermitian(rng, n=4, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (a + a.conj().T)


def test_eigenvalues_identity():
    assert np.allclose(hermitian_eigenvalues(ID4), [1, 1, 1, 1], atol=1e-14)


def test_eigenvalues_sigma_z_kron():
    vals = hermitian_eigenvalues(kron(SIGMA_Z, SIGMA_Z))
    assert np.allclose(vals, [-1, -1, 1, 1], atol=1e-14)


def test_bell_partial_transpose_spectrum():
    vals = hermitian_eigenvalues(partial_transpose_second(bell_density()))
    assert np.allclose(vals, [-0.5, 0.5, 0.5, 0.5], atol=1e-13)


def test_eigenvalues_match_lapack_and_trace():
    rng = np.random.default_rng(7)
    for _ in range(200):
        m = random_hermitian(rng)
        vals = hermitian_eigenvalues(m)
        assert np.all(np.diff(vals) >= 0)
        assert abs(vals.sum() - m.trace().real) <= 1e-10
        assert np.abs(vals - np.linalg.eigvalsh(m)).max() <= 1e-12


def test_eigenvalues_large_norm():
    rng = np.random.default_rng(8)
    m = random_hermitian(rng, scale=1e4)
    assert np.abs(hermitian_eigenvalues(m) - np.linalg.eigvalsh(m)).max() <= 1e-8


def test_non_hermitian_rejected_with_diagnostic():
    m = ID4 + 1e-6 * np.array([[0, 1j, 0, 0]] + [[0] * 4] * 3)
    with pytest.raises(NonHermitianError, match="1e-06|e-06"):
        hermitian_eigenvalues(m)


def test_drifted_input_is_symmetrized():
    rng = np.random.default_rng(9)
    m = random_hermitian(rng)
    drift = 1e-13 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    vals = hermitian_eigenvalues(m + drift)
    assert np.abs(vals - np.linalg.eigvalsh(m)).max() <= 1e-12
    # symmetrization is exact in IEEE arithmetic
    half = 0.5 * ((m + drift) + (m + drift).conj().T)
    assert hermiticity_defect(half) == 0.0


def test_partial_transpose_product_state():
    rng = np.random.default_rng(10)
    a = random_hermitian(rng, n=2)
    b = random_hermitian(rng, n=2)
    assert np.array_equal(partial_transpose_second(kron(a, b)), kron(a, b.T))


def test_partial_transpose_involution_and_trace():
    rng = np.random.default_rng(11)
    for _ in range(50):
        m = random_hermitian(rng)
        pt = partial_transpose_second(m)
        assert np.array_equal(partial_transpose_second(pt), m)  # exact involution
        assert abs(pt.trace() - m.trace()) == 0.0
        assert hermiticity_defect(pt) <= 1e-15


def test_partial_transpose_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        partial_transpose_second(ID2)


def test_kron_basics():
    assert np.array_equal(kron(ID2, ID2), ID4)
    e00 = np.zeros(4)
    e00[0] = 1.0
    e10 = np.zeros(4)
    e10[2] = 1.0
    assert np.allclose(kron(SIGMA_X, ID2) @ e00, e10)


def test_kron_mixed_product_and_trace():
    rng = np.random.default_rng(12)
    for _ in range(20):
        a, b, c, d = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(4))
        assert np.allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-13)
        assert abs(np.trace(kron(a, b)) - np.trace(a) * np.trace(b)) <= 1e-13


def test_pt_spectrum_of_density_sums_to_one():
    rng = np.random.default_rng(13)
    for _ in range(50):
        m = random_hermitian(rng)
        m = m @ m.conj().T
        rho = m / m.trace().real
        mu = hermitian_eigenvalues(partial_transpose_second(rho))
        assert abs(mu.sum() - 1.0) <= 1e-10


def test_require_density():
    rho = bell_density()
    out = require_density(rho)
    assert np.allclose(out, rho)
    with pytest.raises(ValueError, match="trace"):
        require_density(2.0 * rho)
    not_positive = np.diag([0.75, 0.75, -0.25, -0.25]).astype(complex)
    with pytest.raises(ValueError, match="eigenvalue"):
        require_density(not_positive)
    sx = sum(kron(p, p) for p in PAULI)
    with pytest.raises(NonHermitianError):
        require_density(rho + 1e-3 * 1j * sx)
