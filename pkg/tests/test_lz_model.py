import numpy as np
import pytest

from lz_dissipate.linalg import SIGMA_X
from lz_dissipate.lz_model import (
    LZParams,
    gap,
    hamiltonian_lab,
    mixing_angle,
    mixing_angle_rate,
    rotation,
    transition_frequencies,
)


def test_params_validated():
    with pytest.raises(ValueError):
        LZParams(delta=-1.0, v=1.0)
    with pytest.raises(ValueError):
        LZParams(delta=1.0, v=0.0)


def test_gap_values():
    assert gap(0.0, LZParams(10.0, 1.0)) == 10.0
    assert gap(1.0, LZParams(3.0, 4.0)) == pytest.approx(5.0, abs=1e-14)
    assert gap(100.0, LZParams(10.0, 1.0)) == pytest.approx(np.sqrt(10100.0), rel=1e-15)


def test_mixing_angle_endpoints():
    p = LZParams(10.0, 1.0)
    assert mixing_angle(0.0, p) == pytest.approx(np.pi / 4, abs=1e-15)
    assert mixing_angle(1e9, p) == pytest.approx(0.0, abs=1e-8)
    assert mixing_angle(-1e9, p) == pytest.approx(np.pi / 2, abs=1e-8)


def test_mixing_angle_monotone_and_continuous():
    p = LZParams(10.0, 1.0)
    t = np.linspace(-100.0, 100.0, 20001)
    phi = mixing_angle(t, p)
    assert np.all(np.diff(phi) < 0)
    assert np.abs(np.diff(phi)).max() < 1e-3
    assert np.all((phi > 0) & (phi < np.pi / 2))


def test_mixing_angle_rate_values():
    p = LZParams(10.0, 1.0)
    assert mixing_angle_rate(0.0, p) == pytest.approx(-1.0 / 20.0, rel=1e-15)
    assert abs(mixing_angle_rate(1e8, p)) < 1e-14
    # slow-driving limit: rate vanishes with v at fixed t
    assert abs(mixing_angle_rate(5.0, LZParams(10.0, 1e-12))) < 1e-13


def test_mixing_angle_rate_matches_finite_difference():
    # central difference of the angle is the independent oracle for the rate
    p = LZParams(10.0, 1.0)
    h = 1e-6
    for t in (-7.3, -1.0, 0.0, 1.0, 2.5, 40.0):
        fd = (mixing_angle(t + h, p) - mixing_angle(t - h, p)) / (2 * h)
        assert mixing_angle_rate(t, p) == pytest.approx(fd, rel=1e-6)


def test_hamiltonian_lab():
    p = LZParams(10.0, 1.0)
    assert np.array_equal(hamiltonian_lab(0.0, p), 10.0 * SIGMA_X)
    for t in np.linspace(-20, 20, 7):
        vals = np.linalg.eigvalsh(hamiltonian_lab(t, p))
        om = gap(t, p)
        assert np.allclose(vals, [-om, om], atol=1e-12)
    assert np.allclose(np.linalg.eigvalsh(hamiltonian_lab(1.0, LZParams(3.0, 4.0))), [-5, 5])


def test_rotation_diagonalizes():
    rng = np.random.default_rng(3)
    # phi -> 0 far on the positive branch: rotation approaches the identity
    p = LZParams(1.0, 1.0)
    assert np.allclose(rotation(1e9, p), np.eye(2), atol=1e-9)
    # at the crossing the pi/4 rotation maps delta*sigma_x to delta*sigma_z
    r0 = rotation(0.0, LZParams(10.0, 1.0))
    d0 = r0 @ hamiltonian_lab(0.0, LZParams(10.0, 1.0)) @ r0.conj().T
    assert np.allclose(d0, np.diag([10.0, -10.0]), atol=1e-13)
    for _ in range(50):
        p = LZParams(rng.uniform(0.1, 50), rng.uniform(0.1, 10))
        t = rng.uniform(-50, 50)
        r = rotation(t, p)
        assert np.allclose(r @ r.conj().T, np.eye(2), atol=1e-14)
        d = r @ hamiltonian_lab(t, p) @ r.conj().T
        assert abs(d[0, 1]) < 1e-12 and abs(d[1, 0]) < 1e-12
        assert d[0, 0].real == pytest.approx(float(gap(t, p)), rel=1e-12)


def test_transition_frequencies():
    assert transition_frequencies(0.0, LZParams(10.0, 1.0)) == (20.0, -20.0, 0.0)
    w1, w2, w3 = transition_frequencies(1.0, LZParams(3.0, 4.0))
    assert (w1, w2, w3) == (pytest.approx(10.0), pytest.approx(-10.0), 0.0)
    rng = np.random.default_rng(4)
    for _ in range(20):
        w1, w2, w3 = transition_frequencies(
            rng.uniform(-40, 40), LZParams(rng.uniform(0.1, 50), rng.uniform(0.1, 10))
        )
        assert w1 + w2 == 0.0 and w3 == 0.0
