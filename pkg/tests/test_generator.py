import numpy as np
import pytest

from lz_dissipate.bath import BathParams, kossakowski_rate, lamb_shift_difference
from lz_dissipate.generator import (
    apply_generator,
    bloch_matrix,
    coefficients,
    slow_limit_coefficients,
    timescales,
)
from lz_dissipate.linalg import ID2, PAULI
from lz_dissipate.lz_model import LZParams


def bath(T=0.0, theta=0.0, wc=10.0 / 3.0, **kw):
    return BathParams(temperature=T, cutoff=wc, coupling=0.1, angle=theta, **kw)


def random_bloch_rho(rng):
    s = rng.uniform(-1, 1, 3)
    s *= rng.uniform(0, 1) / max(np.linalg.norm(s), 1e-12)
    rho = 0.5 * (ID2 + sum(si * P for si, P in zip(s, PAULI)))
    return s, rho


def pauli_projection(m):
    return np.array([np.trace(P @ m).real for P in PAULI])


def test_crossing_values_longitudinal_t0():
    # independent hand substitution: at the crossing sin^2(theta-2phi)=cos^2(theta)
    p = LZParams(10.0, 1.0)
    co = coefficients(0.0, p, bath())
    assert co.k == pytest.approx(10.0, rel=1e-15)
    assert co.f == pytest.approx(0.0025 * 2 * np.pi * 20.0 * np.exp(-6.0), rel=1e-13)
    assert co.g == 0.0 and co.l == 0.0
    assert co.a_plus == pytest.approx(co.f / 2, rel=1e-15)
    assert co.a_minus == pytest.approx(co.f / 2, rel=1e-15)
    assert co.b == pytest.approx(co.f / 2, rel=1e-15)
    assert co.phi_dot == pytest.approx(-0.05, rel=1e-15)


def test_transversal_zero_temperature_is_coherent():
    co = slow_limit_coefficients(LZParams(10.0, 1.0), bath(theta=np.pi / 2))
    # cos(pi/2) rounds to ~6e-17, so the rates vanish only to its square
    assert abs(co.f) < 1e-30 and co.g == 0.0 and co.l == 0.0
    assert co.k == 10.0


def test_slow_limit_convergence():
    # v -> 0 at fixed t: coefficients approach the frozen crossing values
    # (the dephasing coefficient converges linearly in vt/delta, so the
    # 1e-6 relative target needs |vt| ~ 1e-7 delta)
    p_ref = LZParams(10.0, 1.0)
    for theta in (0.0, np.pi / 6, np.pi / 3):
        for T in (0.0, 2.0):
            b = bath(T=T, theta=theta)
            target = slow_limit_coefficients(p_ref, b)
            co = coefficients(10.0, LZParams(10.0, 1e-7), b)  # |vt| = 1e-7 delta
            for name in ("k", "f", "g", "l", "a_plus", "a_minus", "b"):
                ref = getattr(target, name)
                got = getattr(co, name)
                if ref == 0.0:
                    assert abs(got) < 1e-12
                else:
                    assert got == pytest.approx(ref, rel=1e-6)


def test_bloch_matrix_structure():
    rng = np.random.default_rng(21)
    for _ in range(30):
        p = LZParams(rng.uniform(0.5, 50), rng.uniform(0.1, 10))
        b = bath(T=rng.choice([0.0, 1.0, 5.0]), theta=rng.uniform(0, 2 * np.pi))
        t = rng.uniform(-40, 40)
        co = coefficients(t, p, b)
        Q, q = bloch_matrix(t, p, b)
        assert np.trace(Q) == pytest.approx(-2 * co.b - 2 * co.a_plus, rel=1e-14)
        assert q[0] == q[1] == 0.0 and q[2] == pytest.approx(-2 * co.a_minus)
        assert Q[0, 1] == -Q[1, 0] and Q[0, 2] == -Q[2, 0] and Q[1, 2] == Q[2, 1] == 0.0
        # rate ordering holds everywhere
        assert co.b >= co.a_plus - 1e-15 >= abs(co.a_minus) - 1e-15


def test_bloch_matrix_slow_limit_block_diagonal():
    p = LZParams(10.0, 1e-12)
    Q, _ = bloch_matrix(0.0, p, bath())
    assert abs(Q[0, 2]) < 1e-12 and abs(Q[2, 0]) < 1e-12
    # transversal zero-temperature: only the coherent skew part survives
    Q, q = bloch_matrix(0.0, p, bath(theta=np.pi / 2))
    assert np.allclose(Q - np.array([[0, -20, 0], [20, 0, 0], [0, 0, 0]]), 0.0, atol=1e-12)
    assert np.allclose(q, 0.0)


def test_apply_generator_on_identity():
    # the affine part: generator of id is -2 a_minus sigma_z
    p = LZParams(10.0, 1.0)
    b = bath(T=2.0, theta=0.3)
    co = coefficients(1.3, p, b)
    out = apply_generator(ID2, 1.3, p, b)
    assert abs(np.trace(out)) < 1e-14
    assert np.allclose(pauli_projection(out), [0, 0, -4 * co.a_minus], atol=1e-14)


def test_apply_generator_damping_fixed_point():
    # rotated lower state diag(0, 1) is stationary at T=0, slow, longitudinal
    p = LZParams(10.0, 1e-12)
    rho = np.diag([0.0, 1.0]).astype(complex)
    out = apply_generator(rho, 0.0, p, bath())
    assert np.abs(out).max() < 1e-12


def test_apply_generator_matches_affine_action():
    rng = np.random.default_rng(22)
    for _ in range(500):
        p = LZParams(rng.uniform(0.5, 50), rng.uniform(0.1, 10))
        b = bath(T=rng.choice([0.0, 1.0, 5.0]), theta=rng.uniform(0, 2 * np.pi))
        t = rng.uniform(-40, 40)
        s, rho = random_bloch_rho(rng)
        out = apply_generator(rho, t, p, b)
        assert abs(np.trace(out)) < 1e-13
        assert np.abs(out - out.conj().T).max() < 1e-13
        Q, q = bloch_matrix(t, p, b)
        assert np.abs(pauli_projection(out) - (Q @ s + q)).max() < 1e-12


def test_apply_generator_rejects_non_hermitian():
    with pytest.raises(ValueError):
        apply_generator(np.array([[0, 1], [0, 0]], dtype=complex), 0.0, LZParams(1, 1), bath())


def test_coefficients_with_lamb_shift():
    p = LZParams(10.0, 1.0)
    b = bath(lamb_shift_enabled=True)
    co = coefficients(0.0, p, b)
    expected = 10.0 + 0.5 * 0.01 * 1.0 * lamb_shift_difference(20.0, b)
    assert co.k == pytest.approx(expected, rel=1e-12)
    assert co.k != 10.0
    # toggle off: the coherent coefficient reduces to the bare splitting
    assert coefficients(0.0, p, bath()).k == 10.0


def test_timescales_at_crossing():
    rep = timescales(0.0, LZParams(10.0, 1.0), bath())
    assert rep.tau_s == pytest.approx(1.0 / 20.0)
    assert rep.tau_a == pytest.approx(20.0)
    assert rep.tau_r == pytest.approx(1.0 / kossakowski_rate(20.0, bath()), rel=1e-12)


def test_timescales_seam():
    # the drive-change time is discontinuous by a factor 2 at t = delta/v;
    # near the seam the validator takes the smaller branch
    p = LZParams(10.0, 1.0)
    seam = p.delta / p.v
    om2 = p.delta**2 + (p.v * seam) ** 2
    branch1 = 2 * om2 / (p.v * p.delta)
    branch2 = om2 / (p.v**2 * seam)
    assert branch1 == pytest.approx(2 * branch2)
    b = bath()
    assert timescales(seam, p, b).tau_a == pytest.approx(branch2, rel=1e-2)
    assert timescales(seam * 1.005, p, b).tau_a == pytest.approx(branch2, rel=1e-2)
    assert timescales(seam * 1.05, p, b).tau_a > branch2  # outside the seam band
    assert timescales(seam * 0.9, p, b).tau_a == pytest.approx(
        2 * (p.delta**2 + (p.v * seam * 0.9) ** 2) / (p.v * p.delta), rel=1e-12
    )


def test_figure_regime_is_secular():
    # slow driving, delta=10, cutoff delta/3, weak coupling, T=0
    p = LZParams(10.0, 1e-4)
    for t in (-100.0, 0.0, 100.0):
        rep = timescales(t, p, bath())
        assert rep.secular_ok
        assert rep.margin >= 10.0


def test_margin_reported_not_enforced():
    # a non-adiabatic corner fails the check but only reports it
    rep = timescales(0.0, LZParams(0.1, 1.0), bath(wc=0.1 / 3))
    assert not rep.secular_ok
    assert rep.margin < 1.0
    assert np.isfinite(rep.tau_s)
