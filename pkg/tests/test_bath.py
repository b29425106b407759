import numpy as np
import pytest
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from lz_dissipate.bath import (
    PV_SIMPSON_TOL,
    BathParams,
    _pv_transform,
    _rate_scalar,
    kossakowski_rate,
    lamb_shift_coefficient,
    lamb_shift_difference,
    mean_occupation,
    spectral_density,
)

WC = 10.0 / 3.0


def make_bath(T=0.0, **kw):
    kw.setdefault("cutoff", WC)
    kw.setdefault("coupling", 0.1)
    return BathParams(temperature=T, **kw)


def test_params_validated():
    with pytest.raises(ValueError):
        BathParams(temperature=-1.0, cutoff=1.0, coupling=0.1)
    with pytest.raises(ValueError):
        BathParams(temperature=0.0, cutoff=0.0, coupling=0.1)
    with pytest.raises(ValueError):
        BathParams(temperature=0.0, cutoff=1.0, coupling=0.1, angle=7.0)
    assert make_bath().pv_upper_limit == pytest.approx(50.0 * WC)


def test_spectral_density():
    b = make_bath()
    assert spectral_density(0.0, b) == 0.0
    assert spectral_density(WC, b) == pytest.approx(WC * np.exp(-1.0), rel=1e-15)
    with pytest.raises(ValueError):
        spectral_density(-1.0, b)
    # maximum at the cutoff, located by a finite-difference sign change
    h = 1e-6
    dplus = spectral_density(WC + h, b) - spectral_density(WC, b)
    dminus = spectral_density(WC, b) - spectral_density(WC - h, b)
    assert dminus > 0 > dplus


def test_mean_occupation():
    assert mean_occupation(3.0, 0.0) == 0.0
    assert mean_occupation(np.log(2.0), 1.0) == pytest.approx(1.0, rel=1e-14)
    # high-temperature expansion: n ~ T/w within 1% at T/w = 100
    assert mean_occupation(1.0, 100.0) == pytest.approx(100.0, rel=1e-2)
    with pytest.raises(ValueError):
        mean_occupation(0.0, 1.0)
    with pytest.raises(ValueError):
        mean_occupation(-2.0, 1.0)


def test_kossakowski_examples():
    b0 = make_bath(T=0.0)
    # emission at w = 2*delta, delta = 10: 2*pi * 20 * exp(-20/(10/3))
    assert kossakowski_rate(20.0, b0) == pytest.approx(40.0 * np.pi * np.exp(-6.0), rel=1e-14)
    assert kossakowski_rate(-20.0, b0) == 0.0
    b2 = make_bath(T=2.0)
    assert kossakowski_rate(0.0, b2) == pytest.approx(4.0 * np.pi, rel=1e-15)
    # the zero-frequency value is the w -> 0 limit of the absorption branch
    assert kossakowski_rate(-1e-8, b2) == pytest.approx(4.0 * np.pi, rel=1e-6)
    assert kossakowski_rate(1e-8, b2) == pytest.approx(4.0 * np.pi, rel=1e-6)


def test_gamma0_alternative_reading():
    b = make_bath(T=2.0, gamma0_vanishes=True)
    assert kossakowski_rate(0.0, b) == 0.0
    assert kossakowski_rate(1.0, b) > 0.0  # only the dc value changes


def test_detailed_balance():
    for T in (0.5, 1.0, 2.0, 5.0, 10.0):
        b = make_bath(T=T)
        for w in np.linspace(0.05, 30.0, 40):
            assert kossakowski_rate(w, b) / kossakowski_rate(-w, b) == pytest.approx(
                np.exp(w / T), rel=1e-10
            )


def test_rate_positive_and_decaying():
    rng = np.random.default_rng(5)
    for T in (0.0, 1.0, 5.0):
        b = make_bath(T=T)
        w = rng.uniform(-200, 200, 200)
        assert np.all(kossakowski_rate(w, b) >= 0.0)
        assert kossakowski_rate(400.0, b) < 1e-40
        assert kossakowski_rate(-400.0, b) < 1e-40


def test_lamb_shift_requires_toggle():
    with pytest.raises(ValueError):
        lamb_shift_coefficient(1.0, make_bath())


def test_lamb_shift_against_scipy_cauchy_weight():
    # independent oracle: scipy's Cauchy-weight quadrature for the PV integral
    for T in (0.0, 2.0):
        b = make_bath(T=T, lamb_shift_enabled=True)
        L = b.pv_upper_limit
        for w in (-20.0, -3.0, 5.0, 20.0):
            ours = lamb_shift_coefficient(w, b)
            parts = []
            for lo, hi in ((-L, 0.0), (0.0, L)):
                if lo < w < hi:
                    val, _ = quad(
                        lambda nu: -kossakowski_rate(nu, b), lo, hi,
                        weight="cauchy", wvar=w, limit=400,
                    )
                else:
                    val, _ = quad(
                        lambda nu: kossakowski_rate(nu, b) / (w - nu), lo, hi, limit=400,
                    )
                parts.append(val)
            oracle = sum(parts) / (2.0 * np.pi)
            assert ours == pytest.approx(oracle, rel=2e-6, abs=2e-7)


def test_lamb_shift_difference_reproducible_under_refinement():
    b = make_bath(T=0.0, lamb_shift_enabled=True)
    gamma = _rate_scalar(b)
    tol0 = PV_SIMPSON_TOL * max(1.0, 2.0 * np.pi * b.cutoff)  # production setting
    for w in (5.0, 20.0):
        def diff_at(tol):
            a, _ = _pv_transform(gamma, w, b.pv_upper_limit, b.cutoff, tol)
            c, _ = _pv_transform(gamma, -w, b.pv_upper_limit, b.cutoff, tol)
            return (a - c) / (2.0 * np.pi)

        coarse = diff_at(tol0)
        fine = diff_at(tol0 / 16.0)
        assert np.isfinite(coarse)
        assert abs(coarse - fine) <= 1e-8 * max(1.0, abs(fine))
        assert lamb_shift_difference(w, b) == pytest.approx(coarse, rel=1e-12)


def test_kramers_kronig_double_transform_recovers_rate():
    # applying the transform twice must give back -gamma; the residual is
    # dominated by the finite-window truncation, which shrinks like 1/L,
    # so the quadrature tolerance only needs to sit well below that
    b = make_bath(T=1.0)
    gamma = _rate_scalar(b)
    tol = 1e-7 * b.cutoff
    peak = kossakowski_rate(b.cutoff, b)
    probes = np.array([-6.0, -2.0, 1.5, 5.0, 12.0])

    def double_transform_residual(L):
        # the first transform varies on the cutoff scale near the rate's
        # support and like 1/nu far out: dense core grid, geometric tails
        core = np.linspace(-30.0 * b.cutoff, 30.0 * b.cutoff, 1201)
        tail = np.geomspace(30.0 * b.cutoff, L, 140)[1:]
        grid = np.unique(np.concatenate([-tail[::-1], core, tail]))
        first = np.array([_pv_transform(gamma, float(x), L, b.cutoff, tol)[0] / np.pi for x in grid])
        spline = CubicSpline(grid, first)
        worst = 0.0
        for w in probes:
            second = _pv_transform(lambda nu: float(spline(nu)), float(w), L, b.cutoff, tol)[0] / np.pi
            worst = max(worst, abs(second + gamma(w)))
        return worst

    r400 = double_transform_residual(400.0 * b.cutoff)
    assert r400 <= 0.005 * peak
    assert r400 <= 0.7 * double_transform_residual(200.0 * b.cutoff)  # ~1/L decay
