"""JIT-compiled numerical core: generator coefficients, both ODE right-hand
sides, and the adaptive Dormand-Prince 5(4) / fixed-step RK4 integrators.

Everything here is deterministic scalar float64 arithmetic (no fastmath, no
threading), so repeated runs are bit-identical.

Parameter packing (``cp`` vector):
    0 delta, 1 v, 2 sin(angle), 3 cos(angle), 4 temperature, 5 cutoff,
    6 coupling^2, 7 zero-frequency rate gamma(0), 8 lamb-shift flag (0/1)

State packing:
    mode 0 (Bloch):  y[0:3] = s, y[3+3j : 6+3j] = chi column j  (12 reals)
    mode 1 (master): y[0:16] = Re(rho).ravel(), y[16:32] = Im(rho).ravel()
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_INVARIANT = 2
STATUS_MAX_STEPS = 3

# Dormand-Prince 5(4) dense-output interpolant (same pair scipy's RK45 uses).
_DP_P = np.array(
    [
        [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0],
        [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0],
        [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0],
        [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0],
        [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0],
    ]
)


@njit(cache=True)
def coeff_core(t, cp, ls_x, ls_y):
    """Generator coefficients at time t: (k, f, g, l, a_plus, a_minus, b, phi_dot).

    sin/cos of (angle - 2 phi) are evaluated through vt/Omega and delta/Omega,
    avoiding any trig call on the time-dependent angle.
    """
    delta = cp[0]
    v = cp[1]
    sin_th = cp[2]
    cos_th = cp[3]
    temperature = cp[4]
    cutoff = cp[5]
    lam2 = cp[6]
    gamma0 = cp[7]
    lamb_on = cp[8]

    vt = v * t
    om = math.sqrt(vt * vt + delta * delta)
    pd = -delta * v / (2.0 * om * om)
    s = (sin_th * vt - cos_th * delta) / om
    c = (cos_th * vt + sin_th * delta) / om

    w1 = 2.0 * om
    j = w1 * math.exp(-w1 / cutoff)
    if temperature > 0.0:
        nbar = 1.0 / math.expm1(w1 / temperature)  # overflows to inf -> 0.0
    else:
        nbar = 0.0
    g1 = TWO_PI * j * (nbar + 1.0)
    g2 = TWO_PI * j * nbar

    s2 = s * s
    k = om
    if lamb_on != 0.0:
        k += 0.5 * lam2 * s2 * np.interp(om, ls_x, ls_y)
    f = 0.25 * lam2 * s2 * g1
    g = 0.25 * lam2 * s2 * g2
    l = 0.25 * lam2 * c * c * gamma0
    ap = 0.5 * (f + g)
    am = 0.5 * (f - g)
    return k, f, g, l, ap, am, ap + 2.0 * l, pd


@njit(cache=True)
def _rhs(mode, t, y, dy, cp, rvec, indptr, cols, data5, ls_x, ls_y):
    k, f, g, l, ap, am, bb, pd = coeff_core(t, cp, ls_x, ls_y)
    if mode == 0:
        # ds = Q s + q ; dchi_j = Q chi_j + r_j q
        dy[0] = -bb * y[0] - 2.0 * k * y[1] - 2.0 * pd * y[2]
        dy[1] = 2.0 * k * y[0] - bb * y[1]
        dy[2] = 2.0 * pd * y[0] - 2.0 * ap * y[2] - 2.0 * am
        for j in range(3):
            o = 3 + 3 * j
            dy[o] = -bb * y[o] - 2.0 * k * y[o + 1] - 2.0 * pd * y[o + 2]
            dy[o + 1] = 2.0 * k * y[o] - bb * y[o + 1]
            dy[o + 2] = 2.0 * pd * y[o] - 2.0 * ap * y[o + 2] - 2.0 * am * rvec[j]
    else:
        # weighted sparse superoperator: columns tagged (k, phi_dot, f, g, l)
        for i in range(32):
            acc = 0.0
            for nz in range(indptr[i], indptr[i + 1]):
                w = (
                    k * data5[nz, 0]
                    + pd * data5[nz, 1]
                    + f * data5[nz, 2]
                    + g * data5[nz, 3]
                    + l * data5[nz, 4]
                )
                acc += w * y[cols[nz]]
            dy[i] = acc


@njit(cache=True)
def _invariant_defect(mode, y):
    """Largest violation of the cheap per-step state bounds (0 when clean)."""
    worst = 0.0
    if mode == 0:
        for i in range(12):
            d = abs(y[i]) - 1.0
            if d > worst:
                worst = d
        s2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] - 1.0
        if s2 > worst:
            worst = s2
    else:
        tr_re = y[0] + y[5] + y[10] + y[15] - 1.0
        tr_im = y[16] + y[21] + y[26] + y[31]
        worst = max(abs(tr_re), abs(tr_im))
        for i in range(32):
            d = abs(y[i]) - 1.0
            if d > worst:
                worst = d
    return worst


@njit(cache=True)
def integrate_adaptive(
    mode,
    y0,
    t0,
    t1,
    rtol,
    atol,
    out_times,
    cp,
    rvec,
    indptr,
    cols,
    data5,
    ls_x,
    ls_y,
    check_invariants,
    max_steps,
):
    """Dormand-Prince 5(4) with error control and dense output on ``out_times``.

    Returns (status, t_fail, Y, n_out_done, n_accepted, n_rejected, n_rhs).
    ``Y`` rows are filled in grid order up to ``n_out_done``.
    """
    n = y0.size
    n_out = out_times.size
    Y = np.zeros((n_out, n))
    y = y0.copy()
    ynew = np.empty(n)
    tmp = np.empty(n)
    dy = np.empty(n)
    K = np.empty((7, n))

    t = t0
    oi = 0
    while oi < n_out and out_times[oi] <= t0:
        for i in range(n):
            Y[oi, i] = y[i]
        oi += 1

    _rhs(mode, t, y, dy, cp, rvec, indptr, cols, data5, ls_x, ls_y)
    nrhs = 1
    for i in range(n):
        K[0, i] = dy[i]

    # initial step size (Hairer-style two-stage heuristic)
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (K[0, i] / sc) ** 2
    d0 = math.sqrt(d0 / n)
    d1 = math.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    span = t1 - t0
    if h > span:
        h = span
    for i in range(n):
        tmp[i] = y[i] + h * K[0, i]
    _rhs(mode, t0 + h, tmp, dy, cp, rvec, indptr, cols, data5, ls_x, ls_y)
    nrhs += 1
    d2 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d2 += ((dy[i] - K[0, i]) / sc) ** 2
    d2 = math.sqrt(d2 / n) / h
    dmax = max(d1, d2)
    if dmax <= 1e-15:
        h1 = max(1e-6, h * 1e-3)
    else:
        h1 = (0.01 / dmax) ** 0.2
    h = min(100.0 * h, h1, span)

    nacc = 0
    nrej = 0
    nsteps = 0
    while t < t1:
        nsteps += 1
        if nsteps > max_steps:
            return STATUS_MAX_STEPS, t, Y, oi, nacc, nrej, nrhs
        if h < 1e-14 * max(abs(t), 1.0):
            return STATUS_STEP_UNDERFLOW, t, Y, oi, nacc, nrej, nrhs
        if t + h > t1:
            h = t1 - t

        # stages 2..7
        for i in range(n):
            tmp[i] = y[i] + h * (0.2 * K[0, i])
        _rhs(mode, t + 0.2 * h, tmp, dy, cp, rvec, indptr, cols, data5, ls_x, ls_y)
        for i in range(n):
            K[1, i] = dy[i]
        for i in range(n):
            tmp[i] = y[i] + h * (0.075 * K[0, i] + 0.225 * K[1, i])
        _rhs(mode, t + 0.3 * h, tmp, dy, cp, rvec, indptr, cols, data5, ls_x, ls_y)
        for i in range(n):
            K[2, i] = dy[i]
        for i in range(n):
            tmp[i] = y[i] + h * (
                (44.0 / 45.0) * K[0, i] - (56.0 / 15.0) * K[1, i] + (32.0 / 9.0) * K[2, i]
            )
        _rhs(mode, t + 0.8 * h, tmp, dy, cp, rvec, indptr, cols, data5, ls_x, ls_y)
        for i in range(n):
            K[3, i] = dy[i]
        for i in range(n):
            tmp[i] = y[i] + h * (
                (19372.0 / 6561.0) * K[0, i]
                - (25360.0 / 2187.0) * K[1, i]
                + (64448.0 / 6561.0) * K[2, i]
                - (212.0 / 729.0) * K[3, i]
            )
        _rhs(mode, t + (8.0 / 9.0) * h, tmp, dy, cp, rvec, indptr, cols, data5, ls_x, ls_y)
        for i in range(n):
            K[4, i] = dy[i]
        for i in range(n):
            tmp[i] = y[i] + h * (
                (9017.0 / 3168.0) * K[0, i]
                - (355.0 / 33.0) * K[1, i]
                + (46732.0 / 5247.0) * K[2, i]
                + (49.0 / 176.0) * K[3, i]
                - (5103.0 / 18656.0) * K[4, i]
            )
        _rhs(mode, t + h, tmp, dy, cp, rvec, indptr, cols, data5, ls_x, ls_y)
        for i in range(n):
            K[5, i] = dy[i]
        for i in range(n):
            ynew[i] = y[i] + h * (
                (35.0 / 384.0) * K[0, i]
                + (500.0 / 1113.0) * K[2, i]
                + (125.0 / 192.0) * K[3, i]
                - (2187.0 / 6784.0) * K[4, i]
                + (11.0 / 84.0) * K[5, i]
            )
        _rhs(mode, t + h, ynew, dy, cp, rvec, indptr, cols, data5, ls_x, ls_y)
        for i in range(n):
            K[6, i] = dy[i]
        nrhs += 6

        errn = 0.0
        for i in range(n):
            e = h * (
                (71.0 / 57600.0) * K[0, i]
                - (71.0 / 16695.0) * K[2, i]
                + (71.0 / 1920.0) * K[3, i]
                - (17253.0 / 339200.0) * K[4, i]
                + (22.0 / 525.0) * K[5, i]
                - (1.0 / 40.0) * K[6, i]
            )
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            errn += (e / sc) ** 2
        errn = math.sqrt(errn / n)

        if errn <= 1.0:
            t_old = t
            t = t_old + h
            # dense output for grid points inside (t_old, t]
            while oi < n_out and out_times[oi] <= t:
                th = (out_times[oi] - t_old) / h
                th2 = th * th
                th3 = th2 * th
                th4 = th3 * th
                for i in range(n):
                    acc = 0.0
                    for sstage in range(7):
                        acc += K[sstage, i] * (
                            _DP_P[sstage, 0] * th
                            + _DP_P[sstage, 1] * th2
                            + _DP_P[sstage, 2] * th3
                            + _DP_P[sstage, 3] * th4
                        )
                    Y[oi, i] = y[i] + h * acc
                oi += 1
            for i in range(n):
                y[i] = ynew[i]
                K[0, i] = K[6, i]  # FSAL
            nacc += 1
            if check_invariants != 0 and _invariant_defect(mode, y) > 1e-6:
                return STATUS_INVARIANT, t, Y, oi, nacc, nrej, nrhs
            if errn == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * errn ** -0.2
                if fac > 5.0:
                    fac = 5.0
            h *= fac
        else:
            nrej += 1
            fac = 0.9 * errn ** -0.2
            if fac < 0.2:
                fac = 0.2
            if fac > 1.0:
                fac = 1.0
            h *= fac

    return STATUS_OK, t, Y, oi, nacc, nrej, nrhs


@njit(cache=True)
def integrate_rk4(
    mode,
    y0,
    out_times,
    h_base,
    cp,
    rvec,
    indptr,
    cols,
    data5,
    ls_x,
    ls_y,
    check_invariants,
):
    """Fixed-step classical RK4 audit integrator, landing exactly on the grid."""
    n = y0.size
    n_out = out_times.size
    Y = np.zeros((n_out, n))
    y = y0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    for i in range(n):
        Y[0, i] = y[i]
    nrhs = 0
    for seg in range(n_out - 1):
        ta = out_times[seg]
        tb = out_times[seg + 1]
        nstep = int(math.ceil((tb - ta) / h_base))
        if nstep < 1:
            nstep = 1
        h = (tb - ta) / nstep
        t = ta
        for _ in range(nstep):
            _rhs(mode, t, y, k1, cp, rvec, indptr, cols, data5, ls_x, ls_y)
            for i in range(n):
                tmp[i] = y[i] + 0.5 * h * k1[i]
            _rhs(mode, t + 0.5 * h, tmp, k2, cp, rvec, indptr, cols, data5, ls_x, ls_y)
            for i in range(n):
                tmp[i] = y[i] + 0.5 * h * k2[i]
            _rhs(mode, t + 0.5 * h, tmp, k3, cp, rvec, indptr, cols, data5, ls_x, ls_y)
            for i in range(n):
                tmp[i] = y[i] + h * k3[i]
            _rhs(mode, t + h, tmp, k4, cp, rvec, indptr, cols, data5, ls_x, ls_y)
            nrhs += 4
            for i in range(n):
                y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            t += h
        for i in range(n):
            Y[seg + 1, i] = y[i]
        if check_invariants != 0 and _invariant_defect(mode, y) > 1e-6:
            return STATUS_INVARIANT, out_times[seg + 1], Y, seg + 2, seg + 1, 0, nrhs
    return STATUS_OK, out_times[n_out - 1], Y, n_out, n_out - 1, 0, nrhs
