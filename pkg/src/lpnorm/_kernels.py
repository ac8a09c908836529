"""Inner loops of the trajectory integrator.

Every function here is written in the numba-compatible subset of Python and
exported twice: ``*_py`` is the interpreted reference, the bare name is the
compiled version when numba is enabled (see :mod:`lpnorm._backend`).
"""

import math
import types

import numpy as np

from lpnorm._backend import jit

#: closest approach to either primary before a state counts as a collision
R_SINGULAR = 1e-9

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_STEP_UNDERFLOW = 2
STATUS_SINGULAR = 3

# Dormand-Prince 5(4) tableau
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


def accel_py(x, y, vx, vy, mu, q1, A2, W1, n):
    """Acceleration in the rotating frame including P-R drag.

    Returns ``(ax, ay, rmin)``; ``rmin`` is the smaller primary distance so
    callers can detect collisions without exceptions inside compiled code.
    """
    xs = x + mu
    xp = x + mu - 1.0
    r1sq = xs * xs + y * y
    r2sq = xp * xp + y * y
    r1 = math.sqrt(r1sq)
    r2 = math.sqrt(r2sq)
    rmin = min(r1, r2)
    if rmin < R_SINGULAR:
        return 0.0, 0.0, rmin
    r1c = r1sq * r1
    r2c = r2sq * r2
    r2q = r2c * r2sq
    g1 = (1.0 - mu) * q1 / r1c
    g2 = mu / r2c + 1.5 * mu * A2 / r2q
    ux = n * n * x - g1 * xs - g2 * xp
    uy = n * n * y - g1 * y - g2 * y
    radial = (xs * vx + y * vy) / r1sq
    N1 = xs * radial + vx - n * y
    N2 = y * radial + vy + n * xs
    ax = 2.0 * n * vy + ux - W1 * N1 / r1sq
    ay = -2.0 * n * vx + uy - W1 * N2 / r1sq
    return ax, ay, rmin


accel = jit(accel_py)


def _dopri5_source(y0, t_out, mu, q1, A2, W1, n, rtol, atol, h0, h_min, max_steps):
    """Integrate from ``t_out[0]`` and record the state exactly at every ``t_out``.

    ``t_out`` must be strictly monotone; a decreasing grid integrates
    backwards in time.  Steps are clipped so that each output time is hit by
    a step endpoint, which keeps samples free of interpolation error.
    Returns ``(states, filled, status, nsteps, nreject)``.
    """
    m = t_out.shape[0]
    out = np.zeros((m, 4))
    y = np.empty(4)
    for i in range(4):
        y[i] = y0[i]
        out[0, i] = y0[i]
    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    k5 = np.empty(4)
    k6 = np.empty(4)
    k7 = np.empty(4)
    ytmp = np.empty(4)
    ynew = np.empty(4)

    ax, ay, rmin = _accel_impl(y[0], y[1], y[2], y[3], mu, q1, A2, W1, n)
    if rmin < R_SINGULAR:
        return out, 1, STATUS_SINGULAR, 0, 0
    k1[0] = y[2]
    k1[1] = y[3]
    k1[2] = ax
    k1[3] = ay

    t = t_out[0]
    sign = 1.0
    if m > 1 and t_out[m - 1] < t_out[0]:
        sign = -1.0
    h = h0
    idx = 1
    nsteps = 0
    nreject = 0
    while idx < m:
        if nsteps + nreject >= max_steps:
            return out, idx, STATUS_MAX_STEPS, nsteps, nreject
        remaining = sign * (t_out[idx] - t)
        clipped = h >= remaining
        h_try = remaining if clipped else h
        hs = sign * h_try

        for i in range(4):
            ytmp[i] = y[i] + hs * A21 * k1[i]
        ax, ay, r = _accel_impl(ytmp[0], ytmp[1], ytmp[2], ytmp[3], mu, q1, A2, W1, n)
        rmin = r
        k2[0] = ytmp[2]
        k2[1] = ytmp[3]
        k2[2] = ax
        k2[3] = ay
        for i in range(4):
            ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i])
        ax, ay, r = _accel_impl(ytmp[0], ytmp[1], ytmp[2], ytmp[3], mu, q1, A2, W1, n)
        rmin = min(rmin, r)
        k3[0] = ytmp[2]
        k3[1] = ytmp[3]
        k3[2] = ax
        k3[3] = ay
        for i in range(4):
            ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        ax, ay, r = _accel_impl(ytmp[0], ytmp[1], ytmp[2], ytmp[3], mu, q1, A2, W1, n)
        rmin = min(rmin, r)
        k4[0] = ytmp[2]
        k4[1] = ytmp[3]
        k4[2] = ax
        k4[3] = ay
        for i in range(4):
            ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        ax, ay, r = _accel_impl(ytmp[0], ytmp[1], ytmp[2], ytmp[3], mu, q1, A2, W1, n)
        rmin = min(rmin, r)
        k5[0] = ytmp[2]
        k5[1] = ytmp[3]
        k5[2] = ax
        k5[3] = ay
        for i in range(4):
            ytmp[i] = y[i] + hs * (
                A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]
            )
        ax, ay, r = _accel_impl(ytmp[0], ytmp[1], ytmp[2], ytmp[3], mu, q1, A2, W1, n)
        rmin = min(rmin, r)
        k6[0] = ytmp[2]
        k6[1] = ytmp[3]
        k6[2] = ax
        k6[3] = ay
        for i in range(4):
            ynew[i] = y[i] + hs * (
                B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]
            )
        ax, ay, r = _accel_impl(ynew[0], ynew[1], ynew[2], ynew[3], mu, q1, A2, W1, n)
        rmin = min(rmin, r)
        if rmin < R_SINGULAR:
            return out, idx, STATUS_SINGULAR, nsteps, nreject
        k7[0] = ynew[2]
        k7[1] = ynew[3]
        k7[2] = ax
        k7[3] = ay

        acc = 0.0
        for i in range(4):
            e = h_try * (
                E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]
            )
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            acc += (e / sc) ** 2
        err = math.sqrt(acc / 4.0)

        if err <= 1.0:
            nsteps += 1
            for i in range(4):
                y[i] = ynew[i]
                k1[i] = k7[i]
            if clipped:
                t = t_out[idx]
                for i in range(4):
                    out[idx, i] = y[i]
                idx += 1
            else:
                t = t + hs
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h_new = h_try * fac
            h = max(h, h_new) if clipped else h_new
        else:
            nreject += 1
            h = h_try * max(0.2, 0.9 * err ** -0.2)
            if h < h_min:
                return out, idx, STATUS_STEP_UNDERFLOW, nsteps, nreject
    return out, idx, STATUS_OK, nsteps, nreject


# the interpreted twin runs the same code object against the interpreted force
dopri5_py = types.FunctionType(
    _dopri5_source.__code__, dict(globals(), _accel_impl=accel_py), "dopri5_py"
)
_accel_impl = accel
dopri5 = jit(_dopri5_source)
