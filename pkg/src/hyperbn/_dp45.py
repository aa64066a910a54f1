"""Dormand-Prince 5(4) kernel for the radial shooting problem.

One embedded explicit pair with FSAL, per-component mixed error control,
quartic dense output and in-step event handling, compiled with numba so
amplitude scans and eigenvalue bisections stay cheap.  The 8-component
state is

    y = (u, u', G, I_u2, I_du2, I_up1, I_L, I_H)

where G accumulates the volume weight int sinh^(n-1) and the I_* entries
accumulate the weighted integrals appearing in the integral identities:
I_u2 = int u^2 G', I_du2 = int u'^2 G', I_up1 = int |u|^(p+1) G',
I_L = int u'^2 L, I_H = int u'^2 G^2/G'.

Events: sign changes of u are located on the dense output by bisection
(and optionally terminate the run after a requested count), divergence
terminates when |u| crosses ``u_div``, and a step-size collapse below
``H_MIN`` is reported as a distinct status instead of raising.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# status codes returned by the kernel
REACHED_END = 0
HIT_ZERO = 1
DIVERGED = 2
STEP_UNDERFLOW = 3
STEP_BUDGET = 4

H_MIN = 1e-14
_MAX_STEPS = 5_000_000
_MAX_ZEROS = 128

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, 0] = 1 / 5
_A[2, :2] = (3 / 40, 9 / 40)
_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
# embedded 4th-order error weights (b5 - b4)
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# quartic dense-output coefficients: y(t0 + th) = y0 + h * (K^T P) @ (t, t^2, t^3, t^4)
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

NSTATE = 8


@njit(cache=True)
def rhs_core(x, y, out, n, lam, p, linear, x_switch, lcoef):
    """Derivative of the 8-component shooting state at x > 0."""
    u = y[0]
    v = y[1]
    G = y[2]
    sh = math.sinh(x)
    ch = math.cosh(x)
    w = sh ** (n - 1.0)
    if linear:
        F = lam * u
    else:
        F = lam * u + abs(u) ** (p - 1.0) * u
    if x < x_switch:
        # series branch of L = m/sinh; the direct form cancels near 0
        t = x * x
        s = 0.0
        for i in range(len(lcoef) - 1, -1, -1):
            s = s * t + lcoef[i]
        L = x ** (n + 1.0) * s
    else:
        L = (G * ch - sh**n / n) / sh
    v2 = v * v
    out[0] = v
    out[1] = -(n - 1.0) * (ch / sh) * v - F
    out[2] = w
    out[3] = u * u * w
    out[4] = v2 * w
    out[5] = abs(u) ** (p + 1.0) * w
    out[6] = v2 * L
    out[7] = v2 * (G * G / w)


@njit(cache=True)
def _dense_u(y0u, h, q, theta):
    """u at fractional position theta of a step from the quartic interpolant."""
    acc = q[3]
    acc = acc * theta + q[2]
    acc = acc * theta + q[1]
    acc = acc * theta + q[0]
    return y0u + h * theta * acc


@njit(cache=True)
def dp45_integrate(
    x0,
    y0,
    x_max,
    h0,
    rtol,
    atol,
    n,
    lam,
    p,
    linear,
    x_switch,
    lcoef,
    u_div,
    stop_zeros,
    record,
):
    """Integrate from (x0, y0) to x_max with events; see module docstring.

    Returns (status, x_fin, y_fin, xs, ys, qs, hs, zeros_x, zeros_y,
    n_zeros) where xs/ys hold the accepted-step grid (including start and
    final point), qs/hs the per-segment dense coefficients and original
    step sizes (empty when record=False), and zeros_* every located sign
    change of u up to the stop count.
    """
    y = y0.copy()
    k = np.empty((7, NSTATE))
    ytmp = np.empty(NSTATE)
    ynew = np.empty(NSTATE)
    yev = np.empty(NSTATE)
    q = np.empty((NSTATE, 4))

    cap = 512 if record else 1
    xs = np.empty(cap)
    ys = np.empty((cap, NSTATE))
    qs = np.empty((cap, NSTATE, 4))
    # dense segment i spans the *original* step from xs[i], which exceeds
    # xs[i+1] - xs[i] when the segment was truncated by an event
    hs = np.empty(cap)
    nrec = 0
    if record:
        xs[0] = x0
        ys[0] = y
        nrec = 1

    zeros_x = np.empty(_MAX_ZEROS)
    zeros_y = np.empty((_MAX_ZEROS, NSTATE))
    n_zeros = 0

    x = x0
    h = min(h0, x_max - x0)
    rhs_core(x, y, k[0], n, lam, p, linear, x_switch, lcoef)
    status = REACHED_END
    rejected = False

    for _ in range(_MAX_STEPS):
        if x >= x_max:
            break
        if h < H_MIN:
            status = STEP_UNDERFLOW
            break
        last = x + h >= x_max
        if last:
            h = x_max - x

        for i in range(1, 7):
            for j in range(NSTATE):
                s = 0.0
                for m in range(i):
                    s += _A[i, m] * k[m, j]
                ytmp[j] = y[j] + h * s
            rhs_core(x + _C[i] * h, ytmp, k[i], n, lam, p, linear, x_switch, lcoef)
        for j in range(NSTATE):
            ynew[j] = ytmp[j]

        errn = 0.0
        for j in range(NSTATE):
            e = 0.0
            for m in range(7):
                e += _E[m] * k[m, j]
            e *= h
            sc = atol[j] + rtol * max(abs(y[j]), abs(ynew[j]))
            qj = abs(e) / sc
            if qj > errn:
                errn = qj
            if not math.isfinite(ynew[j]):
                errn = 1e300

        if errn <= 1.0:
            # accepted: dense coefficients, then events
            x_new = x + h
            for j in range(NSTATE):
                for c in range(4):
                    s = 0.0
                    for m in range(7):
                        s += k[m, j] * _P[m, c]
                    q[j, c] = s

            hit = False
            if (y[0] > 0.0 and ynew[0] <= 0.0) or (y[0] < 0.0 and ynew[0] >= 0.0):
                # bracketed bisection on the dense quartic for the crossing
                lo, hi = 0.0, 1.0
                ulo = y[0]
                for _b in range(80):
                    mid = 0.5 * (lo + hi)
                    um = _dense_u(y[0], h, q[0], mid)
                    if (ulo > 0.0 and um <= 0.0) or (ulo < 0.0 and um >= 0.0):
                        hi = mid
                    else:
                        lo = mid
                        ulo = um
                theta = 0.5 * (lo + hi)
                xz = x + theta * h
                for j in range(NSTATE):
                    acc = q[j, 3]
                    acc = acc * theta + q[j, 2]
                    acc = acc * theta + q[j, 1]
                    acc = acc * theta + q[j, 0]
                    yev[j] = y[j] + h * theta * acc
                if n_zeros < _MAX_ZEROS:
                    zeros_x[n_zeros] = xz
                    for j in range(NSTATE):
                        zeros_y[n_zeros, j] = yev[j]
                n_zeros += 1
                if n_zeros >= stop_zeros:
                    # truncate the trajectory at the event
                    x = xz
                    for j in range(NSTATE):
                        y[j] = yev[j]
                    status = HIT_ZERO
                    hit = True

            if record:
                if nrec >= cap:
                    new_cap = cap * 2
                    xs2 = np.empty(new_cap)
                    ys2 = np.empty((new_cap, NSTATE))
                    qs2 = np.empty((new_cap, NSTATE, 4))
                    hs2 = np.empty(new_cap)
                    xs2[:nrec] = xs[:nrec]
                    ys2[:nrec] = ys[:nrec]
                    qs2[:nrec] = qs[:nrec]
                    hs2[:nrec] = hs[:nrec]
                    xs, ys, qs, hs, cap = xs2, ys2, qs2, hs2, new_cap
                if hit:
                    xs[nrec] = x
                    ys[nrec] = y
                else:
                    xs[nrec] = x_new
                    ys[nrec] = ynew
                qs[nrec - 1] = q
                hs[nrec - 1] = h
                nrec += 1

            if hit:
                break

            x = x_new
            for j in range(NSTATE):
                y[j] = ynew[j]
                k[0, j] = k[6, j]

            if abs(y[0]) >= u_div:
                status = DIVERGED
                break

            if last and x >= x_max:
                break
            fac = 5.0 if errn == 0.0 else min(5.0, max(0.2, 0.9 * errn**-0.2))
            if rejected:
                fac = min(1.0, fac)
            h *= fac
            rejected = False
        else:
            h *= max(0.2, 0.9 * errn**-0.2)
            rejected = True
    else:
        status = STEP_BUDGET

    nseg = max(nrec - 1, 0)
    return (
        status,
        x,
        y,
        xs[:nrec],
        ys[:nrec],
        qs[:nseg],
        hs[:nseg],
        zeros_x[: min(n_zeros, _MAX_ZEROS)],
        zeros_y[: min(n_zeros, _MAX_ZEROS)],
        n_zeros,
    )
