"""Compiled DOP853 march for the modified Prufer system.

State vector (``NSTATE = 5``)::

    0  phi        phase
    1  log r      log amplitude
    2  phi_z      d phi / dz (variational equation)
    3  mass       int r^2 sqrt(rho) sin^2 phi           (= z^2 int rho y^2)
    4  g          int r^2 (b/4) (2 phi cos 2phi - sin 2phi) plus jump terms

with ``a = sqrt(rho)`` and ``b = rho'/rho`` tabulated as Chebyshev series on
each segment. Segment boundaries carry the factor ``k = (rho+/rho-)^(1/4)``
used to remap the state across jumps of ``rho``.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop

NSTATE = 5
OK, UNDERFLOW, MAXSTEPS = 0, 1, 2

_A = np.ascontiguousarray(_dop.A[:12, :12])
_B = np.ascontiguousarray(_dop.B)
_C = np.ascontiguousarray(_dop.C[:12])
_E3 = np.ascontiguousarray(_dop.E3)
_E5 = np.ascontiguousarray(_dop.E5)
_TWO_PI = 2.0 * math.pi


@nb.njit(cache=True)
def _clenshaw(c, n, t):
    if n == 0:
        return 0.0
    b1 = 0.0
    b2 = 0.0
    for k in range(n - 1, 0, -1):
        tmp = 2.0 * t * b1 - b2 + c[k]
        b2 = b1
        b1 = tmp
    return t * b1 - b2 + c[0]


@nb.njit(cache=True)
def _rhs(x, y, z, lo, hi, ca, na, cb, nb_, ncomp, out):
    t = (2.0 * x - lo - hi) / (hi - lo)
    a = _clenshaw(ca, na, t)
    b = _clenshaw(cb, nb_, t)
    phi = y[0]
    s2 = math.sin(2.0 * phi)
    c2 = math.cos(2.0 * phi)
    out[0] = z * a + 0.25 * b * s2
    out[1] = -0.25 * b * c2
    out[2] = a + 0.5 * b * c2 * y[2]
    if ncomp > 3:
        r2 = math.exp(2.0 * y[1])
        sp = math.sin(phi)
        out[3] = r2 * a * sp * sp
        out[4] = 0.25 * r2 * b * (2.0 * phi * c2 - s2)


@nb.njit(cache=True)
def _jump(y, k, ncomp):
    """Continuity of y and y' across a jump of rho, written in Prufer form."""
    phi = y[0]
    s = math.sin(phi)
    c = math.cos(phi)
    d = math.atan2(k * s, c / k) - math.atan2(s, c)
    if d > math.pi:
        d -= _TWO_PI
    elif d <= -math.pi:
        d += _TWO_PI
    phi_new = phi + d
    fac = k * k * s * s + c * c / (k * k)
    r2_old = math.exp(2.0 * y[1])
    y[1] += 0.5 * math.log(fac)
    y[2] *= 1.0 / fac  # k^2 / (cos^2 + k^4 sin^2)
    if ncomp > 3:
        y[4] += r2_old * phi - r2_old * fac * phi_new
    y[0] = phi_new


@nb.njit(cache=True)
def march(z, bounds, kq, ca, na, cb, nbn, x0, y0, seg0, out_x, rtol, atol, h0, max_steps, ncomp):
    """Integrate from ``x0`` (state ``y0``, segment ``seg0``) through sorted ``out_x``.

    Returns ``(status, x_reached, n_steps, out_y)``. States recorded at a
    segment boundary are right limits (after the jump remap).
    """
    nseg = bounds.shape[0] - 1
    nout = out_x.shape[0]
    out_y = np.zeros((nout, NSTATE))
    y = y0.copy()
    x = x0
    seg = seg0
    K = np.zeros((13, NSTATE))
    ys = np.zeros(NSTATE)
    ynew = np.zeros(NSTATE)
    f = np.zeros(NSTATE)
    fnew = np.zeros(NSTATE)
    h = h0
    nsteps = 0
    io = 0
    while io < nout and out_x[io] <= x:
        out_y[io, :] = y
        io += 1
    expo = -1.0 / 8.0
    while io < nout:
        lo = bounds[seg]
        hi = bounds[seg + 1]
        target = out_x[io] if out_x[io] < hi else hi
        cas = ca[seg]
        cbs = cb[seg]
        nas = na[seg]
        nbs = nbn[seg]
        if target > x:
            _rhs(x, y, z, lo, hi, cas, nas, cbs, nbs, ncomp, f)
        while x < target:
            min_step = 10.0 * (np.nextafter(x, np.inf) - x)
            hprop = h
            clipped = False
            if x + h >= target or target - (x + h) < min_step:
                h = target - x
                clipped = True
            rejected = False
            while True:
                if h < min_step and not clipped:
                    return UNDERFLOW, x, nsteps, out_y
                for i in range(NSTATE):
                    K[0, i] = f[i]
                for s in range(1, 12):
                    for i in range(ncomp):
                        acc = 0.0
                        for j in range(s):
                            acc += _A[s, j] * K[j, i]
                        ys[i] = y[i] + h * acc
                    _rhs(x + _C[s] * h, ys, z, lo, hi, cas, nas, cbs, nbs, ncomp, K[s])
                for i in range(ncomp):
                    acc = 0.0
                    for j in range(12):
                        acc += _B[j] * K[j, i]
                    ynew[i] = y[i] + h * acc
                xn = target if clipped else x + h
                _rhs(xn, ynew, z, lo, hi, cas, nas, cbs, nbs, ncomp, fnew)
                for i in range(NSTATE):
                    K[12, i] = fnew[i]
                e5 = 0.0
                e3 = 0.0
                for i in range(ncomp):
                    sc = atol + max(abs(y[i]), abs(ynew[i])) * rtol
                    a5 = 0.0
                    a3 = 0.0
                    for j in range(13):
                        a5 += _E5[j] * K[j, i]
                        a3 += _E3[j] * K[j, i]
                    e5 += (a5 / sc) ** 2
                    e3 += (a3 / sc) ** 2
                if e5 == 0.0 and e3 == 0.0:
                    err = 0.0
                else:
                    err = h * e5 / math.sqrt((e5 + 0.01 * e3) * ncomp)
                nsteps += 1
                if nsteps > max_steps:
                    return MAXSTEPS, x, nsteps, out_y
                if err < 1.0:
                    if err == 0.0:
                        fac = 10.0
                    else:
                        fac = min(10.0, 0.9 * err ** expo)
                    if rejected:
                        fac = min(1.0, fac)
                    x = xn
                    for i in range(ncomp):
                        y[i] = ynew[i]
                        f[i] = fnew[i]
                    if clipped:
                        h = max(hprop, h * fac)
                    else:
                        h = h * fac
                    break
                else:
                    h = h * max(0.2, 0.9 * err ** expo)
                    rejected = True
                    clipped = False
                    if x + h >= target:
                        h = target - x
                        clipped = True
        if x >= hi and seg + 1 < nseg:
            _jump(y, kq[seg + 1], ncomp)
            seg += 1
        while io < nout and out_x[io] <= x:
            out_y[io, :] = y
            io += 1
    return OK, x, nsteps, out_y
