"""Shape classification: constant / monotone / single-well / single-barrier."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .coefficients import Coefficient

__all__ = ["Classification", "classify"]

KINDS = ("constant", "decreasing", "increasing", "single-well", "single-barrier", "other")


@dataclass(frozen=True)
class Classification:
    kind: str
    x0: Optional[float] = None
    a0: Optional[float] = None  # unique sign change, if any (potentials)

    @property
    def is_single_well(self) -> bool:
        """Monotone and constant functions are degenerate single wells."""
        return self.kind in ("constant", "decreasing", "increasing", "single-well")

    @property
    def is_single_barrier(self) -> bool:
        return self.kind in ("constant", "decreasing", "increasing", "single-barrier")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "x0": self.x0, "a0": self.a0}


def _nonincreasing(d, tol):
    return bool(np.all(d <= tol))


def _nondecreasing(d, tol):
    return bool(np.all(d >= -tol))


def _refine_extremum(f: Coefficient, xs, vs, k, sign):
    """Polish a sampled interior extremum; flat extrema keep the sample.

    A sign change of ``f'`` is located with Brent's root finder (full
    precision); otherwise a bounded minimisation of ``sign * f`` is used.
    """
    if k == 0 or k == len(xs) - 1:
        return float(xs[k])
    if not (vs[k - 1] != vs[k] and vs[k + 1] != vs[k]):
        return float(xs[k])
    lo, hi = float(xs[k - 1]), float(xs[k + 1])
    if lo >= hi:
        return float(xs[k])
    if not f.is_piecewise_constant:
        dlo, dhi = sign * float(f.derivative(lo)), sign * float(f.derivative(hi))
        if dlo < 0 < dhi:
            return float(brentq(lambda t: float(f.derivative(t)), lo, hi, xtol=1e-15))
    res = minimize_scalar(lambda t: sign * float(f(t)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    if sign * float(f(res.x)) <= sign * vs[k]:
        return float(res.x)
    return float(xs[k])


def _sign_change(f: Coefficient, xs, vs) -> Optional[float]:
    s = np.sign(vs)
    nz = s != 0
    if not np.any(nz):
        return None
    idx = np.nonzero(nz)[0]
    flips = np.nonzero(s[idx][1:] != s[idx][:-1])[0]
    if len(flips) != 1:
        return None
    i, j = idx[flips[0]], idx[flips[0] + 1]
    a, b = xs[i], xs[j]
    if j > i + 1:  # exact zeros between the two sign-definite samples
        return float(0.5 * (xs[i + 1] + xs[j - 1]))
    if a == b:  # jump through zero at a breakpoint
        return float(a)
    fa, fb = vs[i], vs[j]
    try:
        return float(brentq(lambda t: float(f(t)), a, b, xtol=1e-14))
    except ValueError:
        return float(a - fa * (b - a) / (fb - fa))


def classify(f: Coefficient, tolerance: float = 1e-12, resolution: int = 1024) -> Classification:
    """Return the tightest shape class of ``f`` from sampled differences.

    Samples a uniform grid of ``resolution + 1`` points plus both one-sided
    limits at every breakpoint. ``x0`` is the leftmost sampled minimiser for
    wells and monotone functions, the leftmost maximiser for barriers.
    """
    xs, vs = f.sample_points(resolution)
    d = np.diff(vs)
    a0 = _sign_change(f, xs, vs) if not f.positive else None
    if np.sum(np.abs(d)) <= tolerance:
        return Classification("constant", None, a0)
    kmin = int(np.argmin(vs))
    kmax = int(np.argmax(vs))
    down, up = _nonincreasing(d, tolerance), _nondecreasing(d, tolerance)
    if down and up:  # every step within tolerance: the net change decides
        down, up = vs[-1] < vs[0], vs[-1] >= vs[0]
    if down:
        return Classification("decreasing", float(xs[kmin]), a0)
    if up:
        return Classification("increasing", float(xs[kmin]), a0)
    if _nonincreasing(d[:kmin], tolerance) and _nondecreasing(d[kmin:], tolerance):
        return Classification("single-well", _refine_extremum(f, xs, vs, kmin, 1.0), a0)
    if _nondecreasing(d[:kmax], tolerance) and _nonincreasing(d[kmax:], tolerance):
        return Classification("single-barrier", _refine_extremum(f, xs, vs, kmax, -1.0), a0)
    return Classification("other", None, a0)
