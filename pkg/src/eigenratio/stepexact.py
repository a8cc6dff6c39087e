"""Exact Dirichlet spectra of strings with piecewise-constant density.

On a piece of constant density ``rho_i`` and length ``l_i`` the solution of
``-y'' = lambda rho_i y`` is propagated by the transfer matrix

    [[cos(w l),      sin(w l)/w],
     [-w sin(w l),   cos(w l)  ]],      w = sqrt(lambda rho_i),

so ``y(1; lambda)`` for ``y(0) = 0, y'(0) = 1`` is a product of 2x2 matrices.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .coefficients import DomainError, Step
from .core import SolverError

__all__ = ["transfer_matrix", "propagate", "characteristic", "zero_count", "exact_eigenvalues"]


def _sinc_len(w, length):
    """sin(w l) / w computed without cancellation for small w l."""
    return length * np.sinc(w * length / math.pi)


def transfer_matrix(rho_i: float, length: float, lam: float) -> np.ndarray:
    w = math.sqrt(lam * rho_i)
    c = math.cos(w * length)
    return np.array([[c, _sinc_len(w, length)], [-w * math.sin(w * length), c]])


def _check(step, lam):
    if not isinstance(step, Step):
        raise DomainError("step-exact solver needs a Step density")
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")


def propagate(step: Step, lam: float) -> np.ndarray:
    """(y, y') at x = 1 for y(0) = 0, y'(0) = 1."""
    _check(step, lam)
    v = np.array([0.0, 1.0])
    for r, l in zip(step.values, step.lengths):
        v = transfer_matrix(r, l, lam) @ v
    return v


def characteristic(step: Step, lam: float) -> float:
    """``y(1; lambda)``; vanishes exactly at Dirichlet eigenvalues."""
    return float(propagate(step, lam)[0])


def zero_count(step: Step, lam: float) -> int:
    """Number of zeros of ``y(.; lambda)`` in the open interval (0, 1).

    Tracks the angle of ``(w y, y')`` piece by piece: inside a piece it
    advances by exactly ``w l``; at an interface the vector ``(y, y')`` is
    continuous, so the angle is re-read with the new ``w`` in the same quadrant.
    """
    _check(step, lam)
    y, dy = 0.0, 1.0
    angle = 0.0
    prev_w = None
    for r, l in zip(step.values, step.lengths):
        w = math.sqrt(lam * r)
        if prev_w is not None:
            a_old = math.atan2(prev_w * y, dy)
            a_new = math.atan2(w * y, dy)
            angle += a_new - a_old
        angle += w * l
        c, s = math.cos(w * l), math.sin(w * l)
        y, dy = c * y + _sinc_len(w, l) * dy, -w * s * y + c * dy
        prev_w = w
    k = math.ceil(angle / math.pi - 1e-12) - 1
    return max(k, 0)


def exact_eigenvalues(step: Step, n_max: int, rel_tol: float = 1e-13,
                      max_expand: int = 80) -> np.ndarray:
    """First ``n_max`` Dirichlet eigenvalues, isolated by zero counting then Brent."""
    if not isinstance(step, Step):
        raise DomainError("step-exact solver needs a Step density")
    rmin, rmax = min(step.values), max(step.values)
    out = []
    lo = 0.25 * math.pi**2 / rmax
    for n in range(1, n_max + 1):
        hi = (n * math.pi) ** 2 / rmin * (1 + 1e-6)
        expand = 0
        while zero_count(step, hi) < n:
            hi *= 2
            expand += 1
            if expand > max_expand:
                raise SolverError(f"root cap exceeded isolating lambda_{n}")
        while zero_count(step, lo) > n - 1:
            lo *= 0.5
        # bisection on the count until only lambda_n is left in [lo, hi]
        for _ in range(200):
            if zero_count(step, lo) == n - 1 and zero_count(step, hi) == n:
                flo, fhi = characteristic(step, lo), characteristic(step, hi)
                if flo == 0.0:
                    hi = lo
                    break
                if flo * fhi < 0:
                    break
            mid = 0.5 * (lo + hi)
            if zero_count(step, mid) >= n:
                hi = mid
            else:
                lo = mid
        else:
            raise SolverError(f"failed to isolate lambda_{n}")
        if hi == lo:
            lam = lo
        else:
            lam = brentq(lambda t: characteristic(step, t), lo, hi,
                         xtol=1e-300, rtol=max(rel_tol, 4 * np.finfo(float).eps), maxiter=500)
        out.append(lam)
        lo = lam * (1 + 1e-12)
    return np.array(out)
