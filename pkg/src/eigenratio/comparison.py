"""Crossing points, the step companion, eigenvalue sensitivities and homotopy sweeps.

Notation: ``u_n`` is the n-th Dirichlet eigenfunction of ``-u'' = lambda rho u``,
normalised by ``int rho u^2 = 1`` and positive near ``x = 0``. For a pair
``(n, n-1)`` the crossing points are the solutions of ``u_n^2 = u_{n-1}^2``
in (0, 1). Consecutive crossings partition [0, 1] into gaps on which
``u_n^2 - u_{n-1}^2`` has alternating sign; a positive gap followed by a
negative gap forms one *group*, and the step companion takes the value of
``rho`` at the crossing between them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import prufer
from .coefficients import Coefficient, Step, blend
from .core import EigenSolution, StructureError
from .quadrature import gauss_nodes

__all__ = [
    "CrossingSet",
    "crossing_points",
    "build_step_companion",
    "keller_sensitivity",
    "Homotopy",
    "ratio_derivative",
    "interval_integrals",
    "HomotopyCurve",
    "homotopy_sweep",
    "chained_comparison",
]

_GRID_POINTS = 4097


@dataclass
class CrossingSet:
    n: int
    y: np.ndarray            # zeros of u_n
    z: np.ndarray            # zeros of u_{n-1}
    x: np.ndarray            # crossings u_n^2 = u_{n-1}^2
    first_sign: int          # sign of u_n^2 - u_{n-1}^2 next to x = 0
    grid: np.ndarray
    wronskian: np.ndarray    # u_n' u_{n-1} - u_{n-1}' u_n on grid
    u_n: EigenSolution = field(repr=False, default=None)
    u_m: EigenSolution = field(repr=False, default=None)

    @property
    def partition(self) -> np.ndarray:
        return np.concatenate([[0.0], self.x, [1.0]])

    @property
    def gap_signs(self) -> np.ndarray:
        k = np.arange(self.x.size + 1)
        return self.first_sign * (-1) ** k

    def groups(self) -> list[tuple[float, float, float]]:
        """``(left, pivot, right)`` triples; the companion equals ``rho(pivot)`` on each."""
        P = self.partition
        s = self.gap_signs
        out = []
        j = 0
        while j < s.size:
            if s[j] > 0 and j + 1 < s.size:
                out.append((P[j], P[j + 1], P[j + 2]))
                j += 2
            elif s[j] > 0:
                out.append((P[j], P[j + 1], P[j + 1]))
                j += 1
            else:
                out.append((P[j], P[j], P[j + 1]))
                j += 1
        return out

    def check(self, ratio_tol: float = 0.0) -> dict:
        """Structural properties; returns a dict of booleans (all True when healthy)."""
        y, z = self.y, self.z
        merged = np.empty(y.size + z.size)
        merged[0::2] = y
        merged[1::2] = z
        interlace = bool(y.size == self.n - 1 and z.size == self.n - 2
                         and np.all(np.diff(merged) > 0))
        gaps = np.concatenate([[0.0], merged, [1.0]])
        counts = np.array([np.sum((self.x > a) & (self.x < b)) for a, b in zip(gaps[:-1], gaps[1:])])
        # crossings in every (y_i, z_i) and (z_i, y_{i+1})
        members = bool(np.all(counts[1:-1] == 1)) if counts.size > 2 else True
        inner = (self.grid > 0) & (self.grid < 1)
        w_neg = bool(np.all(self.wronskian[inner] < 0))
        # u_n / u_{n-1} decreasing between consecutive zeros of u_{n-1}
        un, um, g = self.u_n.u, self.u_m.u, self.grid
        edges = np.concatenate([[0.0], z, [1.0]])
        dec = True
        for a, b in zip(edges[:-1], edges[1:]):
            sel = (g > a) & (g < b) & (np.abs(um) > 1e-6 * np.abs(um).max())
            if sel.sum() > 1:
                ratio = un[sel] / um[sel]
                dec &= bool(np.all(np.diff(ratio) < ratio_tol))
        return {"interlacing": interlace, "crossing_membership": members,
                "wronskian_negative": w_neg, "ratio_decreasing": dec,
                "zero_count": bool(y.size == self.n - 1)}


def crossing_points(rho: Coefficient, n: int, grid_points: int = _GRID_POINTS) -> CrossingSet:
    """All solutions of ``u_n^2 = u_{n-1}^2`` in (0, 1) with the zero lists."""
    if n < 2:
        raise ValueError("crossing points need n >= 2")
    grid = np.unique(np.concatenate([np.linspace(0, 1, grid_points), rho.breakpoints]))
    un = prufer.eigenfunction(rho, n, grid)
    um = prufer.eigenfunction(rho, n - 1, grid)
    d = un.u**2 - um.u**2
    w = un.du * um.u - um.du * un.u
    inner = np.arange(1, grid.size - 1)
    nz = inner[d[inner] != 0]
    first_sign = int(np.sign(d[nz[0]]))
    roots = list(grid[inner[d[inner] == 0]])
    sgn = np.sign(d[nz])
    flips = np.nonzero(sgn[1:] != sgn[:-1])[0]
    for f in flips:
        i, j = nz[f], nz[f + 1]
        if j > i + 1:  # exact zero samples in between were already recorded
            continue
        a, b = grid[i], grid[j]
        sa_n, sa_m = un.trail.states[i], um.trail.states[i]

        def diff(x, a=a, sa_n=sa_n, sa_m=sa_m):
            if x == a:
                return d[i]
            vn = _value_from(un, a, sa_n, x)
            vm = _value_from(um, a, sa_m, x)
            return vn * vn - vm * vm

        roots.append(brentq(diff, a, b, xtol=1e-15, rtol=1e-15))
    cs = CrossingSet(n, un.zeros, um.zeros, np.array(sorted(roots)), first_sign, grid, w, un, um)
    chk = cs.check()
    if not chk["crossing_membership"]:
        raise StructureError(f"missing crossing between interlaced zeros (n={n}): {chk}")
    return cs


def _value_from(sol: EigenSolution, a, state, x):
    tr = sol.trail
    s = prufer._march(tr.rho, tr.z, a, state, np.array([x]), tr.rtol, tr.atol, 3)[0]
    return sol.scale * math.exp(s[1]) / tr.z * float(tr.rho(x)) ** -0.25 * math.sin(s[0])


def build_step_companion(rho: Coefficient, crossings: CrossingSet) -> Step:
    """Step function equal to ``rho(pivot)`` on each crossing group."""
    groups = crossings.groups()
    if not groups:
        raise ValueError("empty crossing set")
    breaks = tuple(g[2] for g in groups[:-1])
    values = tuple(float(rho(g[1])) for g in groups)
    return Step(breaks, values)


# ---------------------------------------------------------------------------
# Sensitivities
# ---------------------------------------------------------------------------


def _integral_against(rho: Coefficient, sols: Sequence[EigenSolution], weight, breakpoints=()):
    """``[int weight * u_k^2 for u_k in sols]`` by composite Gauss-Legendre."""
    bps = set(rho.breakpoints) | set(breakpoints)
    nmax = max(s.n for s in sols)
    width = min(1.0 / 64, 1.0 / (8 * nmax * math.sqrt(rho.extrema[1])))
    x, wq = gauss_nodes(sorted(bps), width=width)
    wx = weight(x)
    return [float(np.dot(wq, wx * s.evaluate(x) ** 2)) for s in sols]


def keller_sensitivity(rho: Coefficient, n: int, delta: Coefficient,
                       sol: Optional[EigenSolution] = None) -> float:
    """``d lambda_n / d eps`` of ``rho + eps delta`` at ``eps = 0``: ``-lambda_n int delta u_n^2``."""
    sol = sol or prufer.eigenfunction(rho, n, grid=[0.5])
    (val,) = _integral_against(rho, [sol], delta._eval, delta.breakpoints)
    return -sol.lam * val


@dataclass(frozen=True)
class Homotopy:
    """``rho_hat(tau) = tau rho + (1 - tau) L``; ``d rho_hat / d tau = rho - L``."""

    rho: Coefficient
    L: Coefficient

    def at(self, tau: float) -> Coefficient:
        if tau == 1.0:
            return self.rho
        if tau == 0.0:
            return self.L
        return blend(self.rho, self.L, tau)

    def dtau(self, x):
        return self.rho._eval(x) - self.L._eval(x)

    @property
    def breakpoints(self):
        return tuple(sorted(set(self.rho.breakpoints) | set(self.L.breakpoints)))


@dataclass
class _TauSample:
    """Both eigenpairs of ``rho_hat(tau)`` on one Gauss-Legendre node set."""

    lam_n: float
    lam_m: float
    x: np.ndarray
    w: np.ndarray
    un2: np.ndarray
    um2: np.ndarray
    drho: np.ndarray


def _sample(h: Homotopy, n: int, m: int, tau: float, edges=()) -> _TauSample:
    r = h.at(tau)
    width = min(1.0 / 64, 1.0 / (8 * n * math.sqrt(r.extrema[1])))
    x, w = gauss_nodes(sorted(set(h.breakpoints) | set(edges)), width=width)
    sn = prufer.eigenfunction(r, n, grid=x, diagnostics=False)
    sm = prufer.eigenfunction(r, m, grid=x, diagnostics=False)
    return _TauSample(sn.lam, sm.lam, x, w, sn.u**2, sm.u**2, h.dtau(x))


def _derivative(s: _TauSample) -> float:
    return s.lam_n / s.lam_m * float(np.dot(s.w, s.drho * (s.um2 - s.un2)))


def _group_integrals(s: _TauSample, groups) -> np.ndarray:
    f = s.w * s.drho * (s.um2 - s.un2)
    out = []
    for left, _, right in groups:
        sel = (s.x > left) & (s.x < right)
        out.append(float(f[sel].sum()) if right > left else 0.0)
    return np.array(out)


def _edges(groups):
    return [v for g in groups for v in (g[0], g[2])]


def ratio_derivative(h: Homotopy, n: int, m: int, tau: float) -> float:
    """``d/dtau [lambda_n / lambda_m] = (lambda_n/lambda_m) int (rho - L)(u_m^2 - u_n^2)``."""
    return _derivative(_sample(h, n, m, tau))


def interval_integrals(h: Homotopy, groups, n: int, tau: float) -> np.ndarray:
    """``int_group (rho - L)(u_{n-1}^2 - u_n^2)`` for each crossing group at ``tau``."""
    return _group_integrals(_sample(h, n, n - 1, tau, _edges(groups)), groups)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass
class HomotopyCurve:
    n: int
    m: int
    tau: np.ndarray
    lam_n: np.ndarray
    lam_m: np.ndarray
    d_formula: np.ndarray
    d_fd: np.ndarray
    integrals_fixed: list = field(default_factory=list)    # tau = 1 partition
    integrals_moving: list = field(default_factory=list)   # partition recomputed at tau
    findings: list = field(default_factory=list)

    @property
    def ratio(self) -> np.ndarray:
        return self.lam_n / self.lam_m

    def endpoint_gap(self) -> float:
        """``ratio(1) - ratio(0)``; the comparison inequality says this is <= 0."""
        i1 = int(np.argmin(np.abs(self.tau - 1.0)))
        i0 = int(np.argmin(np.abs(self.tau)))
        return float(self.ratio[i1] - self.ratio[i0])

    def rows(self):
        for i, t in enumerate(self.tau):
            yield {"tau": t, "lambda_n": self.lam_n[i], "lambda_m": self.lam_m[i],
                   "ratio": self.ratio[i], "d_formula": self.d_formula[i], "d_fd": self.d_fd[i]}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["tau", "lambda_n", "lambda_m", "ratio",
                                               "d_formula", "d_fd"])
            w.writeheader()
            for row in self.rows():
                w.writerow({k: repr(float(v)) for k, v in row.items()})


def homotopy_sweep(rho: Coefficient, L: Coefficient, n: int, m: int,
                   tau_points: Sequence[float] | int = 21, *, fd_eps: Optional[float] = 1e-5,
                   crossings: Optional[CrossingSet] = None, moving: bool = False,
                   sign_tol: float = 1e-10) -> HomotopyCurve:
    """Eigenvalue ratio along ``tau rho + (1 - tau) L`` with both derivative estimates.

    For a consecutive pair ``m = n - 1`` the per-group integrals of the
    derivative are evaluated on the partition of the ``tau = 1`` crossings
    (and, with ``moving=True``, on the partition recomputed at each ``tau``);
    positive values above ``sign_tol`` are recorded as findings.
    """
    if not m < n:
        raise ValueError("need m < n")
    taus = np.linspace(0, 1, tau_points) if isinstance(tau_points, int) else np.asarray(tau_points)
    h = Homotopy(rho, L)
    consecutive = m == n - 1
    if consecutive and crossings is None:
        crossings = crossing_points(rho, n)
    groups = crossings.groups() if consecutive else []
    lam_n, lam_m, dform, dfd = [], [], [], []
    curve = HomotopyCurve(n, m, taus, None, None, None, None)
    for t in taus:
        smp = _sample(h, n, m, t, _edges(groups))
        lam_n.append(smp.lam_n)
        lam_m.append(smp.lam_m)
        dform.append(_derivative(smp))
        if fd_eps:
            up, dn = h.at(t + fd_eps), h.at(t - fd_eps)
            rp = prufer.eigenvalue(up, n).lam / prufer.eigenvalue(up, m).lam
            rq = prufer.eigenvalue(dn, n).lam / prufer.eigenvalue(dn, m).lam
            dfd.append((rp - rq) / (2 * fd_eps))
        else:
            dfd.append(math.nan)
        if consecutive:
            fixed = _group_integrals(smp, groups)
            curve.integrals_fixed.append(fixed)
            if np.any(fixed > sign_tol):
                curve.findings.append(f"tau={t:.4f}: group integral {fixed.max():.3e} > 0 "
                                      "(tau=1 partition)")
            if moving:
                mg = (crossings if t == 1.0 else crossing_points(h.at(t), n)).groups()
                mov = _group_integrals(_sample(h, n, m, t, _edges(mg)), mg)
                curve.integrals_moving.append(mov)
                if np.any(mov > sign_tol):
                    curve.findings.append(f"tau={t:.4f}: group integral {mov.max():.3e} > 0 "
                                          "(moving partition)")
    curve.lam_n = np.array(lam_n)
    curve.lam_m = np.array(lam_m)
    curve.d_formula = np.array(dform)
    curve.d_fd = np.array(dfd)
    return curve


def chained_comparison(rho: Coefficient, n: int, m: int) -> dict:
    """Compose the consecutive comparisons ``(k, k-1)``, ``k = m+1..n``.

    Returns the products ``prod lambda_k/lambda_{k-1}`` for ``rho`` (which
    telescopes to ``lambda_n/lambda_m``) and for the companions ``L_k``.
    """
    lhs, rhs = 1.0, 1.0
    comps = []
    for k in range(m + 1, n + 1):
        cs = crossing_points(rho, k)
        L = build_step_companion(rho, cs)
        a = prufer.eigenvalue(rho, k).lam / prufer.eigenvalue(rho, k - 1).lam
        b = prufer.eigenvalue(L, k).lam / prufer.eigenvalue(L, k - 1).lam
        lhs *= a
        rhs *= b
        comps.append({"k": k, "ratio_rho": a, "ratio_L": b, "L": L})
    return {"ratio_rho": lhs, "ratio_L": rhs, "steps": comps}
