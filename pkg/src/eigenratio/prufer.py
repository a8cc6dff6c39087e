"""Shooting eigensolver for ``-y'' = lambda rho y``, y(0) = y(1) = 0.

Uses the modified Prufer substitution

    y  = (r / z) rho^(-1/4) sin(phi),   y' = r rho^(1/4) cos(phi),   lambda = z^2,

with ``phi(0) = 0`` and ``r(0) = 1`` (so ``y'(0) = rho(0)^(1/4)``), which gives

    phi'   = z sqrt(rho) + (1/4)(rho'/rho) sin(2 phi)
    log r' = -(1/4)(rho'/rho) cos(2 phi).

The n-th Dirichlet eigenvalue is the unique ``z`` with ``phi(1, z) = n pi``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from scipy.optimize import brentq

from . import _kernel
from .coefficients import Coefficient, DomainError
from .core import EigenSolution, SolverError

__all__ = [
    "PruferState",
    "PruferTrail",
    "ShootingResult",
    "prufer_integrate",
    "eigenvalue",
    "eigenvalues",
    "eigenfunction",
    "theta",
    "theta_dot",
    "theta_dot_variational",
    "DEFAULT_RTOL",
    "DEFAULT_ATOL",
]

log = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
_MAX_STEPS = 2_000_000


# ---------------------------------------------------------------------------
# Chebyshev tables of sqrt(rho) and rho'/rho
# ---------------------------------------------------------------------------

_DEG = 24
_MAX_WIDTH = 0.125
_TAIL_TOL = 1e-14


@dataclass(frozen=True)
class _Table:
    bounds: np.ndarray
    kq: np.ndarray
    ca: np.ndarray
    na: np.ndarray
    cb: np.ndarray
    nb: np.ndarray
    sqrt_integral: float
    rho_min: float
    rho_max: float

    def segment_of(self, x: float) -> int:
        s = int(np.searchsorted(self.bounds, x, side="right")) - 1
        return min(max(s, 0), len(self.bounds) - 2)


def _cheb_nodes(deg):
    k = np.arange(deg + 1)
    return np.cos(np.pi * (k + 0.5) / (deg + 1))


_NODES = _cheb_nodes(_DEG)
# values at first-kind nodes -> Chebyshev coefficients
_V2C = np.linalg.inv(_cheb.chebvander(_NODES, _DEG))


def _effective_length(c: np.ndarray, scale: np.ndarray) -> np.ndarray:
    tiny = np.abs(c) > 1e-17 * np.maximum(scale, 1e-300)[:, None]
    has = tiny.any(axis=1)
    last = c.shape[1] - 1 - np.argmax(tiny[:, ::-1], axis=1)
    return np.where(has, last + 1, 0).astype(np.int64)


def _build_table(rho: Coefficient) -> _Table:
    cuts = np.unique(np.concatenate([[0.0], np.asarray(rho.breakpoints, float), [1.0]]))
    jumps = set(float(b) for b in rho.breakpoints)
    segs = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        m = max(1, int(math.ceil((hi - lo) / _MAX_WIDTH - 1e-12)))
        e = np.linspace(lo, hi, m + 1)
        segs.extend(zip(e[:-1], e[1:]))
    segs = np.array(segs)
    const = rho.is_piecewise_constant
    done_lo, done_ca, done_cb = [], [], []
    for _ in range(40):
        lo, hi = segs[:, 0], segs[:, 1]
        xs = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * _NODES[None, :]
        r = rho._eval(xs)
        if np.any(r <= 0):
            raise DomainError("density must be positive for the Prufer solver")
        a = np.sqrt(r)
        b = np.zeros_like(r) if const else rho._deriv(xs) / r
        ca = a @ _V2C.T
        cb = b @ _V2C.T
        sa = np.abs(ca).max(axis=1)
        sb = np.maximum(np.abs(cb).max(axis=1), 1.0)
        tail = np.maximum(np.abs(ca[:, -3:]).max(axis=1) / sa, np.abs(cb[:, -3:]).max(axis=1) / sb)
        ok = (tail <= _TAIL_TOL) | ((hi - lo) < 1e-7)
        done_lo.append(segs[ok])
        done_ca.append(ca[ok])
        done_cb.append(cb[ok])
        if ok.all():
            break
        bad = segs[~ok]
        mid = 0.5 * (bad[:, 0] + bad[:, 1])
        segs = np.concatenate([np.stack([bad[:, 0], mid], 1), np.stack([mid, bad[:, 1]], 1)])
    segs = np.concatenate(done_lo)
    order = np.argsort(segs[:, 0])
    segs = segs[order]
    ca = np.ascontiguousarray(np.concatenate(done_ca)[order])
    cb = np.ascontiguousarray(np.concatenate(done_cb)[order])
    ca[np.abs(ca) < 1e-17 * np.abs(ca).max(axis=1, keepdims=True)] = 0.0
    na = _effective_length(ca, np.abs(ca).max(axis=1))
    nb = _effective_length(cb, np.maximum(np.abs(cb).max(axis=1), 1.0))
    if const:
        nb[:] = 0
    bounds = np.concatenate([segs[:, 0], [1.0]])
    kq = np.ones(len(bounds))
    for j in range(1, len(bounds) - 1):
        if float(bounds[j]) in jumps:
            left, right = rho.limits(bounds[j])
            if left != right:
                kq[j] = (right / left) ** 0.25
    # int_{-1}^{1} T_k = 2/(1-k^2) for even k
    k = np.arange(_DEG + 1, dtype=float)
    w = np.zeros(_DEG + 1)
    w[::2] = 2.0 / (1.0 - k[::2] ** 2)
    sqrt_int = float(np.sum((ca @ w) * 0.5 * np.diff(bounds)))
    lo_v, hi_v = rho.extrema
    return _Table(bounds, kq, ca, na, cb, nb, sqrt_int, lo_v, hi_v)


def _table(rho: Coefficient) -> _Table:
    tab = rho.__dict__.get("_prufer_table")
    if tab is None:
        tab = _build_table(rho)
        rho.__dict__["_prufer_table"] = tab
    return tab


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PruferState:
    """Phase-plane state at ``x``; ``phi_z`` is the z-derivative of ``phi``."""

    x: float
    phi: float
    logr: float
    z: float
    phi_z: float = float("nan")
    mass: float = float("nan")
    g: float = float("nan")

    @property
    def r(self) -> float:
        return math.exp(self.logr)

    @property
    def theta(self) -> float:
        return self.phi / self.z


@dataclass
class PruferTrail:
    """Samples of the Prufer state along [0, 1] for one value of ``z``."""

    rho: Coefficient
    z: float
    x: np.ndarray
    states: np.ndarray  # (len(x), NSTATE)
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    ncomp: int = _kernel.NSTATE

    @property
    def phi(self):
        return self.states[:, 0]

    @property
    def logr(self):
        return self.states[:, 1]

    def y(self) -> np.ndarray:
        """Eigenfunction-candidate values ``(r/z) rho^(-1/4) sin phi``."""
        r = np.exp(self.logr)
        return r / self.z * self.rho(self.x) ** -0.25 * np.sin(self.phi)

    def dy(self) -> np.ndarray:
        r = np.exp(self.logr)
        return r * self.rho(self.x) ** 0.25 * np.cos(self.phi)

    def advance(self, x_new: Sequence[float] | float) -> np.ndarray:
        """States at points beyond stored samples, restarting from the nearest sample."""
        xs = np.atleast_1d(np.asarray(x_new, dtype=float))
        out = np.empty((xs.size, _kernel.NSTATE))
        for i, xv in enumerate(xs):
            j = int(np.searchsorted(self.x, xv, side="right")) - 1
            j = max(j, 0)
            out[i] = _march(self.rho, self.z, self.x[j], self.states[j], np.array([xv]),
                            self.rtol, self.atol, self.ncomp)[0]
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "phi", "log_r"])
            for xv, s in zip(self.x, self.states):
                w.writerow([repr(float(xv)), repr(float(s[0])), repr(float(s[1]))])


def _march(rho, z, x0, y0, out_x, rtol, atol, ncomp):
    tab = _table(rho)
    out_x = np.ascontiguousarray(np.clip(np.asarray(out_x, dtype=float), 0.0, 1.0))
    if out_x.size and np.any(np.diff(out_x) < 0):
        raise ValueError("output points must be sorted")
    h0 = min(0.05, 0.5 / (1.0 + z * math.sqrt(tab.rho_max)))
    status, xr, _, out = _kernel.march(float(z), tab.bounds, tab.kq, tab.ca, tab.na, tab.cb,
                                       tab.nb, float(x0), np.asarray(y0, dtype=float),
                                       tab.segment_of(x0), out_x, rtol, atol, h0, _MAX_STEPS,
                                       ncomp)
    if status != _kernel.OK:
        what = "step-size underflow" if status == _kernel.UNDERFLOW else "step budget exhausted"
        raise SolverError(f"Prufer integration failed ({what}) at x={xr:.17g}, z={z:g}")
    return out


def _y0(rho):
    return np.zeros(_kernel.NSTATE)


def prufer_integrate(rho: Coefficient, z: float, *, grid: Optional[Sequence[float]] = None,
                     rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                     full: bool = True):
    """Integrate the Prufer system on [0, 1] at spectral parameter ``z``.

    Returns the :class:`PruferState` at ``x = 1``; when ``grid`` is given also
    returns a :class:`PruferTrail` sampled at ``grid`` (which must lie in [0, 1]).
    """
    z = float(z)
    if not z > 0:
        raise DomainError(f"z must be positive, got {z}")
    ncomp = _kernel.NSTATE if full else 3
    if grid is None:
        xs = np.array([1.0])
    else:
        xs = np.unique(np.concatenate([np.asarray(grid, dtype=float), [0.0, 1.0]]))
        if xs[0] < 0 or xs[-1] > 1:
            raise DomainError("grid must lie in [0, 1]")
    out = _march(rho, z, 0.0, _y0(rho), xs, rtol, atol, ncomp)
    s = out[-1]
    end = PruferState(1.0, s[0], s[1], z, s[2], s[3] if full else math.nan,
                      s[4] if full else math.nan)
    if grid is None:
        return end
    return end, PruferTrail(rho, z, xs, out, rtol, atol, ncomp)


# ---------------------------------------------------------------------------
# Eigenvalues
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShootingResult:
    n: int
    z: float
    lam: float
    residual: float
    iterations: int

    @property
    def theta(self) -> float:
        """theta(1, z_n) = n pi / z_n."""
        return self.n * math.pi / self.z


def _phase_end(rho, z, rtol, atol):
    out = _march(rho, z, 0.0, _y0(rho), np.array([1.0]), rtol, atol, 3)[0]
    return out[0], out[2]


def eigenvalue(rho: Coefficient, n: int, *, tol: float = 1e-12, rtol: float = DEFAULT_RTOL,
               atol: float = DEFAULT_ATOL, max_expand: int = 60,
               max_iter: int = 200) -> ShootingResult:
    """n-th Dirichlet eigenvalue by safeguarded Newton on ``phi(1, z) = n pi``.

    The bracket starts at ``[n pi / sqrt(max rho), n pi / sqrt(min rho)]`` and
    is widened geometrically if needed; ``d phi / dz > 0`` is asserted on it.
    """
    if n < 1:
        raise DomainError("mode index n must be >= 1")
    tab = _table(rho)
    target = n * math.pi
    lo = target / math.sqrt(tab.rho_max) * (1 - 1e-9)
    hi = target / math.sqrt(tab.rho_min) * (1 + 1e-9)
    flo, _ = _phase_end(rho, lo, rtol, atol)
    flo -= target
    fhi, _ = _phase_end(rho, hi, rtol, atol)
    fhi -= target
    expand = 0
    while flo > 0:
        lo *= 0.5
        flo = _phase_end(rho, lo, rtol, atol)[0] - target
        expand += 1
        if expand > max_expand:
            raise SolverError(f"could not bracket eigenvalue n={n} from below")
    while fhi < 0:
        hi *= 2.0
        fhi = _phase_end(rho, hi, rtol, atol)[0] - target
        expand += 1
        if expand > max_expand:
            raise SolverError(f"could not bracket eigenvalue n={n} from above")
    z = min(max(target / tab.sqrt_integral, lo), hi)
    it = 0
    f, df = _phase_end(rho, z, rtol, atol)
    f -= target
    best = (abs(f), z)
    while it < max_iter:
        it += 1
        if abs(f) <= tol:
            break
        if f < 0:
            lo, flo = z, f
        else:
            hi, fhi = z, f
        if not flo <= 0 <= fhi:
            raise SolverError("phi(1, z) not increasing on the bracket")
        if hi - lo <= 4 * np.spacing(hi):
            break
        zn = z - f / df if df > 0 else 0.5 * (lo + hi)
        if not lo < zn < hi:
            zn = 0.5 * (lo + hi)
        z = zn
        f, df = _phase_end(rho, z, rtol, atol)
        f -= target
        if df <= 0:
            raise SolverError(f"d phi/dz = {df} <= 0 at z={z}")
        best = min(best, (abs(f), z))
    res, z = best
    return ShootingResult(n, z, z * z, res, it)


def eigenvalues(rho: Coefficient, n_max: int, **kw) -> np.ndarray:
    """``lambda_1 .. lambda_{n_max}`` as an array."""
    return np.array([eigenvalue(rho, n, **kw).lam for n in range(1, n_max + 1)])


# ---------------------------------------------------------------------------
# Eigenfunctions
# ---------------------------------------------------------------------------


def default_grid(rho: Coefficient, points: int = 2049) -> np.ndarray:
    return np.unique(np.concatenate([np.linspace(0, 1, points), rho.breakpoints]))


def eigenfunction(rho: Coefficient, n: int, grid: Optional[Sequence[float]] = None, *,
                  shot: Optional[ShootingResult] = None, rtol: float = DEFAULT_RTOL,
                  atol: float = DEFAULT_ATOL, diagnostics: bool = True) -> EigenSolution:
    """Normalised ``u_n`` (``int rho u^2 = 1``, ``u_n'(0) > 0``) sampled on ``grid``.

    With ``diagnostics=False`` the zeros and the quadrature check of the
    normalisation are skipped (``zeros`` is empty, ``normalization`` NaN).
    """
    shot = shot or eigenvalue(rho, n, rtol=rtol, atol=atol)
    xs = default_grid(rho) if grid is None else np.asarray(grid, dtype=float)
    end, trail = prufer_integrate(rho, shot.z, grid=xs, rtol=rtol, atol=atol)
    # mass = z^2 int rho y^2
    scale = shot.z / math.sqrt(end.mass)
    zeros = _phase_crossings(trail, n - 1) if diagnostics else np.empty(0)
    keep = np.isin(trail.x, xs) if grid is not None else slice(None)
    u = trail.y()[keep] * scale
    du = trail.dy()[keep] * scale
    sol = EigenSolution(n=n, lam=shot.lam, x=trail.x[keep], u=u, du=du, zeros=zeros,
                        normalization=float("nan"), z=shot.z, scale=scale, trail=trail)
    if diagnostics:
        sol.normalization = _normalization(rho, sol)
    return sol


def _phase_crossings(trail: PruferTrail, count: int) -> np.ndarray:
    """Locations where phi crosses k pi, k = 1..count (phi' = z sqrt(rho) > 0 there)."""
    zeros = []
    phi = trail.phi
    for k in range(1, count + 1):
        level = k * math.pi
        idx = np.nonzero((phi[:-1] < level) & (phi[1:] >= level))[0]
        if idx.size == 0:
            raise SolverError(f"phase never reaches {k} pi")
        j = int(idx[0])
        a, b = trail.x[j], trail.x[j + 1]
        if phi[j + 1] == level:
            zeros.append(float(b))
            continue
        s0 = trail.states[j]

        def g(x, s0=s0, a=a, level=level):
            if x == a:
                return s0[0] - level
            return _march(trail.rho, trail.z, a, s0, np.array([x]), trail.rtol, trail.atol,
                          3)[0][0] - level

        zeros.append(float(brentq(g, a, b, xtol=1e-15, rtol=1e-15)))
    return np.array(zeros)


def _normalization(rho, sol):
    from .quadrature import integrate_samples
    return integrate_samples(lambda x: rho(x) * sol.evaluate(x) ** 2, rho.breakpoints)


# ---------------------------------------------------------------------------
# theta = phi / z and its z-derivative
# ---------------------------------------------------------------------------


def theta(rho: Coefficient, z: float, x: float = 1.0, **kw) -> float:
    if x == 1.0:
        return prufer_integrate(rho, z, full=False, **kw).phi / z
    _, tr = prufer_integrate(rho, z, grid=[x], full=False, **kw)
    return float(tr.phi[np.searchsorted(tr.x, x)] / z)


def _state_at(rho, z, x, rtol, atol):
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x={x} outside the integrated range [0, 1]")
    _, tr = prufer_integrate(rho, z, grid=[x], rtol=rtol, atol=atol, full=True)
    return tr.states[int(np.searchsorted(tr.x, x))]


def theta_dot(rho: Coefficient, z: float, x: float = 1.0, *, rtol: float = DEFAULT_RTOL,
              atol: float = DEFAULT_ATOL) -> float:
    """d theta / dz at ``x`` from the quadrature identity

        theta_z = G(x) / (z^2 r^2(x)),
        G(x) = int_0^x r^2 (1/4)(rho'/rho)(2 phi cos 2phi - sin 2phi) dt
               + sum over jumps b < x of [r^2 phi](b-) - [r^2 phi](b+).

    For a step density only the jump terms survive.
    """
    s = _state_at(rho, z, x, rtol, atol)
    return float(s[4] / (z * z * math.exp(2.0 * s[1])))


def theta_dot_variational(rho: Coefficient, z: float, x: float = 1.0, *,
                          rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> float:
    """d theta / dz from the variational phase derivative: (phi_z - phi/z) / z."""
    s = _state_at(rho, z, x, rtol, atol)
    return float((s[2] - s[0] / z) / z)
