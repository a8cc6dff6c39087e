"""Coefficient functions on [0, 1].

Every coefficient (density ``rho``, stiffness ``p``, potential ``q``) is an
immutable object exposing the same small surface:

* ``f(x)``            -- vectorised evaluation (right-continuous at jumps)
* ``f.derivative(x)`` -- derivative inside the smooth pieces
* ``f.breakpoints``   -- interior points where ``f`` or ``f'`` is not smooth
* ``f.limits(x)``     -- one-sided values ``(f(x-), f(x+))``
* ``f.reflect()``     -- ``x -> f(1 - x)``
* ``f.to_spec()``     -- JSON-serialisable description (see :func:`from_spec`)

Positivity is enforced at construction unless ``positive=False``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "Coefficient",
    "Step",
    "Grid",
    "Family",
    "Spline",
    "Combination",
    "FAMILIES",
    "constant",
    "blend",
    "from_spec",
    "spec_hash",
    "DomainError",
]

_SAMPLE_RES = 4096


class DomainError(ValueError):
    """Raised for evaluation outside [0, 1] or an invalid coefficient."""


def _check_domain(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0) or np.any(np.isnan(x)):
        raise DomainError(f"evaluation point outside [0, 1]: {x}")
    return x


class Coefficient:
    """Base class; subclasses implement ``_eval`` and ``_deriv``."""

    positive: bool = True

    def __call__(self, x):
        x = _check_domain(x)
        return self._eval(x)

    def derivative(self, x):
        x = _check_domain(x)
        return self._deriv(x)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()

    @property
    def is_piecewise_constant(self) -> bool:
        return False

    def limits(self, x: float) -> tuple[float, float]:
        v = float(self._eval(np.asarray(float(x))))
        return v, v

    def reflect(self) -> "Coefficient":
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    # -- sampling helpers -------------------------------------------------
    def sample_points(self, resolution: int = _SAMPLE_RES) -> tuple[np.ndarray, np.ndarray]:
        """Ordered sample positions and values, both limits at breakpoints."""
        xs = np.linspace(0.0, 1.0, resolution + 1)
        bps = np.asarray(self.breakpoints, dtype=float)
        xs = np.setdiff1d(xs, bps)
        vals = self._eval(xs)
        pos = [xs]
        out = [vals]
        if bps.size:
            lim = np.array([self.limits(b) for b in bps])
            pos += [bps, bps]
            out += [lim[:, 0], lim[:, 1]]
        pos = np.concatenate(pos)
        out = np.concatenate(out)
        # stable sort: for equal positions left limit precedes right limit
        order = np.argsort(pos, kind="stable")
        return pos[order], out[order]

    @cached_property
    def extrema(self) -> tuple[float, float]:
        _, v = self.sample_points()
        return float(v.min()), float(v.max())

    def _validate(self):
        lo, _ = self.extrema
        if self.positive and not lo > 0.0:
            raise DomainError(f"coefficient must be strictly positive (min sample {lo:g})")

    def __add__(self, other):
        return Combination(((1.0, self), (1.0, other)), positive=False)

    def scaled(self, c: float) -> "Combination":
        return Combination(((float(c), self),), positive=self.positive and c > 0)


# ---------------------------------------------------------------------------
# Step
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Step(Coefficient):
    """Piecewise constant; ``values[i]`` holds on ``[breaks[i-1], breaks[i])``."""

    breaks: tuple[float, ...]
    values: tuple[float, ...]
    positive: bool = True

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != len(self.breaks) + 1:
            raise DomainError("Step needs len(values) == len(breaks) + 1")
        b = np.asarray(self.breaks)
        if b.size and (np.any(np.diff(b) <= 0) or b[0] <= 0.0 or b[-1] >= 1.0):
            raise DomainError("Step breaks must be strictly increasing inside (0, 1)")
        if not all(math.isfinite(v) for v in self.values):
            raise DomainError("Step values must be finite")
        if self.positive and min(self.values) <= 0.0:
            raise DomainError("Step density values must be positive")

    @property
    def edges(self) -> np.ndarray:
        return np.concatenate([[0.0], self.breaks, [1.0]])

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.edges)

    def _eval(self, x):
        idx = np.searchsorted(np.asarray(self.breaks), x, side="right")
        return np.asarray(self.values)[idx]

    def _deriv(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def breakpoints(self):
        return self.breaks

    @property
    def is_piecewise_constant(self):
        return True

    def limits(self, x):
        x = float(x)
        b = np.asarray(self.breaks)
        left = np.asarray(self.values)[np.searchsorted(b, x, side="left")]
        right = np.asarray(self.values)[np.searchsorted(b, x, side="right")]
        return float(left), float(right)

    def reflect(self):
        return Step(tuple(1.0 - b for b in reversed(self.breaks)),
                    tuple(reversed(self.values)), positive=self.positive)

    def to_spec(self):
        return {"type": "step", "breaks": list(self.breaks), "values": list(self.values)}


# ---------------------------------------------------------------------------
# Grid (uniform samples, linear interpolation)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Grid(Coefficient):
    samples: tuple[float, ...]
    positive: bool = True

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(float(s) for s in self.samples))
        if len(self.samples) < 3:
            raise DomainError("Grid needs at least 3 samples")
        if self.positive and min(self.samples) <= 0.0:
            raise DomainError("Grid density samples must be positive")

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.samples))

    @cached_property
    def _s(self) -> np.ndarray:
        return np.asarray(self.samples)

    def _eval(self, x):
        return np.interp(x, self.nodes, self._s)

    def _deriv(self, x):
        n = len(self.samples) - 1
        idx = np.clip(np.floor(np.asarray(x) * n).astype(int), 0, n - 1)
        return (self._s[idx + 1] - self._s[idx]) * n

    @property
    def breakpoints(self):
        return tuple(self.nodes[1:-1])

    def reflect(self):
        return Grid(tuple(reversed(self.samples)), positive=self.positive)

    def to_spec(self):
        return {"type": "grid", "samples": list(self.samples)}


# ---------------------------------------------------------------------------
# Parametric families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _FamilyDef:
    f: Callable
    df: Callable
    defaults: Mapping[str, float]
    kinks: Callable = lambda p: ()


def _heaviside_side(x, x0):
    return np.where(x < x0, -1.0, 1.0)


FAMILIES: dict[str, _FamilyDef] = {
    "constant": _FamilyDef(
        lambda x, c: np.full_like(x, c, dtype=float),
        lambda x, c: np.zeros_like(x, dtype=float),
        {"c": 1.0},
    ),
    "linear": _FamilyDef(
        lambda x, a, b: a + b * x,
        lambda x, a, b: np.full_like(x, b, dtype=float),
        {"a": 1.0, "b": 0.0},
    ),
    "quadratic-well": _FamilyDef(
        lambda x, x0, a, k: a + k * (x - x0) ** 2,
        lambda x, x0, a, k: 2.0 * k * (x - x0),
        {"x0": 0.5, "a": 1.0, "k": 1.0},
    ),
    "quadratic-barrier": _FamilyDef(
        lambda x, x0, a, k: a - k * (x - x0) ** 2,
        lambda x, x0, a, k: -2.0 * k * (x - x0),
        {"x0": 0.5, "a": 2.0, "k": 1.0},
    ),
    # a + kl (x-x0)^2 left of x0, a + kr (x-x0)^2 right of it (C^1 at x0)
    "asym-well": _FamilyDef(
        lambda x, x0, a, kl, kr: a + np.where(x < x0, kl, kr) * (x - x0) ** 2,
        lambda x, x0, a, kl, kr: 2.0 * np.where(x < x0, kl, kr) * (x - x0),
        {"x0": 0.5, "a": 1.0, "kl": 1.0, "kr": 1.0},
        lambda p: (p["x0"],),
    ),
    "power-well": _FamilyDef(
        lambda x, x0, a, k, power: a + k * np.abs(x - x0) ** power,
        lambda x, x0, a, k, power: k * power * np.abs(x - x0) ** (power - 1) * _heaviside_side(x, x0),
        {"x0": 0.5, "a": 1.0, "k": 1.0, "power": 2.0},
        lambda p: (p["x0"],),
    ),
    "exponential": _FamilyDef(
        lambda x, a, b: a * np.exp(b * x),
        lambda x, a, b: a * b * np.exp(b * x),
        {"a": 1.0, "b": -1.0},
    ),
    "sine": _FamilyDef(
        lambda x, a, b: a + b * np.sin(np.pi * x),
        lambda x, a, b: b * np.pi * np.cos(np.pi * x),
        {"a": 1.0, "b": 1.0},
    ),
    # a + b * min(x/x0, (1-x)/(1-x0)): barrier for b > 0, well for b < 0
    "tent": _FamilyDef(
        lambda x, x0, a, b: a + b * np.minimum(x / x0, (1.0 - x) / (1.0 - x0)),
        lambda x, x0, a, b: b * np.where(x < x0, 1.0 / x0, -1.0 / (1.0 - x0)),
        {"x0": 0.5, "a": 1.0, "b": 1.0},
        lambda p: (p["x0"],),
    ),
    "gaussian-well": _FamilyDef(
        lambda x, x0, a, k, w: a - k * np.exp(-((x - x0) / w) ** 2),
        lambda x, x0, a, k, w: 2.0 * k * (x - x0) / w**2 * np.exp(-((x - x0) / w) ** 2),
        {"x0": 0.5, "a": 2.0, "k": 1.0, "w": 0.3},
    ),
}


@dataclass(frozen=True, eq=False)
class Family(Coefficient):
    """A named closed-form coefficient, e.g. ``Family("quadratic-well", x0=0.3)``."""

    name: str
    params: Mapping[str, float] = field(default_factory=dict)
    reflected: bool = False
    positive: bool = True

    def __init__(self, name: str, params: Mapping[str, float] | None = None, *,
                 reflected: bool = False, positive: bool = True, **kw):
        if name not in FAMILIES:
            raise DomainError(f"unknown family {name!r}; known: {sorted(FAMILIES)}")
        merged = dict(FAMILIES[name].defaults)
        unknown = set(params or {}) | set(kw)
        unknown -= set(merged)
        if unknown:
            raise DomainError(f"unknown parameters for {name!r}: {sorted(unknown)}")
        merged.update(params or {})
        merged.update(kw)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "params", {k: float(v) for k, v in merged.items()})
        object.__setattr__(self, "reflected", bool(reflected))
        object.__setattr__(self, "positive", bool(positive))
        self._validate()

    @property
    def _def(self):
        return FAMILIES[self.name]

    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        xx = 1.0 - x if self.reflected else x
        return np.asarray(self._def.f(xx, **self.params), dtype=float)

    def _deriv(self, x):
        x = np.asarray(x, dtype=float)
        if self.reflected:
            return -np.asarray(self._def.df(1.0 - x, **self.params), dtype=float)
        return np.asarray(self._def.df(x, **self.params), dtype=float)

    @property
    def breakpoints(self):
        ks = [float(k) for k in self._def.kinks(self.params) if 0.0 < k < 1.0]
        if self.reflected:
            ks = [1.0 - k for k in ks]
        return tuple(sorted(ks))

    def reflect(self):
        return Family(self.name, self.params, reflected=not self.reflected,
                      positive=self.positive)

    def to_spec(self):
        spec = {"type": "family", "name": self.name, "params": dict(self.params)}
        if self.reflected:
            spec["reflect"] = True
        return spec


def constant(c: float = 1.0, positive: bool = True) -> Family:
    return Family("constant", c=c, positive=positive)


# ---------------------------------------------------------------------------
# Piecewise cubic spline (output of the transformation chain)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Spline(Coefficient):
    """C^2 cubic spline through ``(knots, values)``, restarted at ``kinks``.

    Kinks must be knots; the spline is built separately on each piece so that
    slope discontinuities of the underlying function are honoured.
    """

    knots: tuple[float, ...]
    values: tuple[float, ...]
    kinks: tuple[float, ...] = ()
    positive: bool = True

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        if k.size < 3 or abs(k[0]) > 1e-15 or abs(k[-1] - 1.0) > 1e-15 or np.any(np.diff(k) <= 0):
            raise DomainError("Spline knots must increase strictly from 0 to 1")
        object.__setattr__(self, "knots", tuple(k))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "kinks", tuple(sorted(float(v) for v in self.kinks if 0 < v < 1)))
        self._validate()

    @cached_property
    def _pieces(self):
        k = np.asarray(self.knots)
        v = np.asarray(self.values)
        cuts = [0] + [int(np.argmin(np.abs(k - c))) for c in self.kinks] + [k.size - 1]
        pieces = []
        for i0, i1 in zip(cuts[:-1], cuts[1:]):
            if i1 - i0 >= 2:
                pieces.append((k[i0], k[i1], CubicSpline(k[i0:i1 + 1], v[i0:i1 + 1])))
            else:
                pieces.append((k[i0], k[i1], CubicSpline(k[i0:i1 + 1], v[i0:i1 + 1], bc_type="natural")))
        return pieces

    def _which(self, x):
        lefts = np.array([p[0] for p in self._pieces[1:]])
        return np.searchsorted(lefts, x, side="right")

    def _apply(self, x, nu):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        idx = self._which(x)
        for i, (_, _, cs) in enumerate(self._pieces):
            m = idx == i
            if np.any(m):
                out[m] = cs(x[m], nu)
        return out

    def _eval(self, x):
        return self._apply(x, 0)

    def _deriv(self, x):
        return self._apply(x, 1)

    @property
    def breakpoints(self):
        return self.kinks

    def reflect(self):
        k = 1.0 - np.asarray(self.knots)[::-1]
        k[0], k[-1] = 0.0, 1.0
        return Spline(tuple(k), tuple(reversed(self.values)),
                      tuple(1.0 - c for c in self.kinks), positive=self.positive)

    def to_spec(self):
        return {"type": "spline", "knots": list(self.knots), "values": list(self.values),
                "kinks": list(self.kinks)}


# ---------------------------------------------------------------------------
# Linear combinations (homotopy blends, perturbations)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Combination(Coefficient):
    terms: tuple[tuple[float, Coefficient], ...]
    positive: bool = True

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((float(w), c) for w, c in self.terms))
        if self.positive:
            self._validate()

    def _eval(self, x):
        return sum(w * c._eval(x) for w, c in self.terms)

    def _deriv(self, x):
        return sum(w * c._deriv(x) for w, c in self.terms)

    @property
    def breakpoints(self):
        pts = set()
        for _, c in self.terms:
            pts.update(c.breakpoints)
        return tuple(sorted(pts))

    @property
    def is_piecewise_constant(self):
        return all(c.is_piecewise_constant or (isinstance(c, Family) and c.name == "constant")
                   for _, c in self.terms)

    def limits(self, x):
        lo = hi = 0.0
        for w, c in self.terms:
            a, b = c.limits(x)
            lo += w * a
            hi += w * b
        return lo, hi

    def reflect(self):
        return Combination(tuple((w, c.reflect()) for w, c in self.terms), positive=self.positive)

    def to_spec(self):
        return {"type": "combination", "terms": [[w, c.to_spec()] for w, c in self.terms]}


def blend(rho: Coefficient, L: Coefficient, tau: float) -> Combination:
    """The homotopy ``tau * rho + (1 - tau) * L``."""
    tau = float(tau)
    return Combination(((tau, rho), (1.0 - tau, L)))


# ---------------------------------------------------------------------------
# JSON specs
# ---------------------------------------------------------------------------


def from_spec(spec: Mapping | str, positive: bool = True) -> Coefficient:
    """Build a coefficient from its JSON description.

    >>> from_spec({"type": "step", "breaks": [0.5], "values": [4, 1]})(0.25)
    array(4.)
    """
    if isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec.get("type")
    if kind == "step":
        return Step(tuple(spec["breaks"]), tuple(spec["values"]), positive=positive)
    if kind == "grid":
        return Grid(tuple(spec["samples"]), positive=positive)
    if kind == "family":
        return Family(spec["name"], spec.get("params", {}), reflected=spec.get("reflect", False),
                      positive=positive)
    if kind == "spline":
        return Spline(tuple(spec["knots"]), tuple(spec["values"]), tuple(spec.get("kinks", ())),
                      positive=positive)
    if kind == "combination":
        return Combination(tuple((w, from_spec(s, positive=False)) for w, s in spec["terms"]),
                           positive=positive)
    raise DomainError(f"unknown coefficient spec type {kind!r}")


def spec_hash(spec: Mapping) -> str:
    blob = json.dumps(spec, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def as_coefficient(obj, positive: bool = True) -> Coefficient:
    if isinstance(obj, Coefficient):
        return obj
    if isinstance(obj, (int, float)):
        return constant(float(obj), positive=positive)
    if isinstance(obj, Mapping):
        return from_spec(obj, positive=positive)
    raise TypeError(f"cannot interpret {obj!r} as a coefficient")


def _sorted_unique(points: Sequence[float]) -> np.ndarray:
    return np.unique(np.asarray(points, dtype=float))
