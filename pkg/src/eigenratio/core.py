"""Problem containers shared by the solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .coefficients import Coefficient, DomainError, as_coefficient, constant, from_spec

__all__ = ["CoefficientSet", "BoundarySpec", "EigenSolution", "SolverError", "StructureError"]


class SolverError(RuntimeError):
    """Numerical failure inside a solver (bracketing, step-size underflow, ...)."""


class StructureError(RuntimeError):
    """An eigenfunction structure property expected from Sturm theory failed."""


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficients of ``-(p y')' + q y = lambda rho y``; ``q`` may change sign."""

    p: Coefficient = field(default_factory=lambda: constant(1.0))
    q: Coefficient = field(default_factory=lambda: constant(0.0, positive=False))
    rho: Coefficient = field(default_factory=lambda: constant(1.0))

    def __post_init__(self):
        object.__setattr__(self, "p", as_coefficient(self.p))
        object.__setattr__(self, "q", as_coefficient(self.q, positive=False))
        object.__setattr__(self, "rho", as_coefficient(self.rho))
        if not (self.p.positive and self.rho.positive):
            raise DomainError("p and rho must be positive coefficients")

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.p.breakpoints) | set(self.q.breakpoints)
                            | set(self.rho.breakpoints)))

    @property
    def is_string(self) -> bool:
        """p == 1 and q == 0 identically."""
        return _is_const(self.p, 1.0) and _is_const(self.q, 0.0)

    def to_spec(self) -> dict:
        return {"p": self.p.to_spec(), "q": self.q.to_spec(), "rho": self.rho.to_spec()}

    @classmethod
    def from_spec(cls, spec: dict) -> "CoefficientSet":
        return cls(p=from_spec(spec.get("p", {"type": "family", "name": "constant"})),
                   q=from_spec(spec.get("q", {"type": "family", "name": "constant",
                                              "params": {"c": 0.0}}), positive=False),
                   rho=from_spec(spec.get("rho", {"type": "family", "name": "constant"})))


def _is_const(c: Coefficient, value: float) -> bool:
    lo, hi = c.extrema
    return lo == value and hi == value


_KINDS = ("DD", "NN", "DN", "ND")


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary conditions on ``[a, b]``: D = Dirichlet, N = Neumann (left, right)."""

    kind: str = "DD"
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"boundary kind must be one of {_KINDS}")
        if not 0.0 <= self.a < self.b <= 1.0:
            raise DomainError("boundary interval must satisfy 0 <= a < b <= 1")

    @classmethod
    def dirichlet(cls):
        return cls("DD", 0.0, 1.0)

    @classmethod
    def neumann_half(cls, half: str):
        return cls("NN", 0.0, 0.5) if half == "left" else cls("NN", 0.5, 1.0)

    @classmethod
    def hat(cls):
        """y(0) = y'(1/2) = 0."""
        return cls("DN", 0.0, 0.5)

    @classmethod
    def tilde(cls):
        """y'(1/2) = y(1) = 0."""
        return cls("ND", 0.5, 1.0)


@dataclass
class EigenSolution:
    """One normalised eigenpair sampled on ``x``."""

    n: int
    lam: float
    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    zeros: np.ndarray
    normalization: float
    z: float = math.nan
    scale: float = 1.0
    trail: Any = None

    def evaluate(self, x, derivative: bool = False) -> np.ndarray:
        """``u_n`` (or ``u_n'``) at arbitrary points by re-integration."""
        from .prufer import prufer_integrate

        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        order = np.argsort(flat)
        _, tr = prufer_integrate(self.trail.rho, self.z, grid=flat[order],
                                 rtol=self.trail.rtol, atol=self.trail.atol, full=False)
        vals = (tr.dy() if derivative else tr.y()) * self.scale
        res = np.empty_like(flat)
        res[order] = vals[np.searchsorted(tr.x, flat[order])]
        return res.reshape(x.shape)
