"""Second-order finite-difference oracle for ``-(p u')' + q u = lambda rho u``.

Vertex-centred finite volumes on a mesh that contains every coefficient
breakpoint as a node (each piece is refined uniformly, so the ``N`` and ``2N``
meshes are nested and Richardson extrapolation applies). The pencil is
``K - lambda M`` with ``K`` symmetric tridiagonal and ``M`` diagonal; it is
reduced to a symmetric tridiagonal matrix and bisected with Sturm sequences.
Neumann ends use the half dual cell, i.e. a mirrored ghost node, which keeps
the pencil symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .core import BoundarySpec, CoefficientSet, SolverError

__all__ = ["MeshProblem", "assemble", "sturm_count", "oracle_eigenvalues", "oracle_eigenpair",
           "mesh_nodes"]


@dataclass(frozen=True)
class MeshProblem:
    """Discrete pencil on the unknown nodes ``x``."""

    x: np.ndarray
    diag: np.ndarray       # K_jj
    off: np.ndarray        # K_{j,j+1}
    mass: np.ndarray       # M_jj > 0
    boundary: BoundarySpec

    @property
    def size(self) -> int:
        return self.x.size

    def standard_form(self) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of ``M^{-1/2} K M^{-1/2}``."""
        s = 1.0 / np.sqrt(self.mass)
        return self.diag * s * s, self.off * s[:-1] * s[1:]


def mesh_nodes(a: float, b: float, N: int, breakpoints=()) -> np.ndarray:
    """Nodes on [a, b]: each breakpoint piece gets ``ceil(N * len / (b - a))`` cells."""
    cuts = np.unique([a] + [p for p in breakpoints if a < p < b] + [b])
    parts = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        m = max(2, int(np.ceil(N * (hi - lo) / (b - a) - 1e-9)))
        parts.append(np.linspace(lo, hi, m + 1)[:-1])
    return np.concatenate(parts + [[b]])


def assemble(problem: CoefficientSet, boundary: BoundarySpec, N: int) -> MeshProblem:
    a, b = boundary.a, boundary.b
    x = mesh_nodes(a, b, N, problem.breakpoints)
    h = np.diff(x)
    xm = 0.5 * (x[:-1] + x[1:])
    pm = problem.p(xm)
    # one-sided coefficient limits at every node
    rl, rr = _limits(problem.rho, x)
    ql, qr = _limits(problem.q, x)
    hl = np.concatenate([[0.0], h])   # cell to the left of node j
    hr = np.concatenate([h, [0.0]])   # cell to the right
    mass = 0.5 * (rl * hl + rr * hr)
    qmass = 0.5 * (ql * hl + qr * hr)
    cond = pm / h
    diag = np.concatenate([[0.0], cond]) + np.concatenate([cond, [0.0]]) + qmass
    off = -cond
    lo = 1 if boundary.kind[0] == "D" else 0
    hi = x.size - 1 if boundary.kind[1] == "D" else x.size
    return MeshProblem(x[lo:hi], diag[lo:hi], off[lo:hi - 1], mass[lo:hi], boundary)


def _limits(c, x):
    v = c(x)
    left, right = v.copy(), v.copy()
    for bp in c.breakpoints:
        j = np.nonzero(x == bp)[0]
        if j.size:
            left[j[0]], right[j[0]] = c.limits(bp)
    return left, right


def sturm_count(d: np.ndarray, e: np.ndarray, lam: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal (d, e) below ``lam``."""
    count = 0
    q = d[0] - lam
    tiny = np.finfo(float).tiny
    if q < 0:
        count += 1
    for i in range(1, d.size):
        if q == 0.0:
            q = tiny
        q = d[i] - lam - e[i - 1] ** 2 / q
        if q < 0:
            count += 1
    return count


def _eigs(mp: MeshProblem, n_max: int) -> np.ndarray:
    d, e = mp.standard_form()
    return eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, n_max - 1),
                            lapack_driver="stebz", tol=np.finfo(float).tiny)


def oracle_eigenvalues(problem: CoefficientSet, boundary: BoundarySpec = BoundarySpec(),
                       n_max: int = 1, N: int = 4096, richardson: bool = False) -> np.ndarray:
    """Lowest ``n_max`` eigenvalues of the discrete problem (optionally extrapolated).

    With ``richardson`` the result is ``(4 lambda(2N) - lambda(N)) / 3``.
    """
    if N < 16 * n_max:
        raise SolverError(f"mesh N={N} too coarse for n_max={n_max} (need N >= 16 n_max)")
    mp = assemble(problem, boundary, N)
    if n_max > mp.size:
        raise SolverError(f"n_max={n_max} exceeds the {mp.size} unknowns")
    lam = _eigs(mp, n_max)
    if not richardson:
        return lam
    lam2 = _eigs(assemble(problem, boundary, 2 * N), n_max)
    return (4.0 * lam2 - lam) / 3.0


def oracle_eigenpair(problem: CoefficientSet, n: int, boundary: BoundarySpec = BoundarySpec(),
                     N: int = 4096) -> tuple[float, np.ndarray, np.ndarray]:
    """``(lambda_n, x, u)`` with ``u`` from inverse iteration, ``u > 0`` near the left end."""
    mp = assemble(problem, boundary, N)
    d, e = mp.standard_form()
    w, v = eigh_tridiagonal(d, e, select="i", select_range=(n - 1, n - 1))
    u = v[:, 0] / np.sqrt(mp.mass)
    first = np.nonzero(np.abs(u) > 1e-8 * np.abs(u).max())[0][0]
    if u[first] < 0:
        u = -u
    return float(w[0]), mp.x, u
