"""Seeded instance families, the verification suite and its reports."""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import comparison, fd, prufer, stepexact, transform
from .classify import classify
from .coefficients import Coefficient, DomainError, Family, Step, constant, spec_hash
from .core import BoundarySpec, CoefficientSet

__all__ = [
    "FAMILY_KINDS",
    "Instance",
    "generate_family",
    "SuiteConfig",
    "Report",
    "run_suite",
    "explore_barrier",
    "ROW_COLUMNS",
]

# advertised shape of each family (checked with classify on every draw)
FAMILY_KINDS = {
    "constant": ("constant",),
    "monotone-step": ("decreasing",),
    "single-well-step": ("single-well",),
    "single-well-smooth": ("single-well",),
    "single-barrier-step": ("single-barrier",),
    "symmetric-single-barrier": ("single-barrier",),
    "theorem4-instances": None,
}


@dataclass
class Instance:
    index: int
    family: str
    seed: int
    params: dict
    density: Optional[Coefficient] = None
    problem: Optional[CoefficientSet] = None

    @property
    def spec(self) -> dict:
        return self.problem.to_spec() if self.problem is not None else self.density.to_spec()

    @property
    def provenance(self) -> dict:
        return {"family": self.family, "seed": self.seed, "index": self.index, "params": self.params}


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _breaks(rng, pieces):
    while True:
        b = np.sort(rng.uniform(0.05, 0.95, pieces - 1))
        if pieces == 1 or (np.diff(np.concatenate([[0.0], b, [1.0]])).min() > 0.02):
            return tuple(float(v) for v in b)


def _distinct(rng, k, lo, hi):
    while True:
        v = rng.uniform(lo, hi, k)
        s = np.sort(v)
        if k == 1 or np.diff(s).min() > 1e-3 * (hi - lo):
            return v


def _monotone_step(rng, lo=0.5, hi=8.0):
    k = int(rng.integers(2, 9))
    vals = np.sort(_distinct(rng, k, lo, hi))[::-1]
    return Step(_breaks(rng, k), tuple(vals)), {"pieces": k}


def _well_step(rng, lo=0.5, hi=8.0, barrier=False):
    k = int(rng.integers(3, 9))
    j = int(rng.integers(1, k - 1))           # index of the bottom piece, never at an end
    v = _distinct(rng, k, lo, hi)
    bottom = v.min() if not barrier else v.max()
    rest = np.sort(v[v != bottom])
    left = rng.choice(rest, size=j, replace=False)
    right = np.setdiff1d(rest, left)
    if barrier:
        vals = np.concatenate([np.sort(left), [bottom], np.sort(right)[::-1]])
    else:
        vals = np.concatenate([np.sort(left)[::-1], [bottom], np.sort(right)])
    return Step(_breaks(rng, k), tuple(vals)), {"pieces": k, "extremum_piece": j}


def _well_smooth(rng):
    kind = ["quadratic-well", "asym-well", "power-well", "gaussian-well", "tent"][int(rng.integers(5))]
    x0 = float(rng.uniform(0.1, 0.9))
    a = float(rng.uniform(0.5, 2.0))
    if kind == "quadratic-well":
        f = Family(kind, x0=x0, a=a, k=float(rng.uniform(0.5, 8.0)))
    elif kind == "asym-well":
        f = Family(kind, x0=x0, a=a, kl=float(rng.uniform(0.2, 10.0)), kr=float(rng.uniform(0.2, 10.0)))
    elif kind == "power-well":
        f = Family(kind, x0=x0, a=a, k=float(rng.uniform(0.5, 6.0)), power=float(rng.uniform(1.0, 4.0)))
    elif kind == "gaussian-well":
        depth = float(rng.uniform(0.2, 0.9)) * a
        f = Family(kind, x0=x0, a=a, k=depth, w=float(rng.uniform(0.1, 0.5)))
    else:
        f = Family("tent", x0=x0, a=a + 1.0, b=-float(rng.uniform(0.2, 0.9)) * (a + 1.0))
    return f, {"shape": kind}


def _symmetric_barrier(rng):
    kind = ["step", "sine", "quadratic-barrier", "tent"][int(rng.integers(4))]
    if kind == "step":
        k = int(rng.integers(2, 5))
        b = np.sort(rng.uniform(0.05, 0.45, k - 1))
        v = np.sort(_distinct(rng, k, 0.5, 8.0))
        breaks = tuple(b) + tuple(1.0 - b[::-1])
        vals = tuple(v) + tuple(v[::-1][1:])
        if np.isclose(b[-1], 0.5) or len(set(breaks)) != len(breaks):
            return _symmetric_barrier(rng)
        return Step(breaks, vals), {"shape": "step", "pieces": 2 * k - 1}
    a = float(rng.uniform(0.5, 2.0))
    if kind == "sine":
        return Family("sine", a=a, b=float(rng.uniform(0.2, 6.0))), {"shape": kind}
    if kind == "quadratic-barrier":
        k = float(rng.uniform(0.5, 3.5)) * a
        return Family(kind, x0=0.5, a=a + 0.25 * k, k=k * 0.99), {"shape": kind}
    return Family("tent", x0=0.5, a=a, b=float(rng.uniform(0.2, 6.0))), {"shape": kind}


def _potential_problem(rng, variant: str):
    """(p, q, rho) with p rho single-well at 1/2 and q a barrier (or q >= 0)."""
    def well_half():
        c = int(rng.integers(3))
        if c == 0:
            return constant(float(rng.uniform(0.5, 2.0)))
        if c == 1:
            return Family("quadratic-well", x0=0.5, a=float(rng.uniform(0.5, 2.0)),
                          k=float(rng.uniform(0.2, 4.0)))
        return Family("asym-well", x0=0.5, a=float(rng.uniform(0.5, 2.0)),
                      kl=float(rng.uniform(0.0, 6.0)), kr=float(rng.uniform(0.0, 6.0)))

    p, rho = well_half(), well_half()
    if variant == "barrier":
        c = int(rng.integers(3))
        x0 = float(rng.uniform(0.2, 0.8))
        if c == 0:
            q = Family("tent", x0=x0, a=float(rng.uniform(-2.0, 2.0)), b=float(rng.uniform(0.5, 8.0)),
                       positive=False)
        elif c == 1:
            q = Family("quadratic-barrier", x0=x0, a=float(rng.uniform(-1.0, 6.0)),
                       k=float(rng.uniform(0.5, 8.0)), positive=False)
        else:
            q = Family("sine", a=float(rng.uniform(-1.0, 3.0)), b=float(rng.uniform(0.5, 6.0)),
                       positive=False)
    else:
        c = int(rng.integers(3))
        if c == 0:
            q = Family("quadratic-well", x0=float(rng.uniform(0.1, 0.9)), a=float(rng.uniform(0.0, 2.0)),
                       k=float(rng.uniform(0.5, 8.0)), positive=False)
        elif c == 1:
            k = int(rng.integers(2, 6))
            q = Step(_breaks(rng, k), tuple(rng.uniform(0.0, 6.0, k)), positive=False)
        else:
            a = float(rng.uniform(0.5, 3.0))
            q = Family("gaussian-well", x0=float(rng.uniform(0.1, 0.9)), a=a,
                       k=a * float(rng.uniform(0.1, 1.0)), w=float(rng.uniform(0.1, 0.4)),
                       positive=False)
    return CoefficientSet(p, q, rho), {"variant": variant}


def _accept_potential(prob: CoefficientSet, variant: str, N: int = 1024) -> bool:
    qc = classify(prob.q, tolerance=1e-9)
    if variant == "barrier" and not qc.is_single_barrier:
        return False
    if variant == "nonnegative" and prob.q.extrema[0] < 0:
        return False
    if qc.kind == "constant" and prob.q.extrema[0] == 0:
        return False
    pr = transform.Product(((prob.p, 1.0), (prob.rho, 1.0)))
    if not transform.well_at(pr, 0.5, 1e-9):
        return False
    try:
        mus = [fd.oracle_eigenvalues(prob, BoundarySpec.neumann_half(h), 1, N)[0] for h in ("left", "right")]
        transform.solve_h(prob.p, prob.q, grid_points=256)
    except Exception:
        return False
    return min(mus) > 1e-6


def generate_family(spec: dict | str, seed: int, count: int) -> list[Instance]:
    """``count`` instances of the named family; deterministic in ``seed``.

    ``spec`` is a family name or ``{"name": ..., "variant": ...}``; the
    ``theorem4-instances`` family takes ``variant`` ``barrier`` (default) or
    ``nonnegative``.
    """
    if isinstance(spec, str):
        spec = {"name": spec}
    name = spec["name"]
    if name not in FAMILY_KINDS:
        raise DomainError(f"unknown family {name!r}; known: {sorted(FAMILY_KINDS)}")
    rng = np.random.default_rng(seed)
    out: list[Instance] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 200 * max(count, 1):
            raise RuntimeError(f"could not draw {count} valid {name} instances")
        if name == "constant":
            c = float(rng.uniform(0.5, 8.0))
            dens, params = constant(c), {"c": c}
        elif name == "monotone-step":
            dens, params = _monotone_step(rng)
        elif name == "single-well-step":
            dens, params = _well_step(rng)
        elif name == "single-barrier-step":
            dens, params = _well_step(rng, barrier=True)
        elif name == "single-well-smooth":
            dens, params = _well_smooth(rng)
        elif name == "symmetric-single-barrier":
            dens, params = _symmetric_barrier(rng)
        else:
            variant = spec.get("variant", "barrier")
            prob, params = _potential_problem(rng, variant)
            if not _accept_potential(prob, variant):
                continue
            out.append(Instance(len(out), name, seed, params, problem=prob))
            continue
        if classify(dens, tolerance=1e-12).kind not in FAMILY_KINDS[name]:
            continue
        out.append(Instance(len(out), name, seed, params, density=dens))
    return out


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------


@dataclass
class SuiteConfig:
    families: list = field(default_factory=lambda: [{"name": "constant", "count": 3, "seed": 0}])
    n_max: int = 8
    mesh: int = 8192
    tolerances: dict = field(default_factory=dict)
    prop1_nmax: int = 5
    workers: int = 1
    out: Optional[str] = None

    _TOL = {"bound": 1e-6, "equality": 1e-8, "cross": 1e-6, "exact": 1e-10,
            "prop1": 1e-8, "barrier": 1e-8, "ratio": 1e-5}

    def __post_init__(self):
        if self.n_max < 2:
            raise DomainError("n_max must be >= 2")
        self.tolerances = {**self._TOL, **(self.tolerances or {})}

    @classmethod
    def from_dict(cls, d: dict, **overrides) -> "SuiteConfig":
        d = dict(d)
        for k, v in overrides.items():
            if v is None:
                continue
            if k == "seed":
                d["families"] = [{**f, "seed": v} for f in d.get("families", [])]
            else:
                d[k] = v
        known = {k: d[k] for k in ("families", "n_max", "mesh", "tolerances", "prop1_nmax",
                                   "workers", "out") if k in d}
        return cls(**known)

    def to_dict(self) -> dict:
        return {"families": self.families, "n_max": self.n_max, "mesh": self.mesh,
                "tolerances": self.tolerances, "prop1_nmax": self.prop1_nmax}


ROW_COLUMNS = [
    "index", "family", "seed", "spec_hash", "kind", "x0", "status", "asserted", "passed",
    "worst_slack", "worst_pair", "oracle_deviation", "exact_deviation", "prop1_gap", "error",
]


@dataclass
class Report:
    header: dict
    rows: list
    summary: dict
    details: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.summary["failed"] == 0 and self.summary["quarantined"] == 0

    def lambda_columns(self) -> list[str]:
        n = self.header["config"]["n_max"]
        return [f"lambda_{k}" for k in range(1, n + 1)]

    def write(self, out: str | os.PathLike, stem: str = "report") -> dict:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        cols = ROW_COLUMNS + self.lambda_columns()
        paths = {"csv": out / f"{stem}.csv", "json": out / f"{stem}.json",
                 "long": out / f"{stem}_long.csv"}
        with open(paths["csv"], "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
            w.writeheader()
            for r in self.rows:
                w.writerow({k: _fmt(r.get(k)) for k in cols})
        with open(paths["long"], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "family", "quantity", "n", "m", "value"])
            for r in self.rows:
                for k, lam in enumerate(r.get("lambdas") or [], start=1):
                    w.writerow([r["index"], r["family"], "lambda", k, "", _fmt(lam)])
                for key, val in sorted((r.get("slacks") or {}).items(), key=_pair_key):
                    n, m = key.split(",")
                    w.writerow([r["index"], r["family"], "slack", n, m, _fmt(val)])
        payload = {"header": self.header, "summary": self.summary,
                   "rows": [_jsonable(r) for r in self.rows], "details": _jsonable(self.details)}
        paths["json"].write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return {k: str(v) for k, v in paths.items()}


def _pair_key(item):
    n, m = item[0].split(",")
    return int(n), int(m)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def slacks(lam) -> dict:
    """``(lambda_n / lambda_m)(m / n)^2 - 1`` for every ``m < n``."""
    lam = np.asarray(lam, dtype=float)
    return {f"{n},{m}": float(lam[n - 1] / lam[m - 1] * (m / n) ** 2 - 1.0)
            for n in range(2, lam.size + 1) for m in range(1, n)}


def _worst(sl: dict):
    if not sl:
        return math.nan, ""
    key = max(sl, key=lambda k: (sl[k], k))
    return sl[key], key


def prop1_gaps(rho: Coefficient, n_top: int) -> list[dict]:
    """``lambda_n/lambda_{n-1}`` for ``rho`` and for its step companion, ``n = 2..n_top``."""
    out = []
    for n in range(2, n_top + 1):
        cs = comparison.crossing_points(rho, n)
        L = comparison.build_step_companion(rho, cs)
        a = prufer.eigenvalue(rho, n).lam / prufer.eigenvalue(rho, n - 1).lam
        b = prufer.eigenvalue(L, n).lam / prufer.eigenvalue(L, n - 1).lam
        out.append({"n": n, "ratio_rho": a, "ratio_companion": b, "gap": a - b,
                    "structure": cs.check(), "companion": L.to_spec()})
    return out


def _density_row(inst: Instance, cfg: SuiteConfig) -> dict:
    tol = cfg.tolerances
    rho = inst.density
    cls = classify(rho)
    lam = prufer.eigenvalues(rho, cfg.n_max)
    ref = fd.oracle_eigenvalues(CoefficientSet(rho=rho), BoundarySpec(), cfg.n_max, cfg.mesh,
                                richardson=True)
    dev = float(np.max(np.abs(lam / ref - 1.0)))
    exact_dev = None
    if isinstance(rho, Step):
        ex = stepexact.exact_eigenvalues(rho, cfg.n_max)
        exact_dev = float(np.max(np.abs(lam / ex - 1.0)))
    sl = slacks(lam)
    worst, pair = _worst(sl)
    row = {"kind": cls.kind, "x0": cls.x0, "lambdas": lam.tolist(), "slacks": sl,
           "worst_slack": worst, "worst_pair": pair, "oracle_deviation": dev,
           "exact_deviation": exact_dev}
    checks = {"cross": dev <= tol["cross"]}
    if exact_dev is not None:
        checks["exact"] = exact_dev <= tol["exact"]
    if cls.kind == "constant":
        checks["equality"] = max(abs(v) for v in sl.values()) <= tol["equality"]
        asserted = "equality"
    elif cls.is_single_well:
        checks["bound"] = worst <= tol["bound"]
        asserted = "bound"
    elif inst.family == "symmetric-single-barrier":
        checks["barrier"] = bool(lam[1] / lam[0] >= 4.0 - tol["barrier"])
        asserted = "lambda2/lambda1>=4"
    else:
        asserted = "none"
    if cls.kind == "decreasing":
        gaps = prop1_gaps(rho, min(cfg.prop1_nmax, cfg.n_max))
        row["prop1"] = gaps
        row["prop1_gap"] = max(g["gap"] for g in gaps)
        checks["prop1"] = row["prop1_gap"] <= tol["prop1"]
        asserted += "+prop1"
    row["checks"] = checks
    row["asserted"] = asserted
    row["passed"] = all(checks.values())
    return row


def _problem_row(inst: Instance, cfg: SuiteConfig) -> dict:
    n_max = min(cfg.n_max, 6) if cfg.n_max > 6 else cfg.n_max
    _, verdict = transform.full_pipeline(inst.problem, n_max=n_max, N=min(cfg.mesh, 4096),
                                         bound_tol=cfg.tolerances["bound"],
                                         ratio_tol=cfg.tolerances["ratio"])
    dens = verdict.get("density_classification") or {}
    sl = verdict.get("bound_slack", {})
    worst, pair = _worst(sl)
    lam = verdict.get("lambda_source")
    ref = verdict.get("lambda_string")
    return {"kind": dens.get("kind"), "x0": dens.get("x0"), "lambdas": lam, "slacks": sl,
            "worst_slack": worst, "worst_pair": pair,
            "oracle_deviation": verdict.get("ratio_invariance_error"), "exact_deviation": None,
            "checks": {**verdict.get("checks", {}), "applicable": verdict["hypotheses"]["applicable"]},
            "asserted": "pipeline", "passed": verdict["passed"], "verdict": verdict,
            "lambda_string": ref}


def _run_one(args) -> dict:
    inst, cfg = args
    base = {"index": inst.index, "family": inst.family, "seed": inst.seed,
            "spec_hash": spec_hash(inst.spec), "spec": inst.spec, "provenance": inst.provenance}
    try:
        row = _problem_row(inst, cfg) if inst.problem is not None else _density_row(inst, cfg)
        row["status"] = "ok"
    except Exception as exc:  # quarantine
        row = {"status": "quarantined", "passed": False, "asserted": "none",
               "error": f"{type(exc).__name__}: {exc}",
               "trace": traceback.format_exc(limit=3)}
    base.update(row)
    for k, lam in enumerate(base.get("lambdas") or [], start=1):
        base[f"lambda_{k}"] = lam
    return base


def _instances(cfg: SuiteConfig) -> list[Instance]:
    out = []
    for fam in cfg.families:
        batch = generate_family(fam, int(fam.get("seed", 0)), int(fam.get("count", 1)))
        out.extend(batch)
    return out


def _execute(jobs, workers: int) -> list[dict]:
    if workers <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def _header(cfg: SuiteConfig, command: str) -> dict:
    return {"command": command, "generated": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "config": cfg.to_dict()}


def _summary(rows: list[dict]) -> dict:
    ok = [r for r in rows if r["status"] == "ok"]
    finite = [r for r in ok if isinstance(r.get("worst_slack"), float) and math.isfinite(r["worst_slack"])]
    ext = max(finite, key=lambda r: r["worst_slack"]) if finite else None
    by_family: dict = {}
    for r in rows:
        f = by_family.setdefault(r["family"], {"count": 0, "passed": 0, "failed": 0, "quarantined": 0})
        f["count"] += 1
        key = "quarantined" if r["status"] != "ok" else ("passed" if r["passed"] else "failed")
        f[key] += 1
    return {
        "count": len(rows),
        "passed": sum(1 for r in ok if r["passed"]),
        "failed": sum(1 for r in ok if not r["passed"]),
        "quarantined": len(rows) - len(ok),
        "by_family": by_family,
        "extremal": None if ext is None else {"index": ext["index"], "family": ext["family"],
                                              "worst_slack": ext["worst_slack"],
                                              "worst_pair": ext["worst_pair"],
                                              "spec_hash": ext["spec_hash"]},
    }


def run_suite(cfg: SuiteConfig | dict) -> Report:
    """Spectra, cross-validation, bound slack and comparison checks for every instance."""
    if isinstance(cfg, dict):
        cfg = SuiteConfig.from_dict(cfg)
    rows = _execute([(i, cfg) for i in _instances(cfg)], cfg.workers)
    for k, r in enumerate(rows):
        r["index"] = k
    return Report(_header(cfg, "verify-bound"), rows, _summary(rows))


def _barrier_row(args) -> dict:
    inst, cfg = args
    base = {"index": inst.index, "family": inst.family, "seed": inst.seed,
            "spec_hash": spec_hash(inst.spec), "spec": inst.spec, "provenance": inst.provenance,
            "asserted": "none"}
    try:
        rho = inst.density
        cls = classify(rho)
        lam = prufer.eigenvalues(rho, cfg.n_max)
        ref = fd.oracle_eigenvalues(CoefficientSet(rho=rho), BoundarySpec(), cfg.n_max, cfg.mesh,
                                    richardson=True)
        sl = slacks(lam)
        worst, pair = _worst(sl)
        comp = prop1_gaps(rho, min(cfg.prop1_nmax, cfg.n_max))
        for g in comp:
            g["direction"] = ("companion-below" if g["gap"] > 1e-12 else
                              "companion-above" if g["gap"] < -1e-12 else "equal")
        base.update({"status": "ok", "kind": cls.kind, "x0": cls.x0, "lambdas": lam.tolist(),
                     "slacks": sl, "worst_slack": worst, "worst_pair": pair,
                     "oracle_deviation": float(np.max(np.abs(lam / ref - 1.0))),
                     "prop1": comp, "prop1_gap": max(g["gap"] for g in comp),
                     "companion": "step companion built from the tau=1 crossings (homotopy endpoint)",
                     "slack_signs": {"positive": sum(v > 1e-12 for v in sl.values()),
                                     "negative": sum(v < -1e-12 for v in sl.values()),
                                     "zero": sum(abs(v) <= 1e-12 for v in sl.values())},
                     "passed": True})
    except Exception as exc:
        base.update({"status": "quarantined", "passed": False,
                     "error": f"{type(exc).__name__}: {exc}"})
    for k, lam in enumerate(base.get("lambdas") or [], start=1):
        base[f"lambda_{k}"] = lam
    return base


def _execute_barrier(jobs, workers):
    if workers <= 1:
        return [_barrier_row(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_barrier_row, jobs))


def explore_barrier(cfg: SuiteConfig | dict) -> Report:
    """Observation only: companion comparison direction and bound slack for barrier densities."""
    if isinstance(cfg, dict):
        cfg = SuiteConfig.from_dict(cfg)
    insts = [i for i in _instances(cfg) if i.density is not None]
    rows = _execute_barrier([(i, cfg) for i in insts], cfg.workers)
    for k, r in enumerate(rows):
        r["index"] = k
    summary = _summary(rows)
    dirs: dict = {}
    for r in rows:
        for g in r.get("prop1", []):
            dirs[g["direction"]] = dirs.get(g["direction"], 0) + 1
    summary["companion_directions"] = dict(sorted(dirs.items()))
    return Report(_header(cfg, "explore-barrier"), rows, summary)
