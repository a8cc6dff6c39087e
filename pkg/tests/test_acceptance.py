"""Acceptance criteria 1-11, one test each.

Every test records a one-line verdict (printed in the terminal summary) before
asserting, so a failing criterion still reports the measured numbers.
"""

import math

import numpy as np
import pytest

from eigenratio import comparison, fd, prufer, stepexact, suite, transform
from eigenratio.coefficients import Combination, Step, constant
from eigenratio.core import BoundarySpec, CoefficientSet, StructureError

from families import decreasing_smooth, symmetric_wells

PI = math.pi
SEED = 20240601


def _max_rel(a, b):
    return float(np.max(np.abs(np.asarray(a) / np.asarray(b) - 1.0)))


# -- shared instance sets --------------------------------------------------------

@pytest.fixture(scope="module")
def decreasing_set():
    """50 decreasing densities: 30 random steps and 20 smooth profiles."""
    steps = [i.density for i in suite.generate_family("monotone-step", SEED, 30)]
    return steps + decreasing_smooth(SEED, 20)


@pytest.fixture(scope="module")
def companions(decreasing_set):
    """(density index, n, CrossingSet or exception, companion) for n = 2..5."""
    out = []
    for k, rho in enumerate(decreasing_set):
        for n in range(2, 6):
            try:
                cs = comparison.crossing_points(rho, n)
                out.append((k, n, cs, comparison.build_step_companion(rho, cs)))
            except StructureError as exc:
                out.append((k, n, exc, None))
    return out


@pytest.fixture(scope="module")
def potential_set():
    barrier = suite.generate_family({"name": "theorem4-instances", "variant": "barrier"}, SEED, 20)
    nonneg = suite.generate_family({"name": "theorem4-instances", "variant": "nonnegative"}, SEED, 20)
    return [i.problem for i in barrier], [i.problem for i in nonneg]


# -- 1 -----------------------------------------------------------------------------

def test_criterion_01_constant_exactness(record):
    exact = (np.arange(1, 11) * PI) ** 2
    e_pr = _max_rel(prufer.eigenvalues(constant(1.0), 10), exact)
    e_ex = _max_rel(stepexact.exact_eigenvalues(Step((), (1.0,)), 10), exact)
    e_fd = _max_rel(fd.oracle_eigenvalues(CoefficientSet(), BoundarySpec(), 10, 4096,
                                          richardson=True), exact)
    ok = e_pr <= 1e-8 and e_ex <= 1e-8 and e_fd <= 1e-7
    record(1, ok, f"rel err prufer {e_pr:.1e}, step-exact {e_ex:.1e}, fd+Richardson {e_fd:.1e}")
    assert ok


# -- 2 -----------------------------------------------------------------------------

def test_criterion_02_cross_validation(record):
    insts = suite.generate_family("monotone-step", SEED + 2, 50)
    w_ex = w_fd = 0.0
    pieces = set()
    for inst in insts:
        rho = inst.density
        pieces.add(len(rho.values))
        lam = prufer.eigenvalues(rho, 8)
        w_ex = max(w_ex, _max_rel(lam, stepexact.exact_eigenvalues(rho, 8)))
        ref = fd.oracle_eigenvalues(CoefficientSet(rho=rho), BoundarySpec(), 8, 8192, richardson=True)
        w_fd = max(w_fd, _max_rel(lam, ref))
    ok = w_ex <= 1e-10 and w_fd <= 1e-6
    record(2, ok, f"50 decreasing steps ({min(pieces)}-{max(pieces)} pieces), n<=8: "
                  f"vs step-exact {w_ex:.1e}, vs fd {w_fd:.1e}")
    assert ok


# -- 3 -----------------------------------------------------------------------------

def test_criterion_03_single_well_bound(record):
    wells = (suite.generate_family("single-well-step", SEED + 3, 100)
             + suite.generate_family("single-well-smooth", SEED + 3, 100))
    consts = suite.generate_family("constant", SEED + 3, 5)
    worst, worst_spec, violations = -np.inf, None, 0
    strict = True
    for inst in wells:
        sl = suite.slacks(prufer.eigenvalues(inst.density, 8))
        w = max(sl.values())
        violations += w > 1e-6
        strict &= min(abs(v) for v in sl.values()) > 1e-8
        if w > worst:
            worst, worst_spec = w, inst.spec
    eq = max(max(abs(v) for v in suite.slacks(prufer.eigenvalues(i.density, 8)).values())
             for i in consts)
    ok = worst <= 1e-6 and eq <= 1e-8 and strict
    record(3, ok, f"{violations}/200 single-well densities exceed (n/m)^2 (worst slack "
                  f"{worst:.3e}); constants |slack| <= {eq:.1e}; nonconstant strict: {strict}")
    assert ok, f"worst instance {worst_spec}"


# -- 4, 5 --------------------------------------------------------------------------

def test_criterion_04_companion_inequality(record, decreasing_set, companions):
    worst, failures, errors = -np.inf, 0, 0
    for k, n, cs, L in companions:
        if L is None:
            errors += 1
            continue
        rho = decreasing_set[k]
        a = prufer.eigenvalue(rho, n).lam / prufer.eigenvalue(rho, n - 1).lam
        b = prufer.eigenvalue(L, n).lam / prufer.eigenvalue(L, n - 1).lam
        worst = max(worst, a - b)
        failures += a > b + 1e-8
    ok = failures == 0 and errors == 0
    record(4, ok, f"{len(companions)} (density, n) pairs, n<=5: max ratio(rho) - ratio(L) = "
                  f"{worst:.3e}; {failures} above 1e-8; {errors} structure errors")
    assert ok


def test_criterion_05_homotopy_monotonicity(record, decreasing_set, companions):
    d_max, i_max = -np.inf, -np.inf
    bad_d = bad_i = 0
    example = None
    for k, n, cs, L in companions:
        if L is None:
            continue
        curve = comparison.homotopy_sweep(decreasing_set[k], L, n, n - 1, 21, fd_eps=None,
                                          crossings=cs)
        dm = float(curve.d_formula.max())
        im = max(float(np.max(v)) for v in curve.integrals_fixed)
        bad_d += dm > 1e-8
        bad_i += im > 1e-10
        if dm > d_max:
            d_max, example = dm, (k, n)
        i_max = max(i_max, im)
    ok = bad_d == 0 and bad_i == 0
    record(5, ok, f"{len(companions)} sweeps x 21 tau: {bad_d} with d/dtau ratio > 1e-8 "
                  f"(max {d_max:.3e} at density {example[0]}, n={example[1]}); {bad_i} with a "
                  f"group integral > 1e-10 (max {i_max:.3e})")
    assert ok


# -- 6 -----------------------------------------------------------------------------

def test_criterion_06_derivative_consistency(record, decreasing_set, companions):
    eps = 1e-5
    worst_ratio = worst_keller = 0.0
    used = [(k, n, cs, L) for k, n, cs, L in companions if n == 2 and L is not None][:20]
    for k, n, cs, L in used:
        rho = decreasing_set[k]
        h = comparison.Homotopy(rho, L)
        d = comparison.ratio_derivative(h, n, n - 1, 0.5)
        up, dn = h.at(0.5 + eps), h.at(0.5 - eps)
        fd_r = (prufer.eigenvalue(up, n).lam / prufer.eigenvalue(up, n - 1).lam
                - prufer.eigenvalue(dn, n).lam / prufer.eigenvalue(dn, n - 1).lam) / (2 * eps)
        worst_ratio = max(worst_ratio, abs(d / fd_r - 1))
        delta = Combination(((1.0, rho), (-1.0, L)), positive=False)
        kel = comparison.keller_sensitivity(h.at(0.5), n, delta)
        fd_k = (prufer.eigenvalue(up, n).lam - prufer.eigenvalue(dn, n).lam) / (2 * eps)
        worst_keller = max(worst_keller, abs(kel / fd_k - 1))
    ok = len(used) == 20 and worst_ratio <= 1e-4 and worst_keller <= 1e-4
    record(6, ok, f"{len(used)} instances at tau=0.5: ratio formula vs FD rel {worst_ratio:.1e}, "
                  f"eigenvalue derivative vs FD rel {worst_keller:.1e}")
    assert ok


# -- 7 -----------------------------------------------------------------------------

def test_criterion_07_theta_dot(record):
    dens = ([i.density for i in suite.generate_family("monotone-step", SEED + 7, 10)]
            + [i.density for i in suite.generate_family("single-well-step", SEED + 7, 10)])
    xs = np.linspace(0.05, 1.0, 20)
    worst, n_neg = np.inf, 0
    for rho in dens:
        zmax = 8 * PI / math.sqrt(rho.extrema[0])
        lo = float(np.min(theta_grid(rho, xs, np.linspace(0.5, zmax, 20))))
        worst = min(worst, lo)
        n_neg += lo < -1e-10
    rel = 0.0
    for rho in decreasing_smooth(SEED + 7, 4) + symmetric_wells(SEED + 7, 4)[:2]:
        if isinstance(rho, Step):
            continue
        for z in (2.0, 6.0, 15.0):
            for x in (0.4, 1.0):
                ref = _theta_fd(rho, z, x)
                rel = max(rel, abs(prufer.theta_dot(rho, z, x) / ref - 1))
    ok = n_neg == 0 and rel <= 1e-6
    record(7, ok, f"{n_neg}/20 step densities with theta_dot < -1e-10 on the 20x20 grid "
                  f"(min {worst:.3e}); smooth formula vs FD rel {rel:.1e}")
    assert ok


def theta_grid(rho, xs, zs):
    return np.array([[prufer.theta_dot(rho, z, x) for x in xs] for z in zs])


def _theta_fd(rho, z, x, eps=1e-3):
    t = [prufer.theta(rho, z + j * eps, x) for j in (-2, -1, 1, 2)]
    return (t[0] - 8 * t[1] + 8 * t[2] - t[3]) / (12 * eps)


# -- 8 -----------------------------------------------------------------------------

def test_criterion_08_eigenfunction_structure(record, companions):
    tally = {"zero_count": 0, "interlacing": 0, "crossing_membership": 0,
             "ratio_decreasing": 0, "wronskian_negative": 0}
    errors = 0
    for k, n, cs, L in companions:
        if L is None:
            errors += 1
            continue
        for key, val in cs.check().items():
            tally[key] += not val
    ok = errors == 0 and not any(tally.values())
    fails = ", ".join(f"{k} {v}" for k, v in tally.items())
    record(8, ok, f"{len(companions)} pairs; failures: {fails}; structure errors {errors}")
    assert ok


# -- 9 -----------------------------------------------------------------------------

def test_criterion_09_symmetric_anchors(record):
    wells = symmetric_wells(SEED + 9, 20)
    w21, wn1 = -np.inf, -np.inf
    for rho in wells:
        lam = prufer.eigenvalues(rho, 8)
        w21 = max(w21, lam[1] / lam[0] - 4)
        wn1 = max(wn1, max(lam[n - 1] / lam[0] - n * n for n in range(2, 9)))
    bars = suite.generate_family("symmetric-single-barrier", SEED + 9, 20)
    b21 = min(prufer.eigenvalues(i.density, 2)[1] / prufer.eigenvalues(i.density, 1)[0]
              for i in bars)
    ok = w21 <= 1e-8 and wn1 <= 1e-8 and b21 >= 4 - 1e-8
    record(9, ok, f"20 symmetric wells: max lambda2/lambda1 - 4 = {w21:.3e}, max lambda_n/lambda_1 "
                  f"- n^2 = {wn1:.3e}; 20 symmetric barriers: min lambda2/lambda1 = {b21:.6f}")
    assert ok


# -- 10 ----------------------------------------------------------------------------

def _pipeline_tally(problems):
    t = {"hypotheses": 0, "h_well": 0, "density_well": 0, "invariance": 0, "bound": 0}
    inv, slack = 0.0, -np.inf
    for prob in problems:
        _, v = transform.full_pipeline(prob, n_max=6)
        t["hypotheses"] += not v["hypotheses"]["applicable"]
        if "error" in v:
            continue
        t["h_well"] += not v["h_single_well"]
        t["density_well"] += not v["density_single_well"]
        t["invariance"] += v["ratio_invariance_error"] > 1e-5
        t["bound"] += v["worst_slack"] > 1e-6
        inv = max(inv, v["ratio_invariance_error"])
        slack = max(slack, v["worst_slack"])
    return t, inv, slack


def test_criterion_10_pipeline(record, potential_set):
    barrier, nonneg = potential_set
    tb, ib, sb = _pipeline_tally(barrier)
    tn, inn, sn = _pipeline_tally(nonneg)
    ok = not any(tb.values()) and not any(tn.values())

    def fmt(t):
        return ", ".join(f"{k} {v}" for k, v in t.items())

    record(10, ok, f"barrier q: failures [{fmt(tb)}], invariance {ib:.1e}, worst slack {sb:.3e}; "
                   f"q>=0: failures [{fmt(tn)}], invariance {inn:.1e}, worst slack {sn:.3e}")
    assert ok


# -- 11 ----------------------------------------------------------------------------

def test_criterion_11_F_monotone(record, potential_set):
    barrier, _ = potential_set
    worst = 0.0
    for prob in barrier:
        for e, which, half, sign in ((0, "hat", "left", 1.0), (1, "tilde", "right", -1.0)):
            eta = transform.mixed_first(prob.p, prob.q, prob.rho, which)
            mu = transform.neumann_first(prob.p, prob.q, prob.rho, half)
            lo = min(mu, 0.0) - (eta - mu)
            lams = np.linspace(lo, eta, 101)[:-1]
            F = np.array([transform.F_eval(prob.p, prob.q, prob.rho, lam, e) for lam in lams])
            drop = -sign * np.diff(F) / np.maximum(1.0, np.abs(F[1:]))
            worst = max(worst, float(drop.max()))
    ok = worst <= 1e-9
    record(11, ok, f"20 instances x 2 endpoints x 100 lambda: largest monotonicity violation "
                   f"{max(worst, 0.0):.1e}")
    assert ok
