"""Property-based checks over random step densities and smooth families."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from eigenratio import fd, prufer, stepexact
from eigenratio.classify import classify
from eigenratio.coefficients import Family, Step
from eigenratio.core import BoundarySpec, CoefficientSet

SETTINGS = settings(max_examples=25, deadline=None,
                    suppress_health_check=[HealthCheck.too_slow])


@st.composite
def steps(draw, max_pieces=6):
    k = draw(st.integers(1, max_pieces))
    cuts = draw(st.lists(st.floats(0.02, 0.98), min_size=k - 1, max_size=k - 1, unique=True))
    cuts = sorted(cuts)
    if any(b - a < 0.01 for a, b in zip([0.0] + cuts, cuts + [1.0])):
        cuts = list(np.linspace(0, 1, k + 1)[1:-1])
    vals = draw(st.lists(st.floats(0.5, 8.0), min_size=k, max_size=k))
    return Step(tuple(cuts), tuple(vals))


@st.composite
def wells(draw):
    x0 = draw(st.floats(0.1, 0.9))
    a = draw(st.floats(0.5, 3.0))
    if draw(st.booleans()):
        return Family("quadratic-well", x0=x0, a=a, k=draw(st.floats(0.2, 8.0)))
    return Family("asym-well", x0=x0, a=a, kl=draw(st.floats(0.2, 8.0)), kr=draw(st.floats(0.2, 8.0)))


@SETTINGS
@given(steps(), st.sampled_from([0.5, 2.0, 10.0]))
def test_scaling_law(rho, c):
    base = stepexact.exact_eigenvalues(rho, 4)
    scaled = stepexact.exact_eigenvalues(Step(rho.breaks, tuple(c * v for v in rho.values)), 4)
    np.testing.assert_allclose(scaled, base / c, rtol=1e-12)


@SETTINGS
@given(steps())
def test_shooting_matches_transfer_matrix(rho):
    np.testing.assert_allclose(prufer.eigenvalues(rho, 5), stepexact.exact_eigenvalues(rho, 5),
                               rtol=1e-10)


@SETTINGS
@given(steps())
def test_reflection_invariance(rho):
    np.testing.assert_allclose(stepexact.exact_eigenvalues(rho.reflect(), 4),
                               stepexact.exact_eigenvalues(rho, 4), rtol=1e-11)


@SETTINGS
@given(wells())
def test_reflection_invariance_smooth(rho):
    np.testing.assert_allclose(prufer.eigenvalues(rho.reflect(), 3), prufer.eigenvalues(rho, 3),
                               rtol=1e-10)


@SETTINGS
@given(wells())
def test_classify_mirror(rho):
    a, b = classify(rho), classify(rho.reflect())
    assert a.kind == b.kind == "single-well"
    assert b.x0 == pytest.approx(1 - a.x0, abs=1e-9)


@SETTINGS
@given(steps())
def test_classify_mirror_steps(rho):
    a, b = classify(rho).kind, classify(rho.reflect()).kind
    swap = {"increasing": "decreasing", "decreasing": "increasing"}
    assert b == swap.get(a, a)


@SETTINGS
@given(steps(max_pieces=4), st.lists(st.floats(0.0, 2000.0), min_size=2, max_size=12))
def test_sturm_count_monotone(rho, lams):
    mp = fd.assemble(CoefficientSet(rho=rho), BoundarySpec(), 64)
    d, e = mp.standard_form()
    counts = [fd.sturm_count(d, e, lam) for lam in sorted(lams)]
    assert counts == sorted(counts)


@SETTINGS
@given(steps())
def test_zero_count_brackets_eigenvalues(rho):
    lam = stepexact.exact_eigenvalues(rho, 4)
    for n, v in enumerate(lam, start=1):
        assert stepexact.zero_count(rho, v * (1 - 1e-8)) == n - 1
        assert stepexact.zero_count(rho, v * (1 + 1e-8)) == n


@SETTINGS
@given(steps(max_pieces=4))
def test_eigenfunction_zeros_interlace(rho):
    z = [prufer.eigenfunction(rho, n).zeros for n in (2, 3, 4)]
    for lo, hi in zip(z, z[1:]):
        assert hi.size == lo.size + 1
        merged = np.empty(lo.size + hi.size)
        merged[0::2], merged[1::2] = hi, lo
        assert np.all(np.diff(merged) > 0)


@SETTINGS
@given(st.lists(st.floats(1.0, 1e4), min_size=2, max_size=8, unique=True))
def test_slack_zero_iff_quadratic(values):
    from eigenratio.suite import slacks
    lam = np.sort(values)
    sl = slacks(lam)
    for key, v in sl.items():
        n, m = map(int, key.split(","))
        assert v == pytest.approx(lam[n - 1] / lam[m - 1] * (m / n) ** 2 - 1)
    quad = slacks([(k * 1.7) ** 2 for k in range(1, len(values) + 1)])
    assert max(abs(v) for v in quad.values()) < 1e-12
