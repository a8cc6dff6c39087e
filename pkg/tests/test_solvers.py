"""Prufer shooting, transfer-matrix and finite-difference solvers against each other."""

import csv
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from eigenratio import fd, prufer, stepexact
from eigenratio.coefficients import DomainError, Family, Step, constant
from eigenratio.core import BoundarySpec, CoefficientSet, SolverError

PI = math.pi
STEP41 = Step((0.5,), (4.0, 1.0))


# -- Prufer ------------------------------------------------------------------

@pytest.mark.parametrize("rho, z, expected", [
    (constant(1.0), PI, PI),
    (constant(4.0), PI / 2, PI),
])
def test_phase_closed_forms(rho, z, expected):
    assert prufer.prufer_integrate(rho, z).phi == pytest.approx(expected, rel=1e-12)


def test_phase_matches_transfer_matrix_on_step():
    z = 2.0
    end = prufer.prufer_integrate(STEP41, z)
    # rebuild (y, y') from the phase-amplitude pair and compare with the transfer matrix
    y = end.r / z * STEP41(1.0) ** -0.25 * math.sin(end.phi)
    dy = end.r * STEP41(1.0) ** 0.25 * math.cos(end.phi)
    ref = stepexact.propagate(STEP41, z * z)
    # both start from y'(0) scaled by rho(0)^(1/4)
    s = STEP41(0.0) ** 0.25
    assert y == pytest.approx(ref[0] * s, rel=1e-10)
    assert dy == pytest.approx(ref[1] * s, rel=1e-10)


def test_nonpositive_z_rejected():
    with pytest.raises(DomainError):
        prufer.prufer_integrate(constant(1.0), 0.0)
    with pytest.raises(DomainError):
        prufer.eigenvalue(constant(1.0), 0)


def test_eigenvalue_examples():
    assert prufer.eigenvalue(constant(1.0), 3).lam == pytest.approx(9 * PI**2, rel=1e-8)
    assert prufer.eigenvalue(constant(4.0), 1).lam == pytest.approx(PI**2 / 4, rel=1e-10)
    rho = Family("quadratic-well", x0=0.5, a=1.0, k=1.0)
    lam = prufer.eigenvalues(rho, 2)
    ref = fd.oracle_eigenvalues(CoefficientSet(rho=rho), n_max=2, N=4096, richardson=True)
    np.testing.assert_allclose(lam, ref, rtol=1e-8)
    assert lam[1] / lam[0] <= 4.0


def test_shooting_result_fields():
    res = prufer.eigenvalue(STEP41, 2)
    assert res.residual <= 1e-12
    assert res.theta == pytest.approx(2 * PI / res.z)
    assert res.iterations >= 1


def test_eigenfunction_constant():
    x = np.linspace(0, 1, 101)
    sol = prufer.eigenfunction(constant(1.0), 2, x)
    np.testing.assert_allclose(sol.u, math.sqrt(2) * np.sin(2 * PI * x), atol=1e-9)
    np.testing.assert_allclose(sol.zeros, [0.5], atol=1e-12)
    assert sol.normalization == pytest.approx(1.0, rel=1e-10)
    sol4 = prufer.eigenfunction(constant(1.0), 4)
    np.testing.assert_allclose(sol4.zeros, [0.25, 0.5, 0.75], atol=1e-12)


def test_eigenfunction_step_zero_left_of_jump():
    sol = prufer.eigenfunction(STEP41, 2)
    assert sol.zeros.size == 1 and sol.zeros[0] < 0.5
    _, xs, u = fd.oracle_eigenpair(CoefficientSet(rho=STEP41), 2, N=8192)
    change = xs[np.nonzero(np.diff(np.sign(u)))[0][0]]
    assert sol.zeros[0] == pytest.approx(change, abs=2e-4)


def test_eigenfunction_matches_fd_vector():
    rho = Family("linear", a=2.0, b=-1.0)
    sol = prufer.eigenfunction(rho, 3)
    _, xs, u = fd.oracle_eigenpair(CoefficientSet(rho=rho), 3, N=4096)
    u /= math.sqrt(trapezoid(rho(xs) * u * u, xs))
    np.testing.assert_allclose(sol.evaluate(xs), u, atol=1e-5)


def test_trail_csv(tmp_path):
    _, trail = prufer.prufer_integrate(STEP41, 3.0, grid=np.linspace(0, 1, 11))
    path = tmp_path / "trail.csv"
    trail.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["x", "phi", "log_r"]
    assert len(rows) == 12
    assert float(rows[-1][1]) == pytest.approx(prufer.prufer_integrate(STEP41, 3.0).phi)


def test_phase_increasing_in_z():
    zs = np.linspace(0.5, 30, 40)
    phis = [prufer.prufer_integrate(STEP41, z).phi for z in zs]
    assert np.all(np.diff(phis) > 0)


# -- theta_dot ---------------------------------------------------------------

def _fd_theta(rho, z, x=1.0, eps=1e-4):
    # fourth-order central difference
    t = [prufer.theta(rho, z + k * eps, x) for k in (-2, -1, 1, 2)]
    return (t[0] - 8 * t[1] + 8 * t[2] - t[3]) / (12 * eps)


def test_theta_dot_constant_is_zero():
    for z in (1.0, 3.0, 10.0):
        assert abs(prufer.theta_dot(constant(1.0), z)) < 1e-12


@pytest.mark.parametrize("rho, z", [
    (Family("linear", a=2.0, b=-1.0), 5.0),
    (Family("quadratic-well", x0=0.3, a=1.0, k=3.0), 7.0),
    (Family("exponential", a=2.0, b=-2.0), 4.0),
])
def test_theta_dot_matches_difference_quotient(rho, z):
    ref = _fd_theta(rho, z)
    assert prufer.theta_dot(rho, z) == pytest.approx(ref, rel=1e-6)
    assert prufer.theta_dot_variational(rho, z) == pytest.approx(ref, rel=1e-6)


def test_theta_dot_step_matches_difference_quotient():
    for z, x in [(3.0, 1.0), (2 * PI, 0.75), (5.0, 0.3)]:
        ref = _fd_theta(STEP41, z, x)
        assert prufer.theta_dot(STEP41, z, x) == pytest.approx(ref, rel=1e-6, abs=1e-10)


def test_theta_dot_negative_on_decreasing_step():
    # closed form: -1/(4 pi) at z = 2 pi, x = 3/4
    assert prufer.theta_dot(STEP41, 2 * PI, 0.75) == pytest.approx(-1 / (4 * PI), rel=1e-9)


def test_theta_dot_rejects_outside():
    with pytest.raises(DomainError):
        prufer.theta_dot(STEP41, 2.0, 1.5)


# -- step-exact ----------------------------------------------------------------

def test_characteristic_examples():
    one = Step((), (1.0,))
    assert abs(stepexact.characteristic(one, PI**2)) < 1e-15
    assert stepexact.characteristic(one, (PI / 2) ** 2) == pytest.approx(2 / PI, rel=1e-14)
    with pytest.raises(DomainError):
        stepexact.characteristic(one, 0.0)


def test_transfer_matrix_unimodular():
    for r, l, lam in [(4.0, 0.5, 3.0), (1.0, 1e-9, 100.0), (8.0, 0.3, 1e4)]:
        assert np.linalg.det(stepexact.transfer_matrix(r, l, lam)) == pytest.approx(1.0, abs=1e-12)


def test_exact_eigenvalues_examples():
    np.testing.assert_allclose(stepexact.exact_eigenvalues(Step((), (1.0,)), 2),
                               [PI**2, 4 * PI**2], rtol=1e-13)
    np.testing.assert_allclose(stepexact.exact_eigenvalues(Step((0.5,), (1.0, 1.0)), 5),
                               (np.arange(1, 6) * PI) ** 2, rtol=1e-13)
    ex = stepexact.exact_eigenvalues(STEP41, 4)
    ref = fd.oracle_eigenvalues(CoefficientSet(rho=STEP41), n_max=4, N=8192)
    np.testing.assert_allclose(ex, ref, rtol=1e-5)
    np.testing.assert_allclose(ex, prufer.eigenvalues(STEP41, 4), rtol=1e-10)
    assert abs(stepexact.characteristic(STEP41, ex[0])) < 1e-10


def test_decreasing_step_can_exceed_quadratic_ratio():
    # a heavy left piece pushes lambda_2 / lambda_1 above 4
    ex = stepexact.exact_eigenvalues(STEP41, 2)
    assert ex[1] / ex[0] == pytest.approx(5.2369, abs=1e-3)


def test_zero_count_matches_index():
    ex = stepexact.exact_eigenvalues(Step((0.2, 0.7), (3.0, 0.6, 5.0)), 6)
    for n, lam in enumerate(ex, start=1):
        assert stepexact.zero_count(Step((0.2, 0.7), (3.0, 0.6, 5.0)), lam * (1 + 1e-9)) == n
        assert stepexact.zero_count(Step((0.2, 0.7), (3.0, 0.6, 5.0)), lam * (1 - 1e-9)) == n - 1


def test_exact_needs_step():
    with pytest.raises(DomainError):
        stepexact.exact_eigenvalues(constant(1.0), 2)


# -- finite differences ------------------------------------------------------

UNIT = CoefficientSet()


def test_fd_constant_examples():
    lam = fd.oracle_eigenvalues(UNIT, BoundarySpec(), 3, 4096)
    np.testing.assert_allclose(lam, (np.arange(1, 4) * PI) ** 2, rtol=1e-5)
    lam = fd.oracle_eigenvalues(UNIT, BoundarySpec(), 3, 4096, richardson=True)
    np.testing.assert_allclose(lam, (np.arange(1, 4) * PI) ** 2, rtol=1e-8)


@pytest.mark.parametrize("bc", [BoundarySpec.hat(), BoundarySpec.tilde()])
def test_fd_quarter_wave(bc):
    lam = fd.oracle_eigenvalues(UNIT, bc, 1, 4096, richardson=True)
    assert lam[0] == pytest.approx(PI**2, rel=1e-8)


def test_fd_neumann_half():
    lam = fd.oracle_eigenvalues(UNIT, BoundarySpec.neumann_half("left"), 2, 4096, richardson=True)
    assert abs(lam[0]) < 1e-9
    assert lam[1] == pytest.approx((2 * PI) ** 2, rel=1e-8)


def test_fd_step_matches_exact():
    lam = fd.oracle_eigenvalues(CoefficientSet(rho=STEP41), n_max=4, N=8192)
    np.testing.assert_allclose(lam, stepexact.exact_eigenvalues(STEP41, 4), rtol=1e-5)


def test_fd_second_order():
    exact = (np.arange(1, 4) * PI) ** 2
    e1 = fd.oracle_eigenvalues(UNIT, n_max=3, N=256) - exact
    e2 = fd.oracle_eigenvalues(UNIT, n_max=3, N=512) - exact
    np.testing.assert_allclose(e1 / e2, 4.0, rtol=2e-3)


def test_sturm_count_monotone_and_matches_lapack():
    mp = fd.assemble(CoefficientSet(rho=STEP41), BoundarySpec(), 128)
    d, e = mp.standard_form()
    eig = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    grid = np.linspace(0, 2 * eig[10], 200)
    counts = [fd.sturm_count(d, e, lam) for lam in grid]
    assert all(a <= b for a, b in zip(counts, counts[1:]))
    assert counts == [int(np.sum(eig < lam)) for lam in grid]


def test_fd_mesh_guards():
    with pytest.raises(SolverError):
        fd.oracle_eigenvalues(UNIT, n_max=10, N=64)
    with pytest.raises(DomainError):
        BoundarySpec("XX")


def test_mesh_conforms_to_breakpoints():
    x = fd.mesh_nodes(0.0, 1.0, 100, (1 / 3,))
    assert np.any(x == 1 / 3)
    assert x[0] == 0.0 and x[-1] == 1.0 and np.all(np.diff(x) > 0)
