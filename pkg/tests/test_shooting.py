import math

import numpy as np
import pytest

from hyperbn.errors import DomainError
from hyperbn.odecore import ProblemParams, ShootingOutcome, integrate
from hyperbn.shooting import (
    NotFound,
    eigen_lambda1,
    first_zero_map,
    solve_bvp,
)


def lam1_closed_form(R):
    # n=3: substitution w = u sinh(x) gives -w'' = (lambda - 1) w
    return 1.0 + math.pi**2 / R**2


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0, math.pi, 5.0])
def test_eigen_lambda1_closed_form_n3(R):
    lam = eigen_lambda1(3, R, 1e-9)
    assert math.isclose(lam, lam1_closed_form(R), rel_tol=1e-8)


def test_eigen_lambda1_spec_examples():
    assert abs(eigen_lambda1(3, math.pi) - 2.0) < 1e-8 * 2.0
    assert abs(eigen_lambda1(3, math.pi / 2) - 5.0) < 1e-8 * 5.0
    v = eigen_lambda1(2.5, 1.0)
    assert v > (2.5 - 1.0) ** 2 / 4.0 == 0.5625


@pytest.mark.parametrize("n", [2.5, 3.0, 3.5])
def test_eigen_lambda1_monotone_and_bounded(n):
    bottom = (n - 1.0) ** 2 / 4.0
    vals = [eigen_lambda1(n, R, 1e-9) for R in (0.5, 1.0, 2.0, 5.0, 10.0)]
    assert all(v > bottom for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_eigen_lambda1_validation():
    with pytest.raises(DomainError):
        eigen_lambda1(3, 0.0)
    with pytest.raises(DomainError):
        eigen_lambda1(3, 1.0, tol=0.0)


def test_first_zero_map_linear_closed_form():
    p = ProblemParams(3, 2.0, 1.0)
    for a in (1e-3, 1.0, 50.0):
        out = first_zero_map(p, a, linear=True)
        assert out.kind == ShootingOutcome.FIRST_ZERO
        assert abs(out.x - math.pi) < 1e-9


def test_first_zero_map_decay_without_crossing():
    # lambda <= 0 with small amplitude: the trajectory settles, no zero
    for lam in (0.0, -1.0):
        out = first_zero_map(ProblemParams(3, lam, 1.0), 1e-3)
        assert out.kind == ShootingOutcome.NO_ZERO
        assert out.x == 20.0


def test_first_zero_map_rejects_nonpositive_amplitude():
    p = ProblemParams(3, 2.0, 1.0)
    with pytest.raises(DomainError):
        first_zero_map(p, 0.0)
    with pytest.raises(DomainError):
        first_zero_map(p, -1.0)


def test_sturm_monotonicity_in_lambda():
    # linear-mode first zero moves inward as lambda grows
    zeros = []
    for lam in (2.0, 3.0, 5.0, 8.0, 12.0):
        out = first_zero_map(ProblemParams(3, lam, 1.0), 1.0, linear=True)
        assert out.kind == ShootingOutcome.FIRST_ZERO
        zeros.append(out.x)
    assert all(a > b for a, b in zip(zeros, zeros[1:]))


def test_solve_bvp_validation():
    p = ProblemParams(3, 5.0, 1.0)
    with pytest.raises(DomainError):
        solve_bvp(p, bracket=(0.0, 1.0))
    with pytest.raises(DomainError):
        solve_bvp(p, bracket=(2.0, 1.0))
    with pytest.raises(DomainError):
        solve_bvp(p, scan_points=1)


def test_solve_bvp_below_bound_not_found():
    # nonexistence regime: lambda below the radial bound 0.9 at n=3
    res = solve_bvp(ProblemParams(3, 0.5, 1.0))
    assert isinstance(res, NotFound) and not res.found
    assert len(res.trace) == 200
    assert all(pt.kind != ShootingOutcome.FIRST_ZERO or pt.x > 1.0 for pt in res.trace)


def test_solve_bvp_finds_solution_near_lambda1():
    # lambda = 10 sits just below lambda1(1,3) ~ 10.87
    res = solve_bvp(ProblemParams(3, 10.0, 1.0))
    assert res.found
    assert res.node_count == 0
    assert res.boundary_residual <= 1e-9 * res.profile.max_abs_u
    assert np.all(res.profile.u[:-1] > 0.0)
    # re-integration at a tighter tolerance keeps the boundary residual
    check, _ = integrate(res.profile.params, res.amplitude, 1.0, 1e-12, stop_zeros=99)
    assert abs(check.u[-1]) <= 1e-8 * res.profile.max_abs_u


def test_solve_bvp_nodal_solution():
    # one interior node, just below lambda2(1,3) = 1 + 4 pi^2
    res = solve_bvp(ProblemParams(3, 39.0, 1.0), node_count=1)
    assert res.found
    assert res.node_count == 1
    assert res.boundary_residual <= 1e-9 * res.profile.max_abs_u
    assert len(res.profile.zeros) >= 1
    assert res.profile.zeros[0] < 1.0 - 1e-3


def test_solve_bvp_linear_degenerate_detection():
    # at lambda = lambda1 exactly, rho(a) is a-independent and equals R
    res = solve_bvp(ProblemParams(3, 2.0, math.pi), linear=True)
    assert res.found and res.degenerate
    assert res.boundary_residual <= 1e-9 * res.profile.max_abs_u
    # same lambda, wrong radius: degenerate flag with no solution
    res2 = solve_bvp(ProblemParams(3, 2.0, 2.0), linear=True)
    assert isinstance(res2, NotFound)
    assert res2.degenerate


def test_empirical_threshold_above_paper_bound():
    # the existence threshold at (n=3, R=1) sits near (lambda1 + 3)/4,
    # well above the nonexistence bound 0.9
    assert not solve_bvp(ProblemParams(3, 3.3, 1.0)).found
    assert solve_bvp(ProblemParams(3, 3.6, 1.0)).found
