import json
import math

import numpy as np
import pytest

from hyperbn import hyperfun
from hyperbn.errors import DomainError
from hyperbn.odecore import (
    ProblemParams,
    RadialProfile,
    ShootingOutcome,
    divergence_limit,
    integrate,
    origin_step,
    recompute_integral,
    rhs,
)

# sympy-evaluated derivatives of the closed-form linear solution
# u = sin(x)/sinh(x) (for n=3, lambda=2) at x=1
_U1 = 0.7160229153604338
_DU1 = -0.480410326301644
_DDU1 = -0.17045441081625573


def test_problem_params_validation():
    p = ProblemParams(3, 2.0, 1.0)
    assert p.p == 5.0
    assert p.dim.c == 0.6
    with pytest.raises(DomainError):
        ProblemParams(2.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        ProblemParams(3, math.nan, 1.0)
    with pytest.raises(DomainError):
        ProblemParams(3, 1.0, 0.0)
    with pytest.raises(DomainError):
        ProblemParams(3, 1.0, -2.0)


def test_rhs_zero_state():
    p = ProblemParams(3, 2.0, 1.0)
    out = rhs(0.7, np.zeros(8), p)
    assert out[2] == pytest.approx(math.sinh(0.7) ** 2, rel=1e-14)
    out[2] = 0.0
    assert np.all(out == 0.0)


def test_rhs_linear_mode_closed_form():
    # with u = sin(x)/sinh(x) the state derivative must reproduce u''
    p = ProblemParams(3, 2.0, 1.0)
    out = rhs(1.0, np.array([_U1, _DU1]), p, linear=True)
    assert out[0] == _DU1
    assert abs(out[1] - _DDU1) < 1e-10
    # residual of the equation itself
    coth = math.cosh(1.0) / math.sinh(1.0)
    assert abs(-out[1] - 2.0 * coth * _DU1 - 2.0 * _U1) < 1e-10


def test_rhs_coth_limit_near_origin():
    p = ProblemParams(3, 0.0, 1.0)
    out = rhs(1e-8, np.array([0.0, 1.0]), p, linear=True)
    assert math.isclose(out[1], -(p.n - 1.0) / 1e-8, rel_tol=1e-15)


def test_rhs_domain_and_overflow_errors():
    p = ProblemParams(3, 1.0, 1.0)
    with pytest.raises(DomainError):
        rhs(0.0, np.zeros(8), p)
    with pytest.raises(DomainError):
        rhs(-1.0, np.zeros(8), p)
    with pytest.raises(DomainError):
        rhs(1.0, np.zeros(5), p)
    big = np.zeros(8)
    big[0] = 2e100
    with pytest.raises(OverflowError):
        rhs(1.0, big, p)


def test_origin_step_zero_amplitude():
    p = ProblemParams(3, 1.5, 1.0)
    assert np.all(origin_step(p, 0.0, 1e-4) == 0.0)


def test_origin_step_taylor_value():
    # a=1, lambda=0, n=3 gives F=1 and u(x1) = 1 - x1^2/6 + O(x1^4)
    p = ProblemParams(3, 0.0, 1.0)
    y = origin_step(p, 1.0, 1e-4)
    assert math.isclose(y[0], 1.0 - 1e-8 / 6.0, rel_tol=1e-15)
    # u' carries an O(x1^3) correction beyond the leading -F x1/n term
    assert math.isclose(y[1], -1e-4 / 3.0, rel_tol=1e-7)
    assert y[2] == pytest.approx(hyperfun.g_big(1e-4, 3), rel=1e-14)


def test_origin_step_rejects_bad_offset():
    p = ProblemParams(3, 0.0, 1.0)
    for bad in (0.0, -1e-4, 2e-3, math.nan):
        with pytest.raises(DomainError):
            origin_step(p, 1.0, bad)


def test_origin_offset_consistency():
    # starting the kernel at 1e-4 or 1e-3 must not change u(1)
    p = ProblemParams(3, 1.0, 1.0)
    u_vals = []
    for x1 in (1e-4, 1e-3):
        prof, _ = integrate(p, 1.0, 1.0, 1e-11, x_start=x1, stop_zeros=99)
        u_vals.append(prof.u[-1])
    assert math.isclose(u_vals[0], u_vals[1], rel_tol=1e-9)


def test_integrate_zero_amplitude():
    p = ProblemParams(3, 2.0, 1.0)
    prof, out = integrate(p, 0.0, 5.0)
    assert out.kind == ShootingOutcome.NO_ZERO and out.x == 5.0
    assert np.all(prof.u == 0.0) and np.all(prof.du == 0.0)
    assert prof.integrals["Iu2"] == 0.0


def test_integrate_rejects_bad_tol():
    p = ProblemParams(3, 2.0, 1.0)
    for bad in (1e-14, 1e-5, 0.0):
        with pytest.raises(DomainError):
            integrate(p, 1.0, 5.0, bad)


def test_linear_first_zero_at_pi():
    p = ProblemParams(3, 2.0, 1.0)
    prof, out = integrate(p, 1.0, 10.0, 1e-11, linear=True)
    assert out.kind == ShootingOutcome.FIRST_ZERO
    assert abs(out.x - math.pi) < 1e-9
    assert prof.grid[-1] == out.x
    assert len(prof.zeros) == 1


def test_linear_trajectory_matches_closed_form():
    p = ProblemParams(3, 2.0, 1.0)
    prof, _ = integrate(p, 1.0, 10.0, 1e-11, linear=True)
    for x in (0.3, 1.0, 2.4, 3.0):
        u, du = prof.dense_eval(x)
        assert math.isclose(u, math.sin(x) / math.sinh(x), rel_tol=1e-9)


def test_linear_amplitude_scaling():
    p = ProblemParams(3, 2.0, 1.0)
    tol = 1e-10
    prof1, _ = integrate(p, 1.0, 2.0, tol, linear=True, stop_zeros=99)
    prof7, _ = integrate(p, 7.0, 2.0, tol, linear=True, stop_zeros=99)
    u1 = prof1.dense_eval(np.linspace(0.1, 2.0, 17))[0]
    u7 = prof7.dense_eval(np.linspace(0.1, 2.0, 17))[0]
    assert np.allclose(u7, 7.0 * u1, rtol=10 * tol)


def test_event_location_precision():
    # |u(x*)| measured by a re-integration at tol/10 with events disabled
    p = ProblemParams(3, 9.0, 1.0)
    tol = 1e-11
    prof, out = integrate(p, 2.0, 10.0, tol)
    assert out.kind == ShootingOutcome.FIRST_ZERO
    check, _ = integrate(p, 2.0, out.x, tol / 10.0, stop_zeros=99)
    assert abs(check.u[-1]) <= 1e-10 * prof.max_abs_u


def test_tolerance_halving_contract():
    p = ProblemParams(3, 4.0, 1.0)
    coarse = 1e-8
    prof_c, _ = integrate(p, 0.5, 2.0, coarse, stop_zeros=99)
    prof_f, _ = integrate(p, 0.5, 2.0, coarse / 2.0, stop_zeros=99)
    assert abs(prof_c.u[-1] - prof_f.u[-1]) < coarse * prof_c.max_abs_u


def test_accumulated_g_matches_quadrature():
    p = ProblemParams(2.5, 3.0, 1.0)
    tol = 1e-10
    prof, _ = integrate(p, 1.5, 4.0, tol, stop_zeros=99)
    ref = hyperfun.g_big(prof.grid[1:], 2.5)
    assert np.max(np.abs(prof.G[1:] - ref) / ref) < 10 * tol


@pytest.mark.parametrize("which", ["Iu2", "Idu2", "Iup1", "IL", "IH"])
def test_simpson_cross_check(which):
    p = ProblemParams(3, 5.0, 1.0)
    tol = 1e-10
    prof, _ = integrate(p, 2.0, 1.2, tol, stop_zeros=99)
    acc = prof.integrals[which]
    sim = recompute_integral(prof, which)
    assert abs(acc - sim) <= 5 * tol * max(abs(acc), 1.0)


def test_divergence_classification():
    # linear mode with lambda << 0 grows exponentially and must be flagged
    p = ProblemParams(3, -400.0, 1.0)
    prof, out = integrate(p, 1.0, 20.0, 1e-9, linear=True, record=False)
    assert out.kind == ShootingOutcome.DIVERGED
    assert out.x < 20.0
    assert abs(prof.u[-1]) >= divergence_limit(p) * 0.9


def test_divergence_limit_clamp():
    assert divergence_limit(ProblemParams(3, 0.0, 1.0)) == pytest.approx(10 ** (250 / 6), rel=1e-12)
    # for n near 2 the exponent p is large and the clamp tightens
    assert divergence_limit(ProblemParams(2.1, 0.0, 1.0)) < 1e7


def test_nodal_stop_counts_zeros():
    # at lambda > lambda_2 the linear trajectory crosses twice before x_max
    p = ProblemParams(3, 1.0 + (2 * math.pi / 3.0) ** 2, 3.0)
    prof, out = integrate(p, 1.0, 10.0, 1e-10, linear=True, stop_zeros=2)
    assert out.kind == ShootingOutcome.FIRST_ZERO
    assert len(prof.zeros) == 2
    assert abs(prof.zeros[0] - 1.5) < 1e-8
    assert abs(prof.zeros[1] - 3.0) < 1e-8


def test_csv_round_trip(tmp_path):
    p = ProblemParams(3, 5.0, 1.0)
    prof, _ = integrate(p, 2.0, 1.0, 1e-10, stop_zeros=99)
    path = tmp_path / "profile.csv"
    prof.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "x,u,du,G,Iu2,Idu2,Iup1,IL,IH"
    loaded = RadialProfile.from_csv(path, p)
    assert np.allclose(loaded.grid, prof.grid, rtol=0, atol=0)
    assert np.allclose(loaded.u, prof.u, rtol=1e-16)
    assert loaded.integrals["IL"] == pytest.approx(prof.integrals["IL"], rel=1e-15)
    with pytest.raises(ValueError):
        loaded.dense_eval(0.5)


def test_json_round_trip(tmp_path):
    p = ProblemParams(2.5, 1.0, 2.0)
    prof, _ = integrate(p, 0.7, 2.0, 1e-10, stop_zeros=99)
    path = tmp_path / "profile.json"
    prof.to_json(path)
    doc = json.loads(path.read_text())
    assert doc["params"] == {"n": 2.5, "lambda": 1.0, "radius": 2.0}
    loaded = RadialProfile.from_json(path)
    assert loaded.params == p
    assert np.array_equal(loaded.u, prof.u)
    assert np.array_equal(loaded.zeros, prof.zeros)


def test_dense_eval_domain():
    p = ProblemParams(3, 2.0, 1.0)
    prof, _ = integrate(p, 1.0, 2.0, 1e-10, stop_zeros=99)
    u0, du0 = prof.dense_eval(0.0)
    assert u0 == 1.0 and du0 == 0.0
    with pytest.raises(DomainError):
        prof.dense_eval(2.5)
    # interpolation agrees with the stored grid values
    u, _ = prof.dense_eval(prof.grid)
    assert np.allclose(u, prof.u, rtol=1e-12, atol=1e-14)
