import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from zeromass._validation import DomainError
from zeromass.green import (
    FixedPointOptions,
    FixedPointSolver,
    GeneralSolutionSpec,
    GreenOperator,
    apply_operator,
    builtin_init,
    fixed_point_solve,
    general_solution,
    ode_residual,
)
from zeromass.scaling import Parameters, VProfile, log_grid, membership_report

GRID = log_grid(1e-4, 50.0, 1024)


@pytest.fixture(scope="module")
def op4(p4):
    return GreenOperator(p4, GRID)


def test_general_solution_homogeneous(p4):
    t = np.array([0.01, 0.5, 1.0, 3.0, 20.0])
    zero = GeneralSolutionSpec.from_callable(0, 1, lambda s: 0.0)
    np.testing.assert_allclose(general_solution(p4, zero, t), special.kv(1, t) / t, rtol=1e-12)
    one = GeneralSolutionSpec.from_callable(1, 0, lambda s: 0.0)
    np.testing.assert_allclose(general_solution(p4, one, t), special.iv(1, t) / t, rtol=1e-12)


def test_general_solution_constant_forcing_solves_ode():
    """FD residual of ``-v'' - (2nu+1)/t v' + v - 1`` for forcing ``g = 1``."""
    prm = Parameters(4, 1, 1, 3)
    nu = float(prm.nu)
    spec = GeneralSolutionSpec.from_callable(0.3, -0.2, lambda s: 1.0)
    h = 1e-4
    for t in (0.3, 1.0, 2.5, 7.0):
        vm, v0, vp = general_solution(prm, spec, np.array([t - h, t, t + h]))
        d2 = (vp - 2 * v0 + vm) / h**2
        d1 = (vp - vm) / (2 * h)
        res = -d2 - (2 * nu + 1) / t * d1 + v0 - 1.0
        assert abs(res) <= 1e-4 * max(1.0, abs(v0))


def test_general_solution_domain(p4):
    spec = GeneralSolutionSpec.from_callable(0, 0, lambda s: 1.0)
    with pytest.raises(DomainError):
        general_solution(p4, spec, 0.0)
    with pytest.raises(DomainError):
        general_solution(p4, spec, 100.0)


def _t_oracle(params, v, t):
    """``Tv(t)`` by adaptive quadrature with scipy Bessel functions."""
    nu, w, q, b = float(params.nu), float(params.weight_exponent), float(params.power) - 1, params.b_const
    head = integrate.quad(lambda s: s**w * special.iv(nu, s) * v(s) ** q, 0, t, epsabs=0, epsrel=1e-12, limit=200)[0]
    tail = integrate.quad(lambda s: s**w * special.kv(nu, s) * v(s) ** q, t, np.inf, epsabs=0, epsrel=1e-12, limit=200)[0]
    return b * t**-nu * (special.kv(nu, t) * head + special.iv(nu, t) * tail)


@pytest.mark.parametrize("prm", [Parameters(3, 1, 1, 4), Parameters(4, 2, 0.5, 3.5), Parameters(3, 1, 1, "5.5")], ids=str)
def test_operator_against_quadrature(prm):
    v = builtin_init("expdecay", GRID)
    tv = apply_operator(prm, v)
    for t in (1e-3, 0.1, 1.0, 5.0, 20.0):
        k = np.searchsorted(GRID, t)
        ref = _t_oracle(prm, lambda s: math.exp(-s), GRID[k])
        assert tv.values[k] == pytest.approx(ref, rel=1e-7)


def test_operator_zero_and_positivity(op4):
    zero = builtin_init("zero", GRID)
    assert np.all(op4.apply(zero).values == 0)
    tv = op4.apply(builtin_init("expdecay", GRID))
    assert np.all(tv.values > 0)
    # Tv rises near the origin (its forcing vanishes there) and decreases later
    assert tv.derivative_values[0] > 0 and np.all(tv.derivative_values[GRID >= 1] < 0)


@given(st.floats(0.1, 5.0), st.floats(0.2, 3.0))
def test_operator_homogeneity(p4, c, rate):
    op = GreenOperator(p4, GRID)
    v = VProfile(GRID, np.exp(-rate * GRID))
    a = op.apply(VProfile(GRID, c * v.values)).values
    b = c**3 * op.apply(v).values
    np.testing.assert_allclose(a, b, rtol=1e-10)


@given(st.floats(0.0, 1.0), st.floats(0.0, 2.0))
def test_operator_monotone(p4, lo, extra):
    op = GreenOperator(p4, GRID)
    base = np.exp(-GRID)
    small = op.apply(VProfile(GRID, lo * base)).values
    big = op.apply(VProfile(GRID, (lo + extra) * base)).values
    assert np.all(big >= small * (1 - 1e-12))


def test_operator_rejects_bad_profiles(op4):
    with pytest.raises(DomainError):
        op4.apply(VProfile(GRID, -np.exp(-GRID)))
    with pytest.raises(DomainError):
        op4.apply(VProfile(log_grid(1e-4, 50.0, 512), np.ones(512)))
    with pytest.raises(DomainError):
        op4.apply(VProfile(GRID, np.ones_like(GRID)))
    with pytest.raises(DomainError):
        GreenOperator(Parameters(3, 1, 3, 7))


def test_trivial_init_is_trivial(p4):
    res = fixed_point_solve(p4, builtin_init("zero"))
    assert res.converged and res.trivial and res.status == "trivial" and not res.verified


def test_p4_converges(p4, picard_p4):
    res = picard_p4
    assert res.converged and res.status == "converged" and res.verified
    assert res.ode_residual <= 1e-6 and res.residual_sup <= 1e-8
    assert res.profile.is_positive


def test_fixed_point_idempotent(p4, picard_p4):
    v = picard_p4.profile
    tv = apply_operator(p4, v)
    assert np.max(np.abs(tv.values - v.values)) <= 2 * FixedPointOptions().tol


def test_fixed_point_in_h_and_head_exponent(p4, picard_p4):
    v = picard_p4.profile
    assert membership_report(p4, v).in_H is True
    assert GreenOperator(p4, v.grid).head_exponent(v) > -1


@pytest.mark.slow
def test_grid_refinement(p4, picard_p4):
    fine = fixed_point_solve(p4, builtin_init("expdecay", log_grid(1e-4, 50.0, 4096)))
    assert fine.converged
    g = picard_p4.profile.grid
    g = g[(g >= 0.01) & (g <= 10)]
    diff = np.max(np.abs(fine.profile.interpolate(g) - picard_p4.profile.interpolate(g)))
    assert diff <= 1e-5


def test_plain_iteration_does_not_converge(p4):
    """Without the scaling correction the iteration runs off along c*v."""
    res = fixed_point_solve(p4, builtin_init("expdecay", GRID), FixedPointOptions(max_iter=200, stabilize=False))
    assert not res.converged


def test_damping_validated(p4):
    with pytest.raises(DomainError):
        fixed_point_solve(p4, builtin_init("expdecay"), FixedPointOptions(damping=0))


def test_ode_residual_of_non_solution(p4):
    assert ode_residual(p4, builtin_init("expdecay")) > 1e-2
    assert ode_residual(p4, builtin_init("zero")) == 0.0


def test_estimator(p4, picard_p4):
    est = FixedPointSolver().fit()
    assert est.converged_
    t = np.array([0.1, 1.0, 5.0])
    np.testing.assert_allclose(est.predict(t), picard_p4.profile.interpolate(t), rtol=1e-12)
    assert FixedPointSolver(power=5).get_params()["power"] == 5
