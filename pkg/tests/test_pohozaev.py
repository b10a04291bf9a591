import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from zeromass._validation import DomainError
from zeromass.pohozaev import (
    algebraic_checks,
    boundary_bracket,
    energy,
    energy_rate_residual,
    f_completed_square,
    f_raw,
    identity_residual,
    in_obstruction_region,
    limit_gate,
    middle_coefficient,
    obstruction,
    obstruction_suite,
    rational_region_grid,
)
from zeromass.scaling import Parameters, PhiProfile, phi_from_v

P32 = Parameters(3, 1, 1, "3.2")
R = np.geomspace(1e-4, 60, 4096)
EXP = PhiProfile(R, np.exp(-R), -np.exp(-R))

region_points = st.tuples(
    st.integers(3, 10), st.fractions(Fraction(1, 50), Fraction(99, 50), max_denominator=1000), st.fractions(Fraction(1, 100), Fraction(1), max_denominator=1000)
)


def _in_region(n, alpha, frac):
    base = Parameters(n, 1, alpha, 3)
    return Parameters(n, Fraction(3, 2), alpha, base.two_alpha + frac * (base.two_alpha_star - base.two_alpha))


@given(region_points)
def test_exact_algebra_on_region(pt):
    prm = _in_region(*pt)
    assert in_obstruction_region(prm)
    assert middle_coefficient(prm) == 0
    assert all(algebraic_checks(prm).values())


def test_obstruction_suite_is_clean():
    out = obstruction_suite(3, 100)
    assert out["points"] == 10000 and out["total_failures"] == 0


def test_obstruction_suite_other_dimension():
    assert obstruction_suite(5, 20)["total_failures"] == 0


def test_rational_grid_hits_upper_line():
    pts = rational_region_grid(3, 4)
    assert len(pts) == 16
    tops = [p for p in pts if p.power == p.two_alpha_star]
    assert len(tops) == 4 and all(p.gamma1 == 0 for p in tops)


def test_region_membership():
    assert in_obstruction_region(P32)
    assert in_obstruction_region(Parameters(3, 1, 1, Fraction(10, 3)))
    assert not in_obstruction_region(Parameters(3, 1, 1, 3))
    assert not in_obstruction_region(Parameters(3, 1, 1, 4))
    assert not in_obstruction_region(Parameters(3, 1, 3, 7))


@given(st.floats(1e-3, 10), st.floats(-5, 5), st.floats(-5, 5))
def test_completed_square_matches_raw(a, f, df):
    raw = f_raw(P32, a, f, df)
    parts = f_completed_square(P32, a, f, df)
    assert sum(parts) == pytest.approx(raw, rel=1e-10, abs=1e-10 * (abs(parts[0]) + abs(parts[1]) + abs(parts[2])))


def test_energy_closed_form():
    rec = energy(P32, EXP, 1.0)
    p = 3.2
    e = 0.5 * math.exp(-2) - 0.5 * math.exp(-2) + math.exp(-p) / p
    assert rec.E == pytest.approx(e, rel=1e-8)
    assert rec.E_beta == pytest.approx(e, rel=1e-8)
    with pytest.raises(DomainError):
        energy(P32, EXP, 1e3)


def test_identity_on_non_solution_fails():
    rep = identity_residual(P32, EXP, 0.1, 10.0)
    assert not rep.passes() and rep.middle_coefficient == 0.0


def test_identity_lhs_closed_form():
    """For ``phi = exp(-r)`` the left side reduces to incomplete gamma functions."""
    beta, g1, g2 = float(P32.beta), float(P32.gamma1), float(P32.gamma2)

    def piece(s, a, b):
        full = special.gamma(s) / 2**s
        return full * (special.gammaincc(s, 2 * a) - special.gammaincc(s, 2 * b))

    a, b = 0.1, 10.0
    rep = identity_residual(P32, EXP, a, b)
    assert rep.lhs == pytest.approx(g1 * piece(beta, a, b) + g2 * piece(beta - 2, a, b), rel=1e-9)
    bb = boundary_bracket(P32, b, math.exp(-b), -math.exp(-b)) - boundary_bracket(P32, a, math.exp(-a), -math.exp(-a))
    assert rep.rhs == pytest.approx(bb, rel=1e-9)


def test_identity_on_ground_state(p4, shooting_p4):
    phi = phi_from_v(p4, shooting_p4.profile)
    assert identity_residual(p4, phi, 0.1, 10.0).normalized <= 1e-5
    assert energy_rate_residual(p4, phi) <= 1e-4


def test_identity_domain():
    with pytest.raises(DomainError):
        identity_residual(P32, EXP, 2.0, 1.0)
    with pytest.raises(DomainError):
        identity_residual(P32, EXP, 1e-6, 1.0)


def test_obstruction_exp_profile():
    obs = obstruction(P32, EXP, 0.05)
    assert obs.limit_taken and obs.lhs_tail > 0
    assert obs.F_a == pytest.approx(obs.F_square + obs.F_power + obs.F_remainder, rel=1e-10)
    with pytest.raises(DomainError):
        obstruction(Parameters(3, 1, 1, 4), EXP, 0.05)


def test_limit_gate_rejects_slow_decay():
    slow = PhiProfile(R, R**-0.1, -0.1 * R**-1.1)
    gate, vals = limit_gate(P32, slow)
    assert not gate and len(vals) == 3
    assert limit_gate(P32, EXP)[0]
