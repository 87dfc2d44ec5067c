import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zomirror.conic import (ConeSpec, DominanceProblem, InfeasibleDominanceError, alignment_bound,
                            ball_min_dominance_alpha, cone_contains, dominance_margin,
                            dominance_witness, dual_cone_contains, min_dominance_alpha,
                            verify_dominance, witness_inequality, worst_case_witness)


def test_spot_value():
    p = DominanceProblem.from_norms(1.0, 0.6, 0.8)
    assert min_dominance_alpha(p) == pytest.approx(5.8, abs=1e-12)


def test_infeasible_conditions():
    with pytest.raises(InfeasibleDominanceError) as err:
        min_dominance_alpha(DominanceProblem.from_norms(1.0, 1.2, 0.8))
    assert err.value.condition == "uncertainty"
    with pytest.raises(InfeasibleDominanceError) as err:
        min_dominance_alpha(DominanceProblem.from_norms(1.0, 0.6, 0.5))
    assert err.value.condition == "cone"


def test_cone_membership():
    cone = ConeSpec(np.array([1.0, 0.0]), 0.8)
    assert cone_contains(cone, np.array([0.8, 0.6]))
    assert not cone_contains(cone, np.array([0.7, 0.7]))
    # dual cone of C(x, c) is C(x, s)
    assert dual_cone_contains(cone, np.array([0.6, 0.8]))
    assert not dual_cone_contains(cone, np.array([0.5, 0.9]))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.0, 0.95), st.floats(0, 2 * math.pi), st.floats(0, 1))
def test_alignment_bound(m_norm, ratio, theta, frac):
    R = ratio * m_norm
    x = np.array([m_norm, 0.0]) + frac * R * np.array([math.cos(theta), math.sin(theta)])
    cos = x[0] / np.linalg.norm(x)
    assert cos >= alignment_bound(m_norm, R) - 1e-12


def test_from_box_encloses_box():
    p = DominanceProblem.from_box([1.0, -0.1], [1.2, 0.1], 0.9)
    np.testing.assert_allclose(p.m, [1.1, 0.0])
    assert p.R == pytest.approx(math.hypot(0.1, 0.1))


@pytest.mark.parametrize("m_norm,R,c", [(1.0, 0.6, 0.8), (2.0, 1.0, math.sqrt(3) / 2), (0.5, 0.1, 0.95)])
def test_closed_form_dominates(m_norm, R, c):
    p = DominanceProblem.from_norms(m_norm, R, c, dim=3)
    assert verify_dominance(p, min_dominance_alpha(p))


def test_ball_minimum_known_values():
    assert ball_min_dominance_alpha(DominanceProblem.from_norms(1.0, 0.6, 0.8))[0] == pytest.approx(2.56, abs=1e-9)
    p = DominanceProblem.from_norms(2.0, 1.0, math.sqrt(3) / 2)
    assert ball_min_dominance_alpha(p)[0] == pytest.approx(1.7745, abs=1e-4)


def test_ball_minimum_is_sharp():
    p = DominanceProblem.from_norms(1.0, 0.6, 0.8)
    exact, _ = ball_min_dominance_alpha(p)
    assert verify_dominance(p, exact * (1 + 1e-6))
    assert not verify_dominance(p, exact * (1 - 1e-3))
    x, y = dominance_witness(p, exact * (1 - 1e-3))
    w = exact * (1 - 1e-3) * p.m - x
    assert float(w @ y) < 0
    assert dominance_witness(p, exact) is None


def test_closed_form_is_not_the_ball_minimum():
    # the closed form is a valid scaling but strictly larger than necessary here
    p = DominanceProblem.from_norms(1.0, 0.6, 0.8)
    assert verify_dominance(p, 5.8 * (1 - 1e-4))


def test_margin_sign():
    p = DominanceProblem.from_norms(1.0, 0.3, 0.9)
    margin, x, y = dominance_margin(p, 1.0, n_samples=2000)
    assert margin < 0 and np.linalg.norm(x - p.m) <= p.R * (1 + 1e-12)


def test_witness_example_values():
    u, u_hat, o = worst_case_witness(0.6, 0.6, 0.8, 4.0)
    np.testing.assert_allclose(u, [0.8, 0.6])
    np.testing.assert_allclose(o, [0.48, 0.36])
    lhs, rhs = witness_inequality(u, u_hat, o, 4.0, 0.6)
    assert lhs == pytest.approx(2.6)
    assert rhs == pytest.approx(0.6 * math.hypot(3.52, 0.36))
    # the construction does not break the dual-cone inequality at this t
    assert lhs > rhs


def test_witness_preconditions():
    with pytest.raises(ValueError):
        worst_case_witness(0.6, 0.6, 0.8, 4.8)
    with pytest.raises(ValueError):
        worst_case_witness(0.6, 0.8, 0.8, 1.0)
