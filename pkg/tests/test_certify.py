import math

import numpy as np
import pytest

from zomirror.certify import (FeasibilityInputs, check_propA, check_thm8_1, delta_ratio,
                              downward_closed_scan, eta_feasible_max, floor_radius, floor_value,
                              kantorovich_cos, run_checks, tightness_instance)
from zomirror.descent import certificate, mirror_step
from zomirror.geometry import entropy_mirror
from zomirror.oracles import ObjectiveOracle
from zomirror.problems import ProblemSpec, make_problem


def test_eta_feasible_max_examples():
    assert eta_feasible_max(FeasibilityInputs(1.0, 1.0, 4.0, 0.0)) == pytest.approx(0.25)
    assert eta_feasible_max(FeasibilityInputs(1.0, 1.0, 4.0, 0.25)) == pytest.approx(0.125)
    assert eta_feasible_max(FeasibilityInputs(1.0, 1.0, 4.0, 0.5)) == 0.0


def test_delta_ratio_edge_cases():
    g = np.array([1.0, 2.0])
    assert delta_ratio(g, g) == 0.0
    assert delta_ratio(np.zeros(2), g) == math.inf


def test_tightness_instance():
    _, _, cos = tightness_instance(1.0, 4.0)
    assert cos == pytest.approx(0.8, abs=1e-12)
    assert kantorovich_cos(1.0, 4.0) == pytest.approx(0.8)
    assert check_propA(1.0, 100.0)["pass"]


def test_floor_radius_example():
    assert floor_radius(1.0, 4.0, 1e-3, 4) == pytest.approx(5e-3)


def test_floor_value_quadratic_matches_analytic(quad5):
    est = floor_value(quad5, 0.1)
    assert est.consistent
    # the top eigendirection attains L/2 r^2
    assert est.floor_value == pytest.approx(est.analytic_bound, rel=1e-10)


def test_downward_closed_worked_case():
    f = ObjectiveOracle(lambda x: 0.5 * float(x @ x), 1)
    grid = np.arange(50) / 25.0
    flags, is_interval = downward_closed_scan(f, np.array([1.0]), np.array([1.0]), grid)
    assert is_interval
    assert [g for g, ok in zip(grid, flags) if ok] == [g for g in grid if g <= 1.0]


def test_entropy_one_norm_step_certifies():
    # l1/linf pair: entropy on the simplex has sigma = 1 (Pinsker) and a
    # quadratic is L-smooth in l1 with L = max |A_ij|
    d = 4
    rng = np.random.default_rng(3)
    B = rng.standard_normal((d, d))
    A = B @ B.T + np.eye(d)
    L1 = float(np.max(np.abs(A)))
    f = ObjectiveOracle(lambda x: 0.5 * float(x @ A @ x), d, grad=lambda x: A @ x)
    phi = entropy_mirror(simplex=True)
    eta = eta_feasible_max(FeasibilityInputs(phi.sigma, 1.0, L1, 0.0))
    for _ in range(50):
        x = rng.dirichlet(np.ones(d))
        x_next = mirror_step(phi, x, f.gradient(x), eta)
        _, _, ok, _ = certificate(phi, f, f.gradient(x), x, x_next, eta, f(x))
        assert ok


def test_run_checks_quadratic_all_pass():
    o = make_problem(ProblemSpec(dim=3, mu=1.0, L=4.0, seed=0))
    checks = run_checks(o, 1e-3, sizes={"thm6_6": 500, "thm9_1": 2000})
    assert {k for k, v in checks.items() if not v["pass"]} == set()
    assert set(checks) == {"thm5_1", "thm6_3", "thm6_6", "thm8_1", "propA", "thmB", "thm9_1"}


def test_misdeclared_L_detected():
    o = make_problem(ProblemSpec(dim=5, mu=1.0, L=4.0, seed=0))
    bad = ObjectiveOracle(o.value_uncounted, 5, grad=o.gradient, x_star=o.x_star, mu=1.0, L=2.0)
    res = check_thm8_1(bad, 1e-3)
    assert not res["pass"] and res["witness"]["x"] is not None
