import numpy as np
import pytest

from zomirror.problems import (ConfigError, ProblemSpec, initial_point, make_problem,
                               parse_config, project_simplex)


def test_quadratic_spectrum_endpoints():
    o = make_problem(ProblemSpec(dim=2, mu=1.0, L=4.0, seed=7))
    np.testing.assert_allclose(np.linalg.eigvalsh(o.meta["A"]), [1.0, 4.0], atol=1e-12)


def test_scalar_quadratic():
    o = make_problem(ProblemSpec(dim=1, mu=2.0, L=2.0, seed=0))
    x = o.x_star + 3.0
    assert o.value_uncounted(x) == pytest.approx(0.5 * 2.0 * 9.0)


def test_deterministic_synthesis():
    a = make_problem(ProblemSpec(dim=4, seed=11))
    b = make_problem(ProblemSpec(dim=4, seed=11))
    np.testing.assert_array_equal(a.meta["A"], b.meta["A"])
    np.testing.assert_array_equal(a.x_star, b.x_star)


def _power_iteration(hvp, dim, iters=200):
    v = np.ones(dim) / np.sqrt(dim)
    lam = 0.0
    for _ in range(iters):
        w = hvp(v)
        lam = float(np.linalg.norm(w))
        v = w / lam
    return lam


def test_log_sum_exp_declared_L_is_upper_bound():
    o = make_problem(ProblemSpec(kind="log-sum-exp", dim=6, mu=1.0, L=10.0, tau=1.0, n_terms=5, seed=2))
    rng = np.random.default_rng(0)
    h = 1e-5
    for _ in range(10):
        x = rng.standard_normal(6)
        hvp = lambda v: (o.gradient(x + h * v) - o.gradient(x - h * v)) / (2 * h)
        assert _power_iteration(hvp, 6) <= o.L * (1 + 1e-6)
    assert np.linalg.norm(o.gradient(o.x_star)) <= 1e-10


def test_simplex_reference_is_optimal():
    o = make_problem(ProblemSpec(kind="simplex-quadratic", dim=4, mu=1.0, L=4.0, seed=1))
    x = o.x_star
    assert x.sum() == pytest.approx(1.0) and np.all(x >= 0)
    # projected-gradient fixed point
    np.testing.assert_allclose(project_simplex(x - 0.1 * o.gradient(x)), x, atol=1e-10)


def test_project_simplex():
    np.testing.assert_allclose(project_simplex(np.array([2.0, 0.0])), [1.0, 0.0])
    np.testing.assert_allclose(project_simplex(np.array([0.5, 0.5])), [0.5, 0.5])


def test_invalid_problem_rejected():
    with pytest.raises(ConfigError, match="mu <= L"):
        make_problem(ProblemSpec(mu=5.0, L=1.0))


def test_parse_config():
    cfg = parse_config("problem = log-sum-exp\ndim = 3  # comment\nsweep_epsilon = 1e-1, 1e-2\nx1 = 1 2 3\n")
    assert cfg.problem.kind == "log-sum-exp" and cfg.problem.dim == 3
    assert cfg.sweep_epsilon == (0.1, 0.01)
    np.testing.assert_array_equal(initial_point(cfg, None), [1.0, 2.0, 3.0])


@pytest.mark.parametrize("text,line,key", [
    ("dim = 3\nfoo = 1\n", 2, "foo"),
    ("dim = three\n", 1, "dim"),
    ("dim\n", 1, None),
    ("dim = 2\ndim = 3\n", 2, "dim"),
])
def test_config_errors_locate_problem(text, line, key):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.line == line and err.value.key == key


def test_config_invariants():
    with pytest.raises(ConfigError, match="entropy mirror requires"):
        parse_config("mirror = entropy\n")
    with pytest.raises(ConfigError, match="x1 has"):
        parse_config("dim = 3\nx1 = 1 2\n")
