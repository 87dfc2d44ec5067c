import numpy as np
import pytest

from zomirror.problems import ProblemSpec, make_problem


@pytest.fixture
def quad5():
    return make_problem(ProblemSpec(dim=5, mu=1.0, L=4.0, seed=3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
