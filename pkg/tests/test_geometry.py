import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from zomirror.geometry import (DomainError, L1_LINF_NORMS, d_f_omega, entropy_mirror,
                               euclidean_mirror, norm_pair)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
positive = st.floats(1e-3, 20, allow_nan=False, allow_infinity=False)


def vec(elements, n=4):
    return arrays(np.float64, n, elements=elements)


def test_euclidean_bregman_is_half_squared_distance():
    phi = euclidean_mirror()
    assert phi.bregman(np.array([1.0, 2.0]), np.array([0.0, 0.0])) == 2.5
    assert phi.sigma == phi.beta == 1.0


def test_entropy_bregman_is_kl_on_simplex():
    phi = entropy_mirror(simplex=True)
    x = np.array([0.5, 0.25, 0.25])
    y = np.full(3, 1 / 3)
    kl = float(np.sum(x * np.log(x / y)))
    assert phi.bregman(x, y) == pytest.approx(kl, abs=1e-15)


def test_entropy_domain_guard():
    phi = entropy_mirror()
    with pytest.raises(DomainError):
        phi.gradient(np.array([0.5, 0.0]))
    with pytest.raises(DomainError):
        phi.bregman(np.array([0.5, np.nan]), np.array([0.5, 0.5]))


def test_simplex_inverse_gradient_is_softmax():
    phi = entropy_mirror(simplex=True)
    out = phi.gradient_inverse(np.array([0.0, np.log(3.0)]))
    np.testing.assert_allclose(out, [0.25, 0.75])


@pytest.mark.parametrize("phi", [euclidean_mirror(), entropy_mirror()])
def test_gradient_roundtrip(phi):
    x = np.array([0.3, 1.7, 2.2])
    np.testing.assert_allclose(phi.gradient_inverse(phi.gradient(x)), x, rtol=1e-14)


@settings(max_examples=60, deadline=None)
@given(vec(positive), vec(positive))
def test_entropy_bregman_symmetrized_identity(x, y):
    phi = entropy_mirror()
    lhs = phi.bregman(x, y) + phi.bregman(y, x)
    rhs = float((phi.gradient(x) - phi.gradient(y)) @ (x - y))
    assert lhs >= -1e-12
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(vec(positive), vec(positive))
def test_conjugate_duality(x, y):
    phi = entropy_mirror()
    primal = phi.bregman(x, y)
    dual = phi.conjugate_bregman(phi.gradient(y), phi.gradient(x))
    assert primal == pytest.approx(dual, rel=1e-7, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(vec(finite), vec(finite))
def test_euclidean_bregman_symmetric(x, y):
    phi = euclidean_mirror()
    assert phi.bregman(x, y) == pytest.approx(phi.bregman(y, x))


@settings(max_examples=100, deadline=None)
@given(vec(finite), vec(finite))
def test_holder_l1_linf(u, v):
    pair = norm_pair("l1-linf")
    assert abs(float(u @ v)) <= pair.primal_norm(u) * pair.dual_norm(v) * (1 + 1e-12) + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(positive, min_size=3, max_size=3), st.lists(positive, min_size=3, max_size=3))
def test_pinsker_on_simplex(a, b):
    x = np.array(a) / sum(a)
    y = np.array(b) / sum(b)
    phi = entropy_mirror(simplex=True)
    assert phi.bregman(x, y) >= 0.5 * L1_LINF_NORMS.primal_norm(x - y) ** 2 - 1e-12


def test_norm_pair_lookup():
    assert norm_pair("euclidean-euclidean").primal_norm(np.array([3.0, 4.0])) == 5.0
    with pytest.raises(ValueError):
        norm_pair("l2-l7")


def test_d_f_omega_reduces_to_bregman_of_f():
    # f = 0.5||x||^2, Omega = grad f: divergence equals 0.5||x - y||^2
    x, y = np.array([1.0, -1.0]), np.array([0.5, 2.0])
    f = lambda z: 0.5 * float(z @ z)
    assert d_f_omega(f(x), f(y), y, x, y) == pytest.approx(0.5 * float((x - y) @ (x - y)))


def test_d_f_omega_shape_mismatch():
    with pytest.raises(ValueError):
        d_f_omega(0.0, 0.0, np.zeros(3), np.zeros(2), np.zeros(2))
