"""
Mirror maps, norm pairs and Bregman machinery.

Two generators are shipped: the Euclidean half squared norm and the
negative entropy (optionally restricted to the probability simplex).
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import kl_div, softmax

# smallest coordinate the entropy generator accepts; below this log() underflows
ENTROPY_FLOOR = 1e-300


class DomainError(ValueError):
    """A point left the domain of a mirror map or an objective."""


@dataclass(frozen=True)
class NormPair:
    name: str
    primal_norm: Callable[[np.ndarray], float]
    dual_norm: Callable[[np.ndarray], float]


def _l2(v):
    return float(np.linalg.norm(np.asarray(v, dtype=float), 2))


def _l1(v):
    return float(np.sum(np.abs(np.asarray(v, dtype=float))))


def _linf(v):
    v = np.asarray(v, dtype=float)
    return float(np.max(np.abs(v))) if v.size else 0.0


EUCLIDEAN_NORMS = NormPair("euclidean-euclidean", _l2, _l2)
L1_LINF_NORMS = NormPair("l1-linf", _l1, _linf)


def norm_pair(name):
    """Look up a shipped norm pair by name."""
    pairs = {p.name: p for p in (EUCLIDEAN_NORMS, L1_LINF_NORMS)}
    try:
        return pairs[name]
    except KeyError:
        raise ValueError(f"unknown norm pair {name!r}; expected one of {sorted(pairs)}") from None


class MirrorMap:
    """Strictly convex generator Phi with gradient, inverse gradient and divergence.

    Subclasses provide ``value``, ``gradient``, ``gradient_inverse`` and
    ``conjugate``. ``sigma``/``beta`` are the strong-convexity and smoothness
    moduli with respect to ``norms.primal_norm``; either may be ``None`` when
    no finite modulus is known.
    """

    name = "abstract"
    domain_kind = "full-space"

    def __init__(self, sigma, beta, norms):
        if sigma is not None and sigma <= 0:
            raise ValueError("sigma must be positive")
        if sigma is not None and beta is not None and sigma > beta:
            raise ValueError("need sigma <= beta")
        self.sigma = sigma
        self.beta = beta
        self.norms = norms

    def __repr__(self):
        return f"{type(self).__name__}(sigma={self.sigma}, beta={self.beta}, norms={self.norms.name!r})"

    def check_domain(self, x):
        return np.asarray(x, dtype=float)

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def gradient_inverse(self, theta):
        raise NotImplementedError

    def conjugate(self, theta):
        raise NotImplementedError

    def bregman(self, x, y):
        """D_Phi(x || y) = Phi(x) - Phi(y) - <grad Phi(y), x - y>."""
        x = self.check_domain(x)
        y = self.check_domain(y)
        return float(self.value(x) - self.value(y) - self.gradient(y) @ (x - y))

    def conjugate_bregman(self, u, v):
        """Bregman divergence of the Fenchel conjugate, D_{Phi*}(u || v)."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return float(self.conjugate(u) - self.conjugate(v) - self.gradient_inverse(v) @ (u - v))


class EuclideanMirror(MirrorMap):
    name = "euclidean"
    domain_kind = "full-space"

    def __init__(self):
        super().__init__(1.0, 1.0, EUCLIDEAN_NORMS)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ x)

    def gradient(self, x):
        return np.array(x, dtype=float)

    def gradient_inverse(self, theta):
        return np.array(theta, dtype=float)

    def conjugate(self, theta):
        theta = np.asarray(theta, dtype=float)
        return 0.5 * float(theta @ theta)

    def bregman(self, x, y):
        diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return 0.5 * float(diff @ diff)


class EntropyMirror(MirrorMap):
    """Negative entropy ``sum x_i log x_i`` on the positive orthant.

    With ``simplex=True`` the inverse gradient is the softmax, i.e. the
    entropic update is followed by its Bregman projection onto the simplex,
    and sigma = 1 with respect to the l1 norm (Pinsker).
    """

    name = "entropy"
    domain_kind = "positive-orthant"

    def __init__(self, simplex=False, sigma=None, beta=None):
        if simplex and sigma is None:
            sigma = 1.0
        super().__init__(sigma, beta, L1_LINF_NORMS)
        self.simplex = simplex

    def check_domain(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)) or np.any(x <= ENTROPY_FLOOR):
            raise DomainError(f"entropy mirror needs coordinates > {ENTROPY_FLOOR:g}, got min {np.min(x)!r}")
        return x

    def value(self, x):
        x = self.check_domain(x)
        return float(np.sum(x * np.log(x)))

    def gradient(self, x):
        x = self.check_domain(x)
        return np.log(x) + 1.0

    def gradient_inverse(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.simplex:
            return softmax(theta)
        return np.exp(theta - 1.0)

    def conjugate(self, theta):
        theta = np.asarray(theta, dtype=float)
        return float(np.sum(np.exp(theta - 1.0)))

    def bregman(self, x, y):
        x = self.check_domain(x)
        y = self.check_domain(y)
        return float(np.sum(kl_div(x, y)))


def euclidean_mirror():
    """Phi(x) = 0.5 ||x||_2^2; gradient and its inverse are the identity."""
    return EuclideanMirror()


def entropy_mirror(simplex=False, sigma=None, beta=None):
    """Negative-entropy mirror map; see :class:`EntropyMirror`."""
    return EntropyMirror(simplex=simplex, sigma=sigma, beta=beta)


def d_f_omega(f_at_x, f_at_y, omega_at_y, x, y):
    """Omega-driven divergence D_{f,Omega}(x || y).

    Returns ``<Omega(y), y - x> - f(y) + f(x)``. With ``Omega = grad f`` this
    is the classical Bregman divergence of ``f``.
    """
    omega_at_y = np.asarray(omega_at_y, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (omega_at_y.shape == x.shape == y.shape):
        raise ValueError(f"dimension mismatch: omega {omega_at_y.shape}, x {x.shape}, y {y.shape}")
    return float(omega_at_y @ (y - x)) - f_at_y + f_at_x
