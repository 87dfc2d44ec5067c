"""
Objective oracles with evaluation accounting and deterministic zeroth-order
vector fields.

The main construction is the scaled coordinate central-difference field
``omega_fd``: with ``m_i = (f(x+eps e_i) - f(x-eps e_i)) / (2 eps)`` and
``r_i = (f(x+eps e_i) + f(x-eps e_i) - 2 f(x)) / (2 eps)`` it returns
``alpha * m`` where

    alpha = 1 + R (1 + s) / (M (rho - s)),   s = sqrt(1 - c^2),
    rho = sqrt(1 - R^2 / M^2),  M = ||m||_2,  R = ||r||_2.
"""

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .conic import DEGENERATE_GAP
from .conic import InfeasibleDominanceError as InfeasibleAlphaError
from .geometry import DomainError


class ObjectiveOracle:
    """Function-value oracle with a thread-safe evaluation counter.

    Parameters
    ----------
    fn : callable
        ``fn(x) -> float``.
    dim : int
    grad : callable, optional
        Analytic gradient; used only for verification and oracle-mismatch
        measurements, never by the zeroth-order fields.
    x_star : array_like, optional
        Known minimizer.
    mu, L : float, optional
        Strong convexity and smoothness moduli (Euclidean).
    domain : callable, optional
        ``domain(x) -> bool``; evaluating outside raises ``DomainError``.
    """

    def __init__(self, fn, dim, grad=None, x_star=None, mu=None, L=None,
                 hessian=None, domain=None, name="objective", meta=None):
        if dim < 1:
            raise ValueError("dim must be a positive integer")
        if mu is not None and mu <= 0:
            raise ValueError("mu must be positive")
        if mu is not None and L is not None and mu > L:
            raise ValueError("need mu <= L")
        self._fn = fn
        self.dim = int(dim)
        self._grad = grad
        self._hessian = hessian
        self.mu = mu
        self.L = L
        self.domain = domain
        self.name = name
        self.meta = dict(meta or {})
        self.x_star = None if x_star is None else np.asarray(x_star, dtype=float)
        # reference value, not charged to the budget
        self.f_star = None if x_star is None else float(fn(self.x_star))
        self._count = 0
        self._lock = threading.Lock()

    def __repr__(self):
        return f"ObjectiveOracle({self.name!r}, dim={self.dim}, mu={self.mu}, L={self.L})"

    @property
    def eval_count(self):
        return self._count

    @property
    def has_gradient(self):
        return self._grad is not None

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if self.domain is not None and not self.domain(x):
            raise DomainError(f"{self.name}: point outside objective domain")
        with self._lock:
            self._count += 1
        return float(self._fn(x))

    __call__ = evaluate

    def gradient(self, x):
        if self._grad is None:
            raise AttributeError(f"{self.name} has no analytic gradient")
        return np.asarray(self._grad(np.asarray(x, dtype=float)), dtype=float)

    def hessian(self, x):
        if self._hessian is None:
            raise AttributeError(f"{self.name} has no analytic Hessian")
        return np.asarray(self._hessian(np.asarray(x, dtype=float)), dtype=float)

    def value_uncounted(self, x):
        """Evaluate without charging the budget (verification only)."""
        return float(self._fn(np.asarray(x, dtype=float)))


@dataclass
class FieldDiagnostics:
    m: np.ndarray
    r: np.ndarray
    M: float
    R: float
    alpha: float
    in_V: bool
    feasible: bool
    infeasible_reason: Optional[str] = None


def central_differences(oracle, x, epsilon, f_center=None):
    """Coordinate central differences.

    Returns ``(m, r, f_center)``. Costs ``2d`` evaluations, plus one for the
    center when ``f_center`` is not supplied.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    x = np.asarray(x, dtype=float)
    d = x.size
    if f_center is None:
        f_center = oracle.evaluate(x)
    m = np.empty(d)
    r = np.empty(d)
    for i in range(d):
        step = np.zeros(d)
        step[i] = epsilon
        f_plus = oracle.evaluate(x + step)
        f_minus = oracle.evaluate(x - step)
        m[i] = (f_plus - f_minus) / (2.0 * epsilon)
        r[i] = (f_plus + f_minus - 2.0 * f_center) / (2.0 * epsilon)
    return m, r, f_center


def compute_alpha(M, R, c):
    """Robust dominance scaling ``1 + R(1+s) / (M(rho-s))``.

    Raises ``InfeasibleAlphaError`` if ``M <= R`` or ``rho <= s``.
    """
    if not 0 < c <= 1:
        raise ValueError(f"c must lie in (0, 1], got {c}")
    if M <= R:
        raise InfeasibleAlphaError("uncertainty", f"M={M!r} <= R={R!r}")
    s = math.sqrt(1.0 - c * c)
    rho = math.sqrt(1.0 - (R / M) ** 2)
    if rho - s < DEGENERATE_GAP:
        raise InfeasibleAlphaError("cone", f"rho={rho!r} <= s={s!r}")
    return 1.0 + R * (1.0 + s) / (M * (rho - s))


def v_membership(M, R, c):
    """True iff ``M <= (1-s)/(1+s) * R``, the finite-difference floor region."""
    if M < 0 or R < 0:
        raise ValueError("M and R must be non-negative")
    if not 0 < c <= 1:
        raise ValueError(f"c must lie in (0, 1], got {c}")
    s = math.sqrt(1.0 - c * c)
    return M <= (1.0 - s) / (1.0 + s) * R


def star_c_from_mu_L(mu, L):
    """Cone parameter ``2 sqrt(mu L) / (mu + L)`` for uniform Hessian bounds."""
    if mu <= 0 or mu > L:
        raise ValueError(f"need 0 < mu <= L, got mu={mu}, L={L}")
    return 2.0 * math.sqrt(mu * L) / (mu + L)


@dataclass
class FiniteDiffField:
    """The scaled central-difference field Omega_{eps,c}.

    Calling the field returns ``(omega, diagnostics)``. When the scaling is
    infeasible the raw ``m`` is returned and ``diagnostics.feasible`` is
    False.
    """

    oracle: ObjectiveOracle
    epsilon: float
    c: float
    reuse_center: bool = True

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.c <= 1:
            raise ValueError("c must lie in (0, 1]")

    def __call__(self, x, f_center=None):
        return omega_fd(self, x, f_center=f_center)

    def evals_per_call(self, center_known):
        d = self.oracle.dim
        return 2 * d if (self.reuse_center and center_known) else 2 * d + 1


def omega_fd(fd_field, x, f_center=None):
    """Evaluate Omega_{eps,c} at ``x``; see :class:`FiniteDiffField`."""
    if not fd_field.reuse_center:
        f_center = None
    m, r, _ = central_differences(fd_field.oracle, x, fd_field.epsilon, f_center=f_center)
    M = float(np.linalg.norm(m))
    R = float(np.linalg.norm(r))
    in_V = v_membership(M, R, fd_field.c)
    try:
        alpha = compute_alpha(M, R, fd_field.c)
    except InfeasibleAlphaError as exc:
        diag = FieldDiagnostics(m, r, M, R, math.nan, in_V, False, exc.condition)
        return m.copy(), diag
    return alpha * m, FieldDiagnostics(m, r, M, R, alpha, in_V, True)


@dataclass
class AnalyticField:
    """Omega = analytic gradient; costs no oracle evaluations."""

    oracle: ObjectiveOracle

    def __call__(self, x, f_center=None):
        return self.oracle.gradient(x), None

    def evals_per_call(self, center_known):
        return 0


def _check_orthonormal(U, tol=1e-10):
    gram = U @ U.T
    if not np.allclose(gram, np.eye(U.shape[0]), rtol=0.0, atol=tol):
        raise ValueError("directions are not orthonormal to 1e-10")


def directional_field(oracle, x, directions, epsilon):
    """Central differences along an orthonormal set (rows of ``directions``).

    Costs ``2 * len(directions)`` evaluations.
    """
    x = np.asarray(x, dtype=float)
    U = np.atleast_2d(np.asarray(directions, dtype=float))
    if U.shape[1] != x.size:
        raise ValueError("direction length does not match x")
    _check_orthonormal(U)
    omega = np.zeros_like(x)
    for u in U:
        slope = (oracle.evaluate(x + epsilon * u) - oracle.evaluate(x - epsilon * u)) / (2.0 * epsilon)
        omega += slope * u
    return omega


def stencil_field(oracle, x, stencil, epsilon):
    """Lattice stencil field ``(1/eps) * sum_j a_j f(x + eps s_j) s_j``.

    ``stencil`` is a sequence of ``(a_j, s_j)`` pairs. Symmetric pairs
    ``(1/2, s)``, ``(1/2, -s)`` reproduce a central difference along ``s``.
    """
    x = np.asarray(x, dtype=float)
    omega = np.zeros_like(x)
    for a, s in stencil:
        s = np.asarray(s, dtype=float)
        omega += a * oracle.evaluate(x + epsilon * s) * s
    return omega / epsilon


@dataclass
class DirectionalField:
    """Orthonormal-direction field; cycles through row blocks of ``directions``.

    With ``block_size`` equal to the dimension this is the full rotated
    central-difference field; smaller blocks use one block per call.
    """

    oracle: ObjectiveOracle
    epsilon: float
    directions: np.ndarray
    block_size: Optional[int] = None
    _calls: int = field(default=0, init=False, repr=False)

    def __post_init__(self):
        self.directions = np.atleast_2d(np.asarray(self.directions, dtype=float))
        _check_orthonormal(self.directions)
        if self.block_size is None:
            self.block_size = self.directions.shape[0]
        if not 1 <= self.block_size <= self.directions.shape[0]:
            raise ValueError("block_size out of range")

    def __call__(self, x, f_center=None):
        n_blocks = math.ceil(self.directions.shape[0] / self.block_size)
        k = self._calls % n_blocks
        self._calls += 1
        block = self.directions[k * self.block_size:(k + 1) * self.block_size]
        return directional_field(self.oracle, x, block, self.epsilon), None

    def evals_per_call(self, center_known):
        return 2 * self.block_size


@dataclass
class StencilField:
    oracle: ObjectiveOracle
    epsilon: float
    stencil: list

    def __call__(self, x, f_center=None):
        return stencil_field(self.oracle, x, self.stencil, self.epsilon), None

    def evals_per_call(self, center_known):
        return len(self.stencil)


def coordinate_stencil(dim):
    """Symmetric +-e_i stencil with weights 1/2 (central differences)."""
    eye = np.eye(dim)
    return [(w, sign * eye[i]) for i in range(dim) for w, sign in ((0.5, 1.0), (0.5, -1.0))]
