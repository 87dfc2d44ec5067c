"""
Circular-cone geometry and robust conic dominance.

``C(x, c) = {y : <x, y> >= c ||x|| ||y||}`` and its Euclidean dual cone
``{w : <x/||x||, w> >= s ||w||}`` with ``s = sqrt(1 - c^2)``.

The robust dominance problem asks for a scaling ``alpha`` such that
``<alpha m, y> >= <x, y>`` for every ``x`` in the ball ``B(m, R)`` and every
``y`` in ``C(x, c)``. :func:`min_dominance_alpha` returns the closed-form
scaling ``1 + R(1+s) / (||m|| (rho - s))``. It is always sufficient, but for
the ball model it is an upper bound on the true minimum, which
:func:`ball_min_dominance_alpha` computes numerically.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

# relative slack on dimensionless cosines
CONE_TOL = 1e-12
DOMINANCE_TOL = 1e-9
DEGENERATE_GAP = 1e-8


class InfeasibleDominanceError(ValueError):
    """``condition`` is ``"uncertainty"`` (||m|| <= R) or ``"cone"`` (rho <= s)."""

    def __init__(self, condition, message):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class ConeSpec:
    axis: np.ndarray
    c: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if not np.linalg.norm(axis) > 0:
            raise ValueError("cone axis must be nonzero")
        if not 0 < self.c <= 1:
            raise ValueError(f"c must lie in (0, 1], got {self.c}")
        object.__setattr__(self, "axis", axis)

    @property
    def s(self):
        return math.sqrt(1.0 - self.c * self.c)

    @property
    def unit_axis(self):
        return self.axis / np.linalg.norm(self.axis)


def cone_contains(cone, y):
    y = np.asarray(y, dtype=float)
    scale = np.linalg.norm(cone.axis) * np.linalg.norm(y)
    return bool(cone.axis @ y >= cone.c * scale - CONE_TOL * scale)


def dual_cone_contains(cone, w):
    w = np.asarray(w, dtype=float)
    nw = np.linalg.norm(w)
    return bool(cone.unit_axis @ w >= cone.s * nw - CONE_TOL * nw)


def alignment_bound(m_norm, R):
    """Smallest cosine between ``m`` and any ``x`` in ``B(m, R)``: sqrt(1 - R^2/||m||^2)."""
    if not 0 <= R < m_norm:
        raise ValueError(f"need 0 <= R < m_norm, got R={R}, m_norm={m_norm}")
    return math.sqrt(1.0 - (R / m_norm) ** 2)


@dataclass(frozen=True)
class DominanceProblem:
    """Ball uncertainty ``B(m, R)`` around a center ``m`` with cone parameter ``c``."""

    m: np.ndarray
    R: float
    c: float

    def __post_init__(self):
        object.__setattr__(self, "m", np.atleast_1d(np.asarray(self.m, dtype=float)))
        if self.R < 0:
            raise ValueError("R must be non-negative")
        if not 0 < self.c <= 1:
            raise ValueError(f"c must lie in (0, 1], got {self.c}")

    @classmethod
    def from_box(cls, lower, upper, c):
        """Enclose the box ``[lower, upper]`` in the ball around its midpoint."""
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if np.any(upper < lower):
            raise ValueError("box needs lower <= upper")
        return cls((lower + upper) / 2.0, float(np.linalg.norm((upper - lower) / 2.0)), c)

    @classmethod
    def from_norms(cls, m_norm, R, c, dim=2):
        m = np.zeros(dim)
        m[0] = m_norm
        return cls(m, R, c)

    @property
    def m_norm(self):
        return float(np.linalg.norm(self.m))

    @property
    def s(self):
        return math.sqrt(1.0 - self.c * self.c)

    @property
    def rho(self):
        if self.m_norm <= self.R:
            return math.nan
        return math.sqrt(1.0 - (self.R / self.m_norm) ** 2)

    def check_feasible(self):
        if self.m_norm <= self.R:
            raise InfeasibleDominanceError(
                "uncertainty", f"need ||m|| > R, got ||m||={self.m_norm!r}, R={self.R!r}")
        if self.rho - self.s < DEGENERATE_GAP:
            raise InfeasibleDominanceError(
                "cone", f"need rho > s, got rho={self.rho!r}, s={self.s!r}")


def min_dominance_alpha(problem):
    """Closed-form robust scaling ``1 + R(1+s) / (||m|| (rho - s))``.

    Raises ``InfeasibleDominanceError`` naming the violated condition.
    """
    problem.check_feasible()
    return 1.0 + problem.R * (1.0 + problem.s) / (problem.m_norm * (problem.rho - problem.s))


def _orthonormal_frame(m):
    """Unit vector along ``m`` and one unit vector orthogonal to it (None in 1-D)."""
    u_hat = m / np.linalg.norm(m)
    if m.size == 1:
        return u_hat, None
    k = int(np.argmin(np.abs(u_hat)))
    e = np.zeros_like(m)
    e[k] = 1.0
    perp = e - (e @ u_hat) * u_hat
    return u_hat, perp / np.linalg.norm(perp)


def _worst_cone_direction(x_hat, w, c, s):
    """Unit ``y`` on the boundary of C(x, c) minimizing ``<w, y>``."""
    w_perp = w - (w @ x_hat) * x_hat
    n = np.linalg.norm(w_perp)
    if n == 0.0:
        return x_hat
    return c * x_hat - s * w_perp / n


def dominance_margin(problem, alpha, n_samples=10_000, seed=0):
    """Worst sampled normalized margin ``<alpha m - x, y> / (||alpha m - x|| ||y||)``.

    Samples ``x`` on and inside the sphere ``||x - m|| = R`` (seeded random
    points plus a deterministic mesh of the sphere in a 2-plane through
    ``m``) and ``y`` on the boundary and interior of ``C(x, c)``, including
    for each ``x`` the boundary direction that minimizes the inner product.

    Returns ``(margin, x, y)`` for the worst sample.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    m = problem.m
    d = m.size
    R, c, s = problem.R, problem.c, problem.s
    rng = np.random.default_rng(seed)

    directions = rng.standard_normal((n_samples, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = np.full(n_samples, R)
    radii[n_samples // 2:] = R * rng.uniform(0.0, 1.0, n_samples - n_samples // 2) ** (1.0 / d)
    points = [m + radii[:, None] * directions]

    u_hat, perp = _orthonormal_frame(m)
    if perp is not None:
        theta = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
        ring = np.cos(theta)[:, None] * u_hat + np.sin(theta)[:, None] * perp
        points.append(m + R * ring)
        if problem.m_norm > R:
            # tangent points of the cone from the origin to the ball
            rho = problem.rho
            for sign in (1.0, -1.0):
                tangent = problem.m_norm * rho * (rho * u_hat + sign * math.sqrt(1 - rho * rho) * perp)
                points.append(tangent[None, :])
    else:
        points.append(np.array([m - R, m + R]).reshape(2, 1))
    X = np.vstack(points)
    X = X[np.linalg.norm(X, axis=1) > 0]

    X_hat = X / np.linalg.norm(X, axis=1, keepdims=True)
    W = alpha * m - X
    W_perp = W - np.sum(W * X_hat, axis=1, keepdims=True) * X_hat
    n_perp = np.linalg.norm(W_perp, axis=1, keepdims=True)
    safe = np.where(n_perp > 0, n_perp, 1.0)
    # boundary direction of C(x, c) minimizing <w, y>
    Y_worst = np.where(n_perp > 0, c * X_hat - s * W_perp / safe, X_hat)
    candidates = [Y_worst]
    if d > 1:
        V = rng.standard_normal(X.shape)
        V -= np.sum(V * X_hat, axis=1, keepdims=True) * X_hat
        nv = np.linalg.norm(V, axis=1, keepdims=True)
        V = np.where(nv > 0, V / np.where(nv > 0, nv, 1.0), 0.0)
        cos_y = rng.uniform(c, 1.0, (X.shape[0], 1))
        candidates.append(cos_y * X_hat + np.sqrt(1.0 - cos_y ** 2) * V)

    nw = np.linalg.norm(W, axis=1)
    best = (math.inf, None, None)
    for Y in candidates:
        ny = np.linalg.norm(Y, axis=1)
        denom = nw * ny
        margins = np.where(denom > 0, np.sum(W * Y, axis=1) / np.where(denom > 0, denom, 1.0), 0.0)
        k = int(np.argmin(margins))
        if margins[k] < best[0]:
            best = (float(margins[k]), X[k], Y[k])
    return best


def verify_dominance(problem, alpha, n_samples=10_000, seed=0):
    """True iff no sampled ``(x, y)`` violates dominance beyond 1e-9 relative slack."""
    margin, _, _ = dominance_margin(problem, alpha, n_samples=n_samples, seed=seed)
    return margin >= -DOMINANCE_TOL


def _required_alpha_2d(m_norm, s, x1, x2):
    """Smallest alpha with ``alpha m - x`` in the dual cone of C(x, c), ``m = m_norm e_1``.

    Solves ``(u1 a - |x|)^2 = s^2 ((a - x1)^2 + x2^2)`` for ``a = alpha m_norm``
    and keeps the largest root with ``u1 a >= |x|``.
    """
    nx = math.hypot(x1, x2)
    u1 = x1 / nx
    qa = u1 * u1 - s * s
    qb = -2.0 * u1 * nx + 2.0 * s * s * x1
    qc = nx * nx - s * s * nx * nx
    disc = qb * qb - 4.0 * qa * qc
    if -1e-12 * (qb * qb + abs(4.0 * qa * qc)) <= disc < 0:
        # double root on the axis, lost to rounding
        disc = 0.0
    if qa <= 0 or disc < 0:
        return math.inf
    a = (-qb + math.sqrt(disc)) / (2.0 * qa)
    return a / m_norm


def ball_min_dominance_alpha(problem, n_mesh=4096):
    """Numerically exact minimal scaling for the ball model.

    By rotational symmetry about ``m`` the worst ``x`` lies on the sphere in
    a 2-plane through ``m``; the required scaling for a fixed ``x`` has a
    closed form, which is maximized over the boundary angle (mesh plus
    bounded scalar refinement).

    Returns ``(alpha, x_worst)`` with ``x_worst`` expressed in the 2-plane
    coordinates ``(along m, orthogonal)``.
    """
    problem.check_feasible()
    M, R, s = problem.m_norm, problem.R, problem.s

    def required(theta):
        return _required_alpha_2d(M, s, M + R * math.cos(theta), R * math.sin(theta))

    grid = np.linspace(0.0, np.pi, n_mesh)
    values = np.array([required(t) for t in grid])
    k = int(np.argmax(values))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, n_mesh - 1)]
    res = minimize_scalar(lambda t: -required(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    theta = res.x if -res.fun >= values[k] else grid[k]
    alpha = max(1.0, required(theta))
    return alpha, np.array([M + R * math.cos(theta), R * math.sin(theta)])


def dominance_witness(problem, alpha):
    """A violating pair ``(x, y)`` in the ball model, or None if ``alpha`` dominates.

    Uses the worst boundary point from :func:`ball_min_dominance_alpha`
    embedded back into the coordinates of ``problem.m``.
    """
    alpha_min, (x1, x2) = ball_min_dominance_alpha(problem)
    if alpha >= alpha_min:
        return None
    u_hat, perp = _orthonormal_frame(problem.m)
    x = x1 * u_hat + (x2 * perp if perp is not None else 0.0)
    x_hat = x / np.linalg.norm(x)
    y = _worst_cone_direction(x_hat, alpha * problem.m - x, problem.c, problem.s)
    return x, y


def worst_case_witness(R, s, rho, t):
    """Planar construction ``u_hat = e1``, ``u = rho e1 + sqrt(1-rho^2) e2``, ``o = R u``.

    By construction ``<u, u_hat> = rho``, ``||o|| = R`` and
    ``<u, t u_hat - o> = t rho - R``. Whether this also breaks the dual-cone
    inequality ``<u, w> >= s ||w||`` depends on ``t``; use
    :func:`witness_inequality` to evaluate it.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    if not 0 <= s < 1 or not 0 < rho <= 1:
        raise ValueError("need s in [0, 1) and rho in (0, 1]")
    if not rho > s:
        raise ValueError(f"need rho > s, got rho={rho}, s={s}")
    threshold = R * (1.0 + s) / (rho - s)
    if not 0 < t < threshold:
        raise ValueError(f"need 0 < t < R(1+s)/(rho-s) = {threshold!r}, got t={t!r}")
    u_hat = np.array([1.0, 0.0])
    u = np.array([rho, math.sqrt(1.0 - rho * rho)])
    return u, u_hat, R * u


def witness_inequality(u, u_hat, o, t, s):
    """Return ``(<u, w>, s ||w||)`` for ``w = t u_hat - o``."""
    w = t * np.asarray(u_hat) - np.asarray(o)
    return float(np.asarray(u) @ w), float(s * np.linalg.norm(w))
