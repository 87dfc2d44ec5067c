"""
Analytical verifiers: stepsize feasibility under oracle mismatch, angle bounds
under uniform Hessian bounds, the finite-difference floor region, and the
Euclidean downward-closed stepsize property.

``run_checks`` bundles them into a dictionary keyed by check tag
(``thm5_1``, ``thm6_3``, ``thm6_6``, ``thm8_1``, ``propA``, ``thmB``,
``thm9_1``), each entry carrying a ``pass`` flag and, on failure, a witness.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm as normal_dist
from scipy.stats import qmc

from . import conic
from .descent import certificate, mirror_step
from .geometry import EUCLIDEAN_NORMS, euclidean_mirror
from .oracles import FiniteDiffField, central_differences, star_c_from_mu_L, v_membership


@dataclass(frozen=True)
class FeasibilityInputs:
    sigma: float
    beta: float
    L: float
    delta: float

    def __post_init__(self):
        if not 0 < self.sigma <= self.beta:
            raise ValueError("need 0 < sigma <= beta")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if not self.delta >= 0:
            raise ValueError("delta must be non-negative")


@dataclass
class FloorEstimate:
    radius: float
    floor_value: float
    sample_count: int
    analytic_bound: Optional[float] = None

    @property
    def consistent(self):
        if self.analytic_bound is None:
            return True
        return self.floor_value <= self.analytic_bound * (1 + 1e-12) + 1e-15


def delta_ratio(omega, grad, dual_norm=EUCLIDEAN_NORMS.dual_norm):
    """Relative oracle mismatch ``||Omega - grad f||_* / ||Omega||_*``.

    Zero when the two coincide; ``inf`` when ``Omega`` vanishes but the
    gradient does not.
    """
    omega = np.asarray(omega, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if np.array_equal(omega, grad):
        return 0.0
    denom = dual_norm(omega)
    if denom == 0:
        return math.inf
    return dual_norm(omega - grad) / denom


def eta_feasible_max(inputs):
    """Largest stepsize ``(sigma^2 / (L beta)) (1 - 2 beta delta / sigma)`` guaranteed to certify.

    Returns 0 when ``delta >= sigma / (2 beta)``.
    """
    slack = 1.0 - 2.0 * inputs.beta * inputs.delta / inputs.sigma
    if not slack > 0:
        return 0.0
    return inputs.sigma ** 2 / (inputs.L * inputs.beta) * slack


def kantorovich_cos(mu, L):
    """Lower bound ``2 sqrt(mu L) / (mu + L)`` on the cosine between grad f(x) and x - x_*."""
    if mu <= 0 or mu > L:
        raise ValueError(f"need 0 < mu <= L, got mu={mu}, L={L}")
    return 2.0 * math.sqrt(mu * L) / (mu + L)


def tightness_instance(mu, L):
    """Quadratic ``A = diag(L, mu)`` and ``v = (sqrt(mu), sqrt(L))`` attaining the angle bound."""
    if mu <= 0 or mu > L:
        raise ValueError(f"need 0 < mu <= L, got mu={mu}, L={L}")
    A = np.diag([float(L), float(mu)])
    v = np.array([math.sqrt(mu), math.sqrt(L)])
    Av = A @ v
    cos_theta = float(Av @ v / (np.linalg.norm(Av) * np.linalg.norm(v)))
    return A, v, cos_theta


def spd_cosine(A, v):
    Av = A @ v
    return float(Av @ v / (np.linalg.norm(Av) * np.linalg.norm(v)))


def random_spd(dim, mu, L, rng):
    """Seeded SPD matrix whose spectrum lies in [mu, L] with both ends attained."""
    Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eig = rng.uniform(mu, L, dim)
    eig[0], eig[-1] = mu, L
    return (Q * eig) @ Q.T


def floor_radius(mu, L, epsilon, d):
    """Radius ``(mu + L) / (2 mu) * eps * sqrt(d)`` of the ball containing the floor region."""
    if mu <= 0 or mu > L or not epsilon > 0 or d < 1:
        raise ValueError("need 0 < mu <= L, epsilon > 0, d >= 1")
    return (mu + L) / (2.0 * mu) * epsilon * math.sqrt(d)


def sphere_mesh(dim, n, seed=0):
    """Deterministic unit directions: circle / Fibonacci sphere for d <= 3, scrambled Sobol otherwise."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if dim == 3:
        k = np.arange(n) + 0.5
        z = 1.0 - 2.0 * k / n
        phi = np.pi * (1.0 + 5 ** 0.5) * k
        rad = np.sqrt(1.0 - z * z)
        return np.column_stack([rad * np.cos(phi), rad * np.sin(phi), z])
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    u = sampler.random(n)
    g = normal_dist.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def floor_value(oracle, radius, mesh=1024, seed=0):
    """Estimate ``max_{||x - x_*|| <= radius} f(x) - f(x_*)``.

    Evaluates the center, a deterministic sphere mesh, the coordinate axes and
    (when the oracle has a Hessian) its eigendirections at ``x_*``. For
    L-smooth oracles the analytic overestimate ``(L/2) radius^2`` is returned
    alongside.
    """
    if oracle.x_star is None:
        raise ValueError("floor_value needs a known minimizer")
    x_star, f_star = oracle.x_star, oracle.f_star
    analytic = None if oracle.L is None else 0.5 * oracle.L * radius ** 2
    if radius <= 0:
        return FloorEstimate(0.0, 0.0, 1, analytic)
    d = oracle.dim
    dirs = [sphere_mesh(d, mesh, seed), np.eye(d), -np.eye(d)]
    try:
        _, vecs = np.linalg.eigh(oracle.hessian(x_star))
        dirs += [vecs.T, -vecs.T]
    except AttributeError:
        pass
    dirs = np.vstack(dirs)
    values = [oracle.value_uncounted(x_star + radius * u) - f_star for u in dirs]
    best = max(0.0, max(values))
    return FloorEstimate(float(radius), float(best), len(values) + 1, analytic)


def fd_error_check(oracle, x, epsilon):
    """Compare ``||m(x) - grad f(x)||`` with ``L eps sqrt(d) / 2``; returns ``(err, bound, ok)``."""
    m, _, _ = central_differences(oracle, x, epsilon)
    err = float(np.linalg.norm(m - oracle.gradient(x)))
    bound = oracle.L * epsilon * math.sqrt(oracle.dim) / 2.0
    return err, bound, err <= bound * (1 + 1e-9)


def distance_threshold_check(oracle, x, epsilon):
    """Outside radius ``(mu+L)/(2mu) eps sqrt(d)`` around ``x_*`` we must have ``M > (mu/L) R``.

    Returns True when the implication holds at ``x`` (vacuously inside).
    """
    radius = floor_radius(oracle.mu, oracle.L, epsilon, oracle.dim)
    if np.linalg.norm(np.asarray(x) - oracle.x_star) <= radius:
        return True
    m, r, _ = central_differences(oracle, x, epsilon)
    return float(np.linalg.norm(m)) > oracle.mu / oracle.L * float(np.linalg.norm(r))


def downward_closed_scan(oracle, x, s, eta_grid):
    """Certificate feasibility along an ascending stepsize grid, Euclidean mirror.

    ``h(eta) = f(x - eta s) - f(x) + eta ||s||^2 / 2``; a stepsize is
    feasible iff ``h <= 0`` (1e-12 relative slack). Returns
    ``(flags, is_interval)`` where ``is_interval`` means no feasible entry
    follows an infeasible one.
    """
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    f_x = oracle.evaluate(x)
    tol = 1e-12 * max(1.0, abs(f_x))
    flags = []
    for eta in eta_grid:
        h = oracle.evaluate(x - eta * s) - f_x + 0.5 * eta * float(s @ s)
        flags.append(bool(h <= tol))
    seen_infeasible = False
    is_interval = True
    for ok in flags:
        if not ok:
            seen_infeasible = True
        elif seen_infeasible:
            is_interval = False
            break
    return flags, is_interval


# ---------------------------------------------------------------------------
# check suite


def _mesh_points(oracle, scale, n, rng):
    """Seeded points around ``x_*`` at log-spread distances up to ``scale``."""
    d = oracle.dim
    dirs = rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = scale * 10.0 ** rng.uniform(-3.0, 0.5, n)
    return oracle.x_star + radii[:, None] * dirs


def _result(passed, n, witness=None, **extra):
    out = {"pass": bool(passed), "n": int(n), "witness": witness}
    out.update(extra)
    return out


def check_thm5_1(oracle, epsilon, n=200, seed=0):
    """One Euclidean step at ``eta_feasible_max`` certifies whenever delta < 1/2."""
    rng = np.random.default_rng(seed)
    mirror = euclidean_mirror()
    c = star_c_from_mu_L(oracle.mu, oracle.L)
    fd = FiniteDiffField(oracle, epsilon, c)
    scale = 10.0 * floor_radius(oracle.mu, oracle.L, epsilon, oracle.dim)
    tested = zero_ok = 0
    for k, y in enumerate(_mesh_points(oracle, scale, n, rng)):
        grad = oracle.gradient(y)
        if k % 2 == 0:
            omega, _ = fd(y)
        else:
            noise = rng.standard_normal(oracle.dim)
            omega = grad + rng.uniform(0.0, 0.8) * np.linalg.norm(grad) * noise / np.linalg.norm(noise)
        delta = delta_ratio(omega, grad)
        eta = eta_feasible_max(FeasibilityInputs(mirror.sigma, mirror.beta, oracle.L, delta))
        if delta >= mirror.sigma / (2 * mirror.beta):
            if eta != 0.0:
                return _result(False, tested, {"y": y, "delta": delta, "eta": eta})
            zero_ok += 1
            continue
        f_y = oracle.evaluate(y)
        y_next = mirror_step(mirror, y, omega, eta)
        lhs, rhs, _, _ = certificate(mirror, oracle, omega, y, y_next, eta, f_y)
        tested += 1
        if lhs > rhs + 1e-10 * max(1.0, abs(rhs)):
            return _result(False, tested, {"y": y, "delta": delta, "eta": eta, "lhs": lhs, "rhs": rhs})
    return _result(True, tested, zero_step_cases=zero_ok)


def check_thm6_3(oracle, n=100, seed=0):
    """Angle bound on seeded SPD matrices and on the oracle at mesh points."""
    rng = np.random.default_rng(seed)
    mu, L = oracle.mu, oracle.L
    bound = kantorovich_cos(mu, L)
    worst = math.inf
    for _ in range(n):
        A = random_spd(max(oracle.dim, 2), mu, L, rng)
        v = rng.standard_normal(A.shape[0])
        cos = spd_cosine(A, v)
        worst = min(worst, cos)
        if cos < bound - 1e-12:
            return _result(False, n, {"A": A, "v": v, "cos": cos, "bound": bound})
    if oracle.has_gradient and oracle.x_star is not None:
        for x in _mesh_points(oracle, 1.0, n, rng):
            g = oracle.gradient(x)
            diff = x - oracle.x_star
            cos = float(g @ diff / (np.linalg.norm(g) * np.linalg.norm(diff)))
            worst = min(worst, cos)
            if cos < bound - 1e-9:
                return _result(False, 2 * n, {"x": x, "cos": cos, "bound": bound})
    return _result(True, 2 * n, bound=bound, worst_cos=worst)


def check_propA(mu, L):
    _, _, cos = tightness_instance(mu, L)
    bound = kantorovich_cos(mu, L)
    return _result(abs(cos - bound) <= 1e-12, 1, None if abs(cos - bound) <= 1e-12 else {"cos": cos},
                   cos_theta=cos, bound=bound)


def check_thm6_6(oracle, epsilon, n=10_000, seed=0):
    """Every mesh point flagged as floor region lies within the floor radius."""
    rng = np.random.default_rng(seed)
    c = star_c_from_mu_L(oracle.mu, oracle.L)
    radius = floor_radius(oracle.mu, oracle.L, epsilon, oracle.dim)
    flagged = 0
    for x in _mesh_points(oracle, radius, n, rng):
        m, r, _ = central_differences(oracle, x, epsilon)
        if v_membership(float(np.linalg.norm(m)), float(np.linalg.norm(r)), c):
            flagged += 1
            dist = float(np.linalg.norm(x - oracle.x_star))
            if dist > radius:
                return _result(False, n, {"x": x, "distance": dist, "radius": radius})
    return _result(True, n, flagged=flagged, radius=radius)


def check_thm8_1(oracle, epsilon, n=100, seed=0):
    """Finite-difference error, curvature bound ``0 <= r_i <= L eps / 2`` and the distance threshold."""
    rng = np.random.default_rng(seed)
    radius = floor_radius(oracle.mu, oracle.L, epsilon, oracle.dim)
    half = oracle.L * epsilon / 2.0
    for x in _mesh_points(oracle, 4.0 * radius, n, rng):
        err, bound, ok = fd_error_check(oracle, x, epsilon)
        if not ok:
            return _result(False, n, {"x": x, "part": "fd_error", "err": err, "bound": bound})
        _, r, _ = central_differences(oracle, x, epsilon)
        if np.any(r > half * (1 + 1e-9) + 1e-15) or np.any(r < -1e-12):
            i = int(np.argmax(np.abs(r)))
            return _result(False, n, {"x": x, "part": "curvature", "r_i": float(r[i]), "bound": half})
        if not distance_threshold_check(oracle, x, epsilon):
            return _result(False, n, {"x": x, "part": "distance_threshold"})
    return _result(True, n)


def check_thmB(oracle, epsilon, n=100, grid_points=50, seed=0):
    """Certificate-feasible stepsizes form an interval for the Euclidean mirror."""
    rng = np.random.default_rng(seed)
    c = star_c_from_mu_L(oracle.mu, oracle.L)
    fd = FiniteDiffField(oracle, epsilon, c)
    grid = np.arange(grid_points) * (4.0 / (oracle.L * grid_points))
    for x in _mesh_points(oracle, 1.0, n, rng):
        s, _ = fd(x)
        flags, is_interval = downward_closed_scan(oracle, x, s, grid)
        if not is_interval:
            return _result(False, n, {"x": x, "flags": flags})
    return _result(True, n)


def check_thm9_1(n_samples=10_000, seed=0):
    """Closed-form scaling dominates on a grid; also reports the exact ball minimum."""
    worst_ratio = 0.0
    cells = 0
    for m_norm in (0.5, 1.0, 2.0):
        for ratio in (0.1, 0.3, 0.5):
            for c in (0.6, 0.8, 0.95):
                problem = conic.DominanceProblem.from_norms(m_norm, ratio * m_norm, c)
                if problem.rho - problem.s < 0.05:
                    continue
                cells += 1
                alpha = conic.min_dominance_alpha(problem)
                if not conic.verify_dominance(problem, alpha, n_samples, seed):
                    return _result(False, cells, {"m_norm": m_norm, "R": ratio * m_norm, "c": c, "alpha": alpha})
                exact, _ = conic.ball_min_dominance_alpha(problem)
                if exact > alpha * (1 + 1e-9):
                    return _result(False, cells, {"m_norm": m_norm, "R": ratio * m_norm, "c": c,
                                                  "alpha": alpha, "exact": exact})
                worst_ratio = max(worst_ratio, exact / alpha)
    return _result(True, cells, max_exact_over_closed_form=worst_ratio)


def run_checks(oracle, epsilon, seed=0, unconstrained=True, sizes=None):
    """Run every verifier on ``oracle``; returns ``{tag: result}``.

    Checks that need an unconstrained minimizer with known ``mu``, ``L`` and
    an analytic gradient are reported as skipped (and passing) otherwise.
    """
    sizes = dict(sizes or {})
    applicable = (unconstrained and oracle.mu is not None and oracle.L is not None
                  and oracle.x_star is not None and oracle.has_gradient)
    skipped = {"pass": True, "n": 0, "witness": None, "skipped": "needs unconstrained minimizer, mu, L and gradient"}
    checks = {}
    if applicable:
        checks["thm5_1"] = check_thm5_1(oracle, epsilon, n=sizes.get("thm5_1", 200), seed=seed)
        checks["thm6_3"] = check_thm6_3(oracle, n=sizes.get("thm6_3", 100), seed=seed)
        checks["thm6_6"] = check_thm6_6(oracle, epsilon, n=sizes.get("thm6_6", 10_000), seed=seed)
        checks["thm8_1"] = check_thm8_1(oracle, epsilon, n=sizes.get("thm8_1", 100), seed=seed)
        checks["thmB"] = check_thmB(oracle, epsilon, n=sizes.get("thmB", 100), seed=seed)
    else:
        for tag in ("thm5_1", "thm6_3", "thm6_6", "thm8_1", "thmB"):
            checks[tag] = dict(skipped)
    if oracle.mu is not None and oracle.L is not None:
        checks["propA"] = check_propA(oracle.mu, oracle.L)
    else:
        checks["propA"] = dict(skipped)
    checks["thm9_1"] = check_thm9_1(n_samples=sizes.get("thm9_1", 10_000), seed=seed)
    return checks
