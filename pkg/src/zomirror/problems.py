"""
Problem zoo and run configuration.

Three deterministic instance families are available, all synthesized from a
seed:

``quadratic-spectrum``
    ``f(x) = 0.5 (x - x_*)^T A (x - x_*)`` with ``A = Q^T diag(lambda) Q``,
    ``lambda`` log-spaced in ``[mu, L]`` (both ends attained).
``log-sum-exp``
    ``tau log sum_k exp((<a_k, x> - b_k) / tau) + (mu/2) ||x||^2`` with declared
    ``L = mu + max_k ||a_k||^2 / tau``.
``simplex-quadratic``
    a strongly convex quadratic minimized over the probability simplex.

Configuration files are flat ``key = value`` text; ``#`` starts a comment.
"""

import math
from dataclasses import dataclass, replace
from dataclasses import field as dc_field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import logsumexp, softmax

from .descent import StepConfig
from .oracles import ObjectiveOracle

PROBLEM_KINDS = ("quadratic-spectrum", "log-sum-exp", "simplex-quadratic")
MIRRORS = ("euclidean", "entropy")
FIELDS = ("analytic-grad", "fd-coordinate", "fd-directional", "fd-stencil")


class ConfigError(ValueError):
    """Invalid configuration; ``line`` and ``key`` locate the problem when known."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"field {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class ProblemSpec:
    kind: str = "quadratic-spectrum"
    dim: int = 2
    mu: float = 1.0
    L: float = 4.0
    seed: int = 0
    tau: float = 1.0
    n_terms: int = 5

    def validate(self):
        if self.kind not in PROBLEM_KINDS:
            raise ConfigError(f"unknown problem kind {self.kind!r}", key="problem")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1", key="dim")
        if not 0 < self.mu <= self.L:
            raise ConfigError(f"need 0 < mu <= L, got mu={self.mu}, L={self.L}", key="mu")
        if self.kind == "log-sum-exp" and (self.tau <= 0 or self.n_terms < 1):
            raise ConfigError("log-sum-exp needs tau > 0 and n_terms >= 1", key="tau")
        if self.kind == "simplex-quadratic" and self.dim < 2:
            raise ConfigError("simplex-quadratic needs dim >= 2", key="dim")


def _spectrum(dim, mu, L):
    if dim == 1:
        return np.array([float(mu)]) if mu == L else np.array([float(L)])
    return np.geomspace(mu, L, dim)


def _orthogonal(dim, rng):
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    return Q * np.sign(np.diag(R))


def quadratic_matrix(dim, mu, L, rng):
    lam = _spectrum(dim, mu, L)
    Q = _orthogonal(dim, rng)
    A = Q.T @ np.diag(lam) @ Q
    return 0.5 * (A + A.T)


def _quadratic(spec):
    rng = np.random.default_rng(spec.seed)
    A = quadratic_matrix(spec.dim, spec.mu, spec.L, rng)
    x_star = rng.standard_normal(spec.dim)

    def fn(x):
        dx = x - x_star
        return 0.5 * float(dx @ A @ dx)

    return ObjectiveOracle(fn, spec.dim, grad=lambda x: A @ (x - x_star), x_star=x_star,
                           mu=spec.mu, L=spec.L, hessian=lambda x: A, name="quadratic-spectrum",
                           meta={"A": A})


def newton_minimize(grad, hessian, x0, tol=1e-12, max_iter=100):
    """Damped-free Newton iteration for smooth strongly convex objectives."""
    x = np.array(x0, dtype=float)
    for _ in range(max_iter):
        g = grad(x)
        if np.linalg.norm(g) <= tol:
            break
        x = x - np.linalg.solve(hessian(x), g)
    return x


def _log_sum_exp(spec):
    rng = np.random.default_rng(spec.seed)
    k, d, tau, mu = spec.n_terms, spec.dim, spec.tau, spec.mu
    A = rng.standard_normal((k, d))
    b = rng.standard_normal(k)
    # rescale rows so the declared smoothness matches the requested L
    if spec.L > mu:
        scale = math.sqrt((spec.L - mu) * tau / np.max(np.sum(A * A, axis=1)))
        A *= scale
    else:
        A *= 0.0
    L_decl = mu + float(np.max(np.sum(A * A, axis=1))) / tau

    def fn(x):
        return tau * float(logsumexp((A @ x - b) / tau)) + 0.5 * mu * float(x @ x)

    def grad(x):
        p = softmax((A @ x - b) / tau)
        return A.T @ p + mu * x

    def hess(x):
        p = softmax((A @ x - b) / tau)
        Ap = A.T @ p
        return (A.T * p) @ A / tau - np.outer(Ap, Ap) / tau + mu * np.eye(d)

    x_star = newton_minimize(grad, hess, np.zeros(d))
    return ObjectiveOracle(fn, d, grad=grad, x_star=x_star, mu=mu, L=L_decl, hessian=hess,
                           name="log-sum-exp", meta={"A": A, "b": b, "tau": tau})


def project_simplex(v):
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    k = idx[u - css / idx > 0][-1]
    return np.maximum(v - css[k - 1] / k, 0.0)


def simplex_reference(A, b, tol=1e-13, max_iter=200_000):
    """Projected-gradient reference solve of ``min 0.5 x^T A x - b^T x`` over the simplex."""
    L = float(np.linalg.eigvalsh(A)[-1])
    x = np.full(b.size, 1.0 / b.size)
    for _ in range(max_iter):
        x_new = project_simplex(x - (A @ x - b) / L)
        if np.linalg.norm(x_new - x) <= tol:
            return x_new
        x = x_new
    return x


def _simplex_quadratic(spec):
    rng = np.random.default_rng(spec.seed)
    A = quadratic_matrix(spec.dim, spec.mu, spec.L, rng)
    # target well inside the simplex so the minimizer is interior-ish but not trivial
    target = rng.dirichlet(np.full(spec.dim, 2.0))
    b = A @ target + 0.1 * rng.standard_normal(spec.dim)
    x_star = simplex_reference(A, b)

    def fn(x):
        return 0.5 * float(x @ A @ x) - float(b @ x)

    return ObjectiveOracle(fn, spec.dim, grad=lambda x: A @ x - b, x_star=x_star, mu=spec.mu,
                           L=spec.L, hessian=lambda x: A, name="simplex-quadratic",
                           meta={"A": A, "b": b, "constrained": True})


def make_problem(spec):
    """Synthesize the oracle described by ``spec`` (deterministic in ``spec.seed``)."""
    spec.validate()
    builders = {
        "quadratic-spectrum": _quadratic,
        "log-sum-exp": _log_sum_exp,
        "simplex-quadratic": _simplex_quadratic,
    }
    return builders[spec.kind](spec)


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemSpec = dc_field(default_factory=ProblemSpec)
    mirror: str = "euclidean"
    field: str = "fd-coordinate"
    epsilon: float = 1e-3
    c_policy: str = "from-mu-L"
    step: StepConfig = dc_field(default_factory=StepConfig)
    t_max: int = 100
    stop: str = "iters"
    gap_tol: Optional[float] = None
    output_dir: str = "out"
    x1: Optional[tuple] = None
    x1_radius: float = 1.0
    block_size: Optional[int] = None
    reuse_center: bool = True
    check_seed: int = 0
    sweep_epsilon: tuple = ()
    sweep_rule: tuple = ()

    def validate(self):
        self.problem.validate()
        if self.mirror not in MIRRORS:
            raise ConfigError(f"unknown mirror {self.mirror!r}", key="mirror")
        if self.field not in FIELDS:
            raise ConfigError(f"unknown field {self.field!r}", key="field")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive", key="epsilon")
        if self.c_policy != "from-mu-L":
            try:
                c = float(self.c_policy)
            except ValueError:
                raise ConfigError(f"c_policy must be 'from-mu-L' or a number, got {self.c_policy!r}",
                                  key="c_policy") from None
            if not 0 < c <= 1:
                raise ConfigError("explicit c must lie in (0, 1]", key="c_policy")
        if self.mirror == "entropy" and self.problem.kind != "simplex-quadratic":
            raise ConfigError("entropy mirror requires the simplex-quadratic problem", key="mirror")
        if self.problem.kind == "simplex-quadratic" and self.mirror != "entropy":
            raise ConfigError("simplex-quadratic requires the entropy mirror", key="mirror")
        if self.t_max < 1:
            raise ConfigError("t_max must be >= 1", key="t_max")
        if self.stop not in ("iters", "gap_tol"):
            raise ConfigError("stop must be 'iters' or 'gap_tol'", key="stop")
        if self.stop == "gap_tol" and (self.gap_tol is None or self.gap_tol < 0):
            raise ConfigError("stop = gap_tol needs a non-negative gap_tol", key="gap_tol")
        if self.x1 is not None and len(self.x1) != self.problem.dim:
            raise ConfigError(f"x1 has {len(self.x1)} entries, dim is {self.problem.dim}", key="x1")
        if self.block_size is not None and not 1 <= self.block_size <= self.problem.dim:
            raise ConfigError("block_size must lie in [1, dim]", key="block_size")
        return self

    def c_value(self):
        if self.c_policy == "from-mu-L":
            from .oracles import star_c_from_mu_L
            return star_c_from_mu_L(self.problem.mu, self.problem.L)
        return float(self.c_policy)


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _bool(text):
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (section, attribute, parser)
_KEYS = {
    "problem": ("problem", "kind", str),
    "dim": ("problem", "dim", int),
    "mu": ("problem", "mu", float),
    "L": ("problem", "L", float),
    "seed": ("problem", "seed", int),
    "tau": ("problem", "tau", float),
    "n_terms": ("problem", "n_terms", int),
    "step_rule": ("step", "rule", str),
    "eta0": ("step", "eta0", float),
    "grid_factor": ("step", "grid_factor", float),
    "grid_width": ("step", "grid_width", int),
    "shrink": ("step", "shrink", float),
    "max_probes": ("step", "max_probes", int),
    "mirror": ("run", "mirror", str),
    "field": ("run", "field", str),
    "epsilon": ("run", "epsilon", float),
    "c_policy": ("run", "c_policy", str),
    "t_max": ("run", "t_max", int),
    "stop": ("run", "stop", str),
    "gap_tol": ("run", "gap_tol", float),
    "output_dir": ("run", "output_dir", str),
    "x1": ("run", "x1", _floats),
    "x1_radius": ("run", "x1_radius", float),
    "block_size": ("run", "block_size", int),
    "reuse_center": ("run", "reuse_center", _bool),
    "check_seed": ("run", "check_seed", int),
    "sweep_epsilon": ("run", "sweep_epsilon", _floats),
    "sweep_rule": ("run", "sweep_rule", lambda t: tuple(v for v in t.replace(",", " ").split())),
}


def parse_config(text):
    """Parse flat ``key = value`` text into a validated :class:`RunConfig`."""
    values = {"problem": {}, "step": {}, "run": {}}
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown key; known keys: {', '.join(sorted(_KEYS))}", line=lineno, key=key)
        if key in seen:
            raise ConfigError(f"duplicate key (first set on line {seen[key]})", line=lineno, key=key)
        if not value:
            raise ConfigError("empty value", line=lineno, key=key)
        section, attr, parser = _KEYS[key]
        try:
            values[section][attr] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"bad value {value!r}: {exc}", line=lineno, key=key) from None
        seen[key] = lineno
    try:
        problem = ProblemSpec(**values["problem"])
        step = StepConfig(**values["step"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    config = RunConfig(problem=problem, step=step, **values["run"])
    return config.validate()


def load_config(path):
    return parse_config(Path(path).read_text())


def initial_point(config, oracle):
    """Configured ``x1``, or a seeded point at distance ``x1_radius`` from ``x_*``.

    On the simplex the default start is the barycenter.
    """
    if config.x1 is not None:
        return np.array(config.x1, dtype=float)
    if config.problem.kind == "simplex-quadratic":
        return np.full(oracle.dim, 1.0 / oracle.dim)
    rng = np.random.default_rng(config.problem.seed + 1)
    direction = rng.standard_normal(oracle.dim)
    return oracle.x_star + config.x1_radius * direction / np.linalg.norm(direction)


def with_overrides(config, **changes):
    """Copy of ``config`` with run-level fields replaced (and re-validated)."""
    return replace(config, **changes).validate()
