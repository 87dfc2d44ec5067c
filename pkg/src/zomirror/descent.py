"""
Omega-driven mirror descent with trajectory-wise certificates.

One step maps ``x`` to ``(grad Phi)^{-1}(grad Phi(x) - eta * Omega(x))``.
A step is *certified* when

    eta * D_{f,Omega}(x_next || x) <= D_Phi(x_next || x),

which is checked from one extra function value. Over a certified run the
last iterate satisfies

    f(x_t) - f(x_*) <= max(D_Phi(x_* || x_1) / sum_j eta_j, floor),

where ``floor`` bounds the objective gap on the neighbourhood where the
field is not guaranteed to point towards ``x_*``.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .geometry import DomainError, d_f_omega

CERT_TOL = 1e-12

STEP_RULES = ("fixed", "geometric-grid", "backtracking")

TRAJECTORY_HEADER = ["iter", "f", "eta", "cert_lhs", "cert_rhs", "cert_pass",
                     "M", "R", "alpha", "in_V", "evals_cum"]


class UndefinedRateError(ValueError):
    """The stepsize sum is zero, so the rate term is undefined."""


@dataclass(frozen=True)
class StepConfig:
    rule: str = "fixed"
    eta0: float = 0.1
    grid_factor: float = 2.0
    grid_width: int = 3
    shrink: float = 0.5
    max_probes: int = 30

    def __post_init__(self):
        if self.rule not in STEP_RULES:
            raise ValueError(f"unknown step rule {self.rule!r}; expected one of {STEP_RULES}")
        if not self.eta0 > 0:
            raise ValueError("eta0 must be positive")
        if not self.grid_factor > 1:
            raise ValueError("grid_factor must exceed 1")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if self.grid_width < 0 or self.max_probes < 1:
            raise ValueError("grid_width must be >= 0 and max_probes >= 1")


@dataclass
class TrajectoryRow:
    j: int
    x: np.ndarray
    f: float
    evals_cum: int
    eta: Optional[float] = None
    cert_lhs: Optional[float] = None
    cert_rhs: Optional[float] = None
    cert_pass: Optional[bool] = None
    probes: int = 0
    omega: Optional[np.ndarray] = None
    diag: object = None


@dataclass
class TrajectoryRecord:
    rows: list = field(default_factory=list)
    status: str = "ok"
    error: Optional[str] = None

    def __len__(self):
        return len(self.rows)

    @property
    def steps(self):
        """Rows that carry a step (all but the last iterate)."""
        return [row for row in self.rows if row.eta is not None]

    @property
    def f_values(self):
        return np.array([row.f for row in self.rows])

    @property
    def all_certified(self):
        return all(row.cert_pass for row in self.steps)

    def certified_prefix(self):
        """Number of leading steps that passed the certificate."""
        k = 0
        for row in self.steps:
            if not row.cert_pass:
                break
            k += 1
        return k

    def to_csv(self):
        return trajectory_csv(self)


class StepChoice(NamedTuple):
    eta: float
    probes: int
    passed: bool
    x_next: np.ndarray
    f_next: float
    lhs: float
    rhs: float


def mirror_step(mirror, x, omega, eta):
    """``(grad Phi)^{-1}(grad Phi(x) - eta * omega)``; ``eta == 0`` returns ``x``."""
    if eta < 0:
        raise ValueError("eta must be non-negative")
    x = np.asarray(x, dtype=float)
    if eta == 0:
        return x.copy()
    x_next = mirror.gradient_inverse(mirror.gradient(x) - eta * np.asarray(omega, dtype=float))
    if not np.all(np.isfinite(x_next)):
        raise DomainError("mirror step left the range of the inverse gradient")
    return mirror.check_domain(x_next)


def _passes(lhs, rhs):
    return lhs <= rhs + CERT_TOL * max(1.0, abs(rhs))


def certificate(mirror, oracle, omega_at_x, x, x_next, eta, f_x, f_next=None):
    """Evaluate the per-step certificate.

    Returns ``(lhs, rhs, passed, f_next)`` with
    ``lhs = eta * D_{f,Omega}(x_next || x)`` and ``rhs = D_Phi(x_next || x)``.
    ``f(x_next)`` costs one oracle evaluation unless supplied.
    """
    if f_next is None:
        f_next = oracle.evaluate(x_next)
    lhs = eta * d_f_omega(f_next, f_x, omega_at_x, x_next, x)
    rhs = mirror.bregman(x_next, x)
    return lhs, rhs, _passes(lhs, rhs), f_next


def _probe(mirror, oracle, x, omega, eta, f_x):
    x_next = mirror_step(mirror, x, omega, eta)
    lhs, rhs, ok, f_next = certificate(mirror, oracle, omega, x, x_next, eta, f_x)
    return StepChoice(eta, 1, ok, x_next, f_next, lhs, rhs)


def select_stepsize(config, mirror, oracle, x, omega, eta_prev, f_x):
    """Pick a stepsize by the configured rule, probing the certificate.

    Every probe costs one oracle evaluation. ``fixed`` probes ``eta0`` once;
    ``geometric-grid`` probes ``eta_prev * grid_factor**k`` for
    ``|k| <= grid_width`` and keeps the largest passing candidate;
    ``backtracking`` starts at ``eta_prev * grid_factor`` and shrinks until a
    probe passes. When nothing passes the smallest probed stepsize is
    returned with ``passed=False``.
    """
    if not eta_prev > 0:
        raise ValueError("eta_prev must be positive")
    if config.rule == "fixed":
        return _probe(mirror, oracle, x, omega, config.eta0, f_x)

    if config.rule == "geometric-grid":
        ks = range(-config.grid_width, config.grid_width + 1)
        etas = [eta_prev * config.grid_factor ** k for k in ks][:config.max_probes]
        results = [_probe(mirror, oracle, x, omega, eta, f_x) for eta in etas]
        passing = [r for r in results if r.passed]
        chosen = max(passing, key=lambda r: r.eta) if passing else min(results, key=lambda r: r.eta)
        return chosen._replace(probes=len(results))

    eta = eta_prev * config.grid_factor
    result = None
    for n in range(1, config.max_probes + 1):
        result = _probe(mirror, oracle, x, omega, eta, f_x)._replace(probes=n)
        if result.passed:
            break
        eta *= config.shrink
    return result


def run(mirror, oracle, omega_field, config, x1, t_max, gap_tol=None):
    """Iterate the certified mirror update.

    Parameters
    ----------
    mirror : MirrorMap
    oracle : ObjectiveOracle
    omega_field : callable
        ``omega_field(x, f_center) -> (omega, diagnostics_or_None)``.
    config : StepConfig
    x1 : array_like
        Starting point.
    t_max : int
        Number of iterates ``x_1..x_t`` (so at most ``t_max - 1`` steps).
    gap_tol : float, optional
        Stop once ``f(x_j) - f(x_*) <= gap_tol``; needs a known minimizer.

    Returns
    -------
    TrajectoryRecord
        On a domain error the partial record is returned with
        ``status == "domain-error"``.
    """
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    if gap_tol is not None and oracle.f_star is None:
        raise ValueError("gap_tol stopping needs a known minimizer")
    record = TrajectoryRecord()
    start = oracle.eval_count
    try:
        x = mirror.check_domain(np.array(x1, dtype=float))
        f_x = oracle.evaluate(x)
    except DomainError as exc:
        record.status, record.error = "domain-error", str(exc)
        return record
    eta_prev = config.eta0
    for j in range(1, t_max + 1):
        row = TrajectoryRow(j=j, x=x, f=f_x, evals_cum=oracle.eval_count - start)
        record.rows.append(row)
        if j == t_max or (gap_tol is not None and f_x - oracle.f_star <= gap_tol):
            break
        try:
            omega, diag = omega_field(x, f_x)
            choice = select_stepsize(config, mirror, oracle, x, omega, eta_prev, f_x)
        except DomainError as exc:
            record.status, record.error = "domain-error", str(exc)
            break
        row.eta, row.cert_lhs, row.cert_rhs = choice.eta, choice.lhs, choice.rhs
        row.cert_pass, row.probes, row.omega, row.diag = choice.passed, choice.probes, omega, diag
        if choice.passed:
            # the grid recentres on the last accepted stepsize
            eta_prev = choice.eta
        x, f_x = choice.x_next, choice.f_next
    return record


@dataclass
class CertificateReport:
    all_certified: bool
    certified_steps: int
    total_steps: int
    sum_eta: float
    bregman_to_start: float
    rate_term: Optional[float]
    floor_term: float
    bound: Optional[float]
    achieved_gap: Optional[float]
    window_gap: Optional[float]
    interface_checked: int = 0
    interface_violations: int = 0
    bound_defined: bool = True
    checks: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def bound_holds(self):
        if self.bound is None or self.window_gap is None:
            return None
        return self.window_gap <= self.bound + 1e-9

    def to_dict(self):
        out = {
            "all_certified": self.all_certified,
            "certified_steps": self.certified_steps,
            "total_steps": self.total_steps,
            "sum_eta": self.sum_eta,
            "bregman_to_start": self.bregman_to_start,
            "rate_term": self.rate_term,
            "floor_term": self.floor_term,
            "bound": self.bound,
            "bound_defined": self.bound_defined,
            "achieved_gap": self.achieved_gap,
            "window_gap": self.window_gap,
            "bound_holds": self.bound_holds,
            "interface_checked": self.interface_checked,
            "interface_violations": self.interface_violations,
        }
        out.update(self.extra)
        if self.checks:
            out["checks"] = self.checks
        return out

    def to_json(self):
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def last_iterate_bound(record, mirror, x_star, floor_term=0.0, f_star=None, exceptional_radius=None):
    """Assemble the last-iterate bound over the initial certified window.

    The window is the longest prefix of certified steps; with ``k`` such
    steps the bound applies to ``x_{k+1}`` and reads
    ``max(D_Phi(x_* || x_1) / sum_{j<=k} eta_j, floor_term)``. When the whole
    run is certified the window is the full run.

    If ``f_star`` is given, the interface inequality
    ``<Omega(x_j), x_j - x_*> >= f(x_j) - f_*`` is tested at every visited
    point of the window outside ``exceptional_radius``.

    Raises ``UndefinedRateError`` when the window holds no stepsize.
    """
    x_star = np.asarray(x_star, dtype=float)
    steps = record.steps
    k = record.certified_prefix()
    window = steps[:k]
    sum_eta = float(sum(row.eta for row in window))
    if sum_eta <= 0:
        raise UndefinedRateError("no certified step with positive stepsize; rate term undefined")
    d_start = mirror.bregman(x_star, record.rows[0].x)
    rate = d_start / sum_eta
    report = CertificateReport(
        all_certified=record.all_certified and record.status == "ok",
        certified_steps=k,
        total_steps=len(steps),
        sum_eta=sum_eta,
        bregman_to_start=d_start,
        rate_term=rate,
        floor_term=float(floor_term),
        bound=max(rate, float(floor_term)),
        achieved_gap=None,
        window_gap=None,
    )
    if f_star is not None:
        report.achieved_gap = record.rows[-1].f - f_star
        report.window_gap = record.rows[k].f - f_star
        for row in window:
            dist = float(np.linalg.norm(row.x - x_star))
            if exceptional_radius is not None and dist <= exceptional_radius:
                continue
            report.interface_checked += 1
            lhs = float(row.omega @ (row.x - x_star))
            if lhs < row.f - f_star - 1e-9 * max(1.0, abs(row.f - f_star)):
                report.interface_violations += 1
    return report


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    return "" if math.isnan(value) else repr(value)


def trajectory_csv(record):
    """Serialize a record with the fixed trajectory header."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRAJECTORY_HEADER)
    for row in record.rows:
        diag = row.diag
        writer.writerow([
            row.j, _fmt(row.f), _fmt(row.eta), _fmt(row.cert_lhs), _fmt(row.cert_rhs),
            _fmt(row.cert_pass),
            _fmt(getattr(diag, "M", None)), _fmt(getattr(diag, "R", None)),
            _fmt(getattr(diag, "alpha", None)), _fmt(getattr(diag, "in_V", None)),
            row.evals_cum,
        ])
    return buf.getvalue()
