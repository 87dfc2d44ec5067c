"""
Command-line driver: ``run``, ``certify``, ``conic`` and ``sweep``.

Exit codes: 0 success, 1 check failure or infeasible dominance problem,
2 configuration error, 3 domain escape during a run.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import certify as cert
from .conic import (DominanceProblem, InfeasibleDominanceError, ball_min_dominance_alpha,
                    min_dominance_alpha, witness_inequality, worst_case_witness)
from .descent import (CertificateReport, StepConfig, UndefinedRateError, _jsonable,
                      last_iterate_bound, run, trajectory_csv)
from .geometry import entropy_mirror, euclidean_mirror
from .oracles import (AnalyticField, DirectionalField, FiniteDiffField, StencilField,
                      coordinate_stencil)
from .problems import ConfigError, initial_point, load_config, make_problem, _orthogonal

log = logging.getLogger("zomirror")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3


@dataclass
class RunOutcome:
    record: object
    report: CertificateReport
    oracle: object


def build_mirror(config):
    if config.mirror == "entropy":
        return entropy_mirror(simplex=True)
    return euclidean_mirror()


def build_field(config, oracle):
    if config.field == "analytic-grad":
        return AnalyticField(oracle)
    if config.field == "fd-coordinate":
        return FiniteDiffField(oracle, config.epsilon, config.c_value(), reuse_center=config.reuse_center)
    if config.field == "fd-directional":
        U = _orthogonal(oracle.dim, np.random.default_rng(config.problem.seed + 2))
        return DirectionalField(oracle, config.epsilon, U, block_size=config.block_size)
    return StencilField(oracle, config.epsilon, coordinate_stencil(oracle.dim))


def _floor(config, oracle):
    """(floor_term, exceptional_radius, analytic floor bound) for the configured field."""
    constrained = oracle.meta.get("constrained", False)
    if config.field != "fd-coordinate" or constrained or oracle.x_star is None:
        return 0.0, None, None
    mu, L = config.problem.mu, oracle.L
    radius = cert.floor_radius(mu, L, config.epsilon, oracle.dim)
    est = cert.floor_value(oracle, radius)
    return est.floor_value, radius, est.analytic_bound


def execute(config):
    """Run one configuration end to end; returns a :class:`RunOutcome`."""
    oracle = make_problem(config.problem)
    mirror = build_mirror(config)
    fld = build_field(config, oracle)
    x1 = initial_point(config, oracle)
    gap_tol = config.gap_tol if config.stop == "gap_tol" else None
    record = run(mirror, oracle, fld, config.step, x1, config.t_max, gap_tol=gap_tol)
    floor_term, radius, analytic = _floor(config, oracle)
    try:
        report = last_iterate_bound(record, mirror, oracle.x_star, floor_term=floor_term,
                                    f_star=oracle.f_star, exceptional_radius=radius)
    except UndefinedRateError as exc:
        last = record.rows[-1].f - oracle.f_star if record.rows else None
        report = CertificateReport(
            all_certified=record.all_certified and record.status == "ok",
            certified_steps=record.certified_prefix(), total_steps=len(record.steps),
            sum_eta=0.0, bregman_to_start=mirror.bregman(oracle.x_star, record.rows[0].x) if record.rows else None,
            rate_term=None, floor_term=floor_term, bound=None, achieved_gap=last, window_gap=None,
            bound_defined=False, extra={"bound_note": str(exc)})
    report.extra.update({
        "status": record.status,
        "error": record.error,
        "problem": config.problem.kind,
        "dim": oracle.dim,
        "mirror": config.mirror,
        "field": config.field,
        "step_rule": config.step.rule,
        "epsilon": config.epsilon,
        "c": config.c_value(),
        "L_declared": oracle.L,
        "floor_radius": radius,
        "floor_analytic_bound": analytic,
        "f_star": oracle.f_star,
        "x_star": oracle.x_star,
        "evals_total": record.rows[-1].evals_cum if record.rows else 0,
        "steps_in_V": sum(1 for r in record.steps if r.diag is not None and r.diag.in_V),
        "steps_alpha_infeasible": sum(1 for r in record.steps if r.diag is not None and not r.diag.feasible),
    })
    return RunOutcome(record, report, oracle)


def gap_dat(record, f_star):
    lines = ["# iter gap"]
    lines += [f"{row.j} {row.f - f_star!r}" for row in record.rows]
    return "\n".join(lines) + "\n"


def write_run(outcome, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trajectory.csv").write_text(trajectory_csv(outcome.record))
    (out / "report.json").write_text(outcome.report.to_json())
    (out / "gap.dat").write_text(gap_dat(outcome.record, outcome.oracle.f_star))


def _load(path):
    try:
        return load_config(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None


def _out_dir(args, config):
    return Path(args.out) if args.out else Path(config.output_dir)


def cmd_run(args):
    config = _load(args.config)
    outcome = execute(config)
    write_run(outcome, _out_dir(args, config))
    rep = outcome.report
    if args.json:
        print(rep.to_json(), end="")
    else:
        print(f"status={outcome.record.status} steps={rep.total_steps} certified_prefix={rep.certified_steps} "
              f"all_certified={rep.all_certified} achieved_gap={rep.achieved_gap} bound={rep.bound}")
    if outcome.record.status == "domain-error":
        print(f"domain error: {outcome.record.error}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_certify(args):
    config = _load(args.config)
    oracle = make_problem(config.problem)
    unconstrained = not oracle.meta.get("constrained", False)
    checks = cert.run_checks(oracle, config.epsilon, seed=config.check_seed, unconstrained=unconstrained)
    all_pass = all(c["pass"] for c in checks.values())
    payload = {"all_pass": all_pass, "problem": config.problem.kind, "epsilon": config.epsilon,
               "checks": checks}
    out = _out_dir(args, config)
    out.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    (out / "checks.json").write_text(text)
    if args.json:
        print(text, end="")
    else:
        for tag, res in sorted(checks.items()):
            state = "skip" if res.get("skipped") else ("pass" if res["pass"] else "FAIL")
            print(f"{tag:8s} {state}  n={res['n']}")
    for tag, res in sorted(checks.items()):
        if not res["pass"]:
            print(f"check {tag} failed; witness: {json.dumps(_jsonable(res['witness']))}", file=sys.stderr)
    return EXIT_OK if all_pass else EXIT_CHECK


def _parse_witness(text):
    key, sep, value = text.partition("=")
    if sep and key.strip() != "t":
        raise argparse.ArgumentTypeError("expected t=VALUE")
    try:
        return float(value if sep else key)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad witness value {text!r}") from None


def cmd_conic(args):
    problem = DominanceProblem.from_norms(args.m_norm, args.R, args.c)
    try:
        alpha = min_dominance_alpha(problem)
    except InfeasibleDominanceError as exc:
        print(f"infeasible ({exc.condition}): {exc}", file=sys.stderr)
        if args.json:
            print(json.dumps({"feasible": False, "condition": exc.condition}))
        return EXIT_CHECK
    exact, _ = ball_min_dominance_alpha(problem)
    result = {"feasible": True, "alpha": alpha, "ball_min_alpha": exact,
              "s": problem.s, "rho": problem.rho}
    if args.witness is not None:
        # the construction is stated for unit ||m||; rescale R accordingly
        R = args.R / args.m_norm
        try:
            u, u_hat, o = worst_case_witness(R, problem.s, problem.rho, args.witness)
        except ValueError as exc:
            print(f"witness: {exc}", file=sys.stderr)
            return EXIT_CHECK
        lhs, rhs = witness_inequality(u, u_hat, o, args.witness, problem.s)
        result["witness"] = {"t": args.witness, "u": u, "u_hat": u_hat, "o": o,
                             "inner_u_w": lhs, "s_norm_w": rhs, "violated": lhs < rhs}
    if args.json:
        print(json.dumps(_jsonable(result), indent=2, sort_keys=True))
    else:
        print(f"alpha = {alpha:.12g}")
        print(f"ball_min_alpha = {exact:.12g}")
        if "witness" in result:
            w = result["witness"]
            print(f"u = {w['u'].tolist()}  u_hat = {w['u_hat'].tolist()}  o = {w['o'].tolist()}")
            print(f"<u, w> = {w['inner_u_w']:.12g}  s||w|| = {w['s_norm_w']:.12g}  violated = {w['violated']}")
    return EXIT_OK


SUMMARY_HEADER = ["epsilon", "rule", "final_gap", "bound", "floor_term", "evals", "sum_eta", "status"]


def _sweep_cell(config, eps, rule, out_dir):
    try:
        step = StepConfig(rule=rule, eta0=config.step.eta0, grid_factor=config.step.grid_factor,
                          grid_width=config.step.grid_width, shrink=config.step.shrink,
                          max_probes=config.step.max_probes)
        cell = replace(config, epsilon=eps, step=step).validate()
        outcome = execute(cell)
        write_run(outcome, out_dir)
        rep = outcome.report
        return [eps, rule, rep.achieved_gap, rep.bound, rep.floor_term,
                rep.extra["evals_total"], rep.sum_eta, outcome.record.status]
    except Exception as exc:  # recorded per cell; the sweep carries on
        log.warning("sweep cell eps=%s rule=%s failed: %s", eps, rule, exc)
        return [eps, rule, None, None, None, None, None, f"error: {exc}"]


def cmd_sweep(args):
    config = _load(args.config)
    eps_list = config.sweep_epsilon or (config.epsilon,)
    rules = config.sweep_rule or (config.step.rule,)
    out = _out_dir(args, config)
    cells = [(eps, rule) for eps in eps_list for rule in rules]
    with ThreadPoolExecutor() as pool:
        futures = [pool.submit(_sweep_cell, config, eps, rule, out / f"cell{i:03d}")
                   for i, (eps, rule) in enumerate(cells)]
        rows = [f.result() for f in futures]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for row in rows:
        writer.writerow(["" if v is None or (isinstance(v, float) and math.isnan(v)) else
                         (repr(v) if isinstance(v, float) else v) for v in row])
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.csv").write_text(buf.getvalue())
    print(buf.getvalue(), end="")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="zomirror", description=__doc__.strip().splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, helptext in (("run", cmd_run, "run one certified descent"),
                                 ("certify", cmd_certify, "run the verifier suite"),
                                 ("sweep", cmd_sweep, "epsilon x stepsize-rule sweep")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--json", action="store_true")
        p.set_defaults(func=func)
    p = sub.add_parser("conic", help="minimal dominance scaling for a ball model")
    p.add_argument("--m-norm", type=float, required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--witness", type=_parse_witness, metavar="t=VALUE")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_conic)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        if args.command == "conic":
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CHECK
        raise
