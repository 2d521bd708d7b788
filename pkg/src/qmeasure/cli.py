"""Command-line front end.

    qmeasure --command sweep-spin --phi-steps 101 --format csv --out sweep.csv
    qmeasure --command audit --trials 10000 --seed 1 --format json
    qmeasure --command estimate --phi 0 --n 1000000 --seed 7
    qmeasure --command tradeoff --targets 2,1,0.5,0.25 --app-dim 4
    qmeasure --command infeasibility --cap 5 10 20 40

Exit codes: 0 success, 2 violation or biased measurement, 3 I/O failure,
4 invalid configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .audit import HISTOGRAM_EDGES, universality_audit
from .estimation import (
    BIAS_TOL,
    FEASIBILITY_TOL,
    estimation_error,
    estimator_statistics,
    infeasibility_sweep,
    run_from_context,
    tradeoff_search,
)
from .measurement import model_to_dict
from .moments import (
    disturbance_eta,
    error_epsilon,
    spin_context,
    spread,
    unbiasedness_defect,
)
from .operators import KET_PLUS_Z, SIGMA_X, SIGMA_Y
from .relations import CATALOG, evaluate_all

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_IO = 3
EXIT_CONFIG = 4

COMMANDS = ("sweep-spin", "audit", "estimate", "tradeoff", "infeasibility")

SWEEP_COLUMNS = ["phi", "eps_A", "eta_B", "sigma_A", "sigma_B"] + [
    f"{name}_{field}" for name in CATALOG for field in ("lhs", "rhs", "holds")
]
TRADEOFF_COLUMNS = ["target_eps_A", "eps_A_sq", "eps_B_sq", "product", "rhs_bound",
                    "residual_A", "residual_B", "pointer_N_norm", "feasible"]
ESTIMATE_COLUMNS = ["phi", "n", "seed", "empirical_mean", "empirical_scaled_var",
                    "analytic_mean", "analytic_scaled_var", "target_mean",
                    "unbiasedness_defect", "consistent", "estimation_error"]
INFEASIBILITY_COLUMNS = ["variant", "cap", "residual", "floor", "eps_A", "b_defect"]
AUDIT_COLUMNS = ["trial", "sys_dim", "app_dim"] + [f"{name}_margin" for name in CATALOG] + [
    "violations"]

DEFAULT_TARGETS = (2.0, 1.0, 0.5, 0.25, 0.1)


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass
class RunConfig:
    command: str
    phi_steps: int = 101
    trials: int = 1000
    seed: int = 0
    n_samples: int = 1000
    output_path: Optional[str] = None
    format: str = "csv"
    phi: float = 0.0
    app_dim: int = 4
    caps: Sequence[float] = (5.0, 10.0, 20.0, 40.0)
    targets: Sequence[float] = DEFAULT_TARGETS
    budget: int = 3000
    restarts: Optional[int] = None
    variant: str = "pointer"
    allow_biased: bool = False
    bias_tol: float = BIAS_TOL

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.phi_steps < 2:
            raise ConfigError("--phi-steps must be >= 2")
        if self.trials < 1:
            raise ConfigError("--trials must be >= 1")
        if self.n_samples < 1:
            raise ConfigError("--n must be >= 1")
        if self.budget < 1 or (self.restarts is not None and self.restarts < 1):
            raise ConfigError("--budget and --restarts must be positive")
        if not 0.0 <= self.phi <= math.pi / 2 + 1e-15:
            raise ConfigError("--phi must lie in [0, pi/2]")
        if self.command == "tradeoff" and self.app_dim < 4:
            raise ConfigError("--app-dim must be >= 4")
        if self.command == "infeasibility" and any(c <= 0 for c in self.caps):
            raise ConfigError("--cap values must be positive")
        if self.command == "tradeoff" and (not self.targets or any(t <= 0 for t in self.targets)):
            raise ConfigError("--targets must be positive")
        return self


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qmeasure", description="Measurement-model relation sweeps, audits and searches.")
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--phi-steps", type=int, default=101, help="grid points on [0, pi/2]")
    p.add_argument("--phi", type=float, default=0.0, help="detuning angle for estimate")
    p.add_argument("--degrees", action="store_true", help="read --phi in degrees")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=1000, dest="n_samples", help="sample count")
    p.add_argument("--out", default=None, dest="output_path", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--app-dim", type=int, default=4)
    p.add_argument("--cap", type=float, nargs="+", default=[5.0, 10.0, 20.0, 40.0], dest="caps",
                   help="pointer norm caps for infeasibility")
    p.add_argument("--variant", choices=("pointer", "disturbance"), default="pointer")
    p.add_argument("--targets", type=_float_list, default=list(DEFAULT_TARGETS),
                   help="comma-separated eps_A_sq levels for tradeoff")
    p.add_argument("--budget", type=int, default=3000, help="evaluations per restart")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--allow-biased", action="store_true",
                   help="report descriptive statistics for biased measurements")
    p.add_argument("--bias-tol", type=float, default=BIAS_TOL)
    return p


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    phi = math.radians(ns.phi) if ns.degrees else ns.phi
    return RunConfig(
        command=ns.command, phi_steps=ns.phi_steps, trials=ns.trials, seed=ns.seed,
        n_samples=ns.n_samples, output_path=ns.output_path, format=ns.format, phi=phi,
        app_dim=ns.app_dim, caps=tuple(ns.caps), targets=tuple(ns.targets), budget=ns.budget,
        restarts=ns.restarts, variant=ns.variant, allow_biased=ns.allow_biased,
        bias_tol=ns.bias_tol,
    ).validate()


# --------------------------------------------------------------------------- helpers


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ""
    return str(x)


def to_csv(columns: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_cell(row[c]) for c in columns])
    return buf.getvalue()


def to_json(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------- commands


def sweep_rows(phi_steps: int) -> List[dict]:
    rows = []
    for phi in np.linspace(0.0, np.pi / 2, phi_steps):
        ctx = spin_context(float(phi))
        row = {
            "phi": float(phi),
            "eps_A": error_epsilon(ctx, "A"),
            "eta_B": disturbance_eta(ctx),
            "sigma_A": spread(ctx, "A"),
            "sigma_B": spread(ctx, "B"),
        }
        for r in evaluate_all(ctx):
            row[f"{r.name}_lhs"] = r.lhs
            row[f"{r.name}_rhs"] = r.rhs
            row[f"{r.name}_holds"] = r.holds
        rows.append(row)
    return rows


def cmd_sweep_spin(cfg: RunConfig):
    rows = sweep_rows(cfg.phi_steps)
    text = to_csv(SWEEP_COLUMNS, rows) if cfg.format == "csv" else to_json(
        {"columns": SWEEP_COLUMNS, "rows": rows})
    return text, EXIT_OK, None


def _context_doc(ctx) -> dict:
    pairs = lambda a: [[float(z.real), float(z.imag)] for z in np.ravel(a)]
    return {"model": model_to_dict(ctx.model), "a": pairs(ctx.a), "b": pairs(ctx.b),
            "psi": pairs(ctx.psi)}


def cmd_audit(cfg: RunConfig):
    result = universality_audit(cfg.trials, cfg.seed)
    counts = {}
    for v in result.violations:
        counts[v.trial] = counts.get(v.trial, 0) + 1
    rows = []
    for i in range(result.trials):
        row = {"trial": i, "sys_dim": int(result.dims[i][0]), "app_dim": int(result.dims[i][1])}
        for name in CATALOG:
            row[f"{name}_margin"] = float(result.margins[name][i])
        row["violations"] = counts.get(i, 0)
        rows.append(row)
    violations = [{"trial": v.trial, "check": v.check, "detail": _finite_or_none(v.detail),
                   "context": _context_doc(v.context)} for v in result.violations]
    code = EXIT_VIOLATION if violations else EXIT_OK
    message = f"{len(violations)} universality violation(s)" if violations else None
    if cfg.format == "csv":
        text = to_csv(AUDIT_COLUMNS, rows)
        if violations:
            # the table cannot hold the offending contexts; they go to stderr
            message += "\n" + to_json(violations)
        return text, code, message
    doc = {
        "trials": result.trials,
        "seed": result.seed,
        "violation_count": len(violations),
        "violations": violations,
        "histogram_edges": [float(e) for e in HISTOGRAM_EDGES[1:-1]],
        "histograms": {name: [int(c) for c in result.histogram(name)] for name in CATALOG},
        "rows": rows,
    }
    return to_json(doc), code, message


def estimate_report(cfg: RunConfig) -> dict:
    ctx = spin_context(cfg.phi, KET_PLUS_Z)
    stats = estimator_statistics(run_from_context(ctx, cfg.n_samples, cfg.seed))
    defect = unbiasedness_defect(ctx, "measurement_A")
    target = float(np.vdot(ctx.psi, SIGMA_X @ ctx.psi).real)
    biased = defect > cfg.bias_tol
    return {
        "phi": cfg.phi,
        "n": cfg.n_samples,
        "seed": cfg.seed,
        "empirical_mean": stats.empirical_mean,
        "empirical_scaled_var": _finite_or_none(stats.empirical_scaled_var),
        "analytic_mean": stats.analytic_mean,
        "analytic_scaled_var": stats.analytic_scaled_var,
        "target_mean": target,
        "unbiasedness_defect": defect,
        "consistent": not biased,
        "estimation_error": None if biased else estimation_error(ctx, cfg.bias_tol),
    }


def cmd_estimate(cfg: RunConfig):
    report = estimate_report(cfg)
    if not report["consistent"] and not cfg.allow_biased:
        return None, EXIT_VIOLATION, (
            f"biased measurement: unbiasedness defect {report['unbiasedness_defect']!r} "
            f"exceeds {cfg.bias_tol!r}; pass --allow-biased for descriptive statistics")
    text = to_csv(ESTIMATE_COLUMNS, [report]) if cfg.format == "csv" else to_json(report)
    return text, EXIT_OK, None


def cmd_tradeoff(cfg: RunConfig):
    points = tradeoff_search(SIGMA_X, SIGMA_Y, KET_PLUS_Z, cfg.targets, cfg.app_dim, cfg.seed,
                             cfg.budget, cfg.restarts or 32)
    rows = []
    for pt in points:
        row = {
            "target_eps_A": pt.target,
            "eps_A_sq": _finite_or_none(pt.eps_A_sq),
            "eps_B_sq": _finite_or_none(pt.eps_B_sq),
            "product": _finite_or_none(pt.product),
            "rhs_bound": pt.rhs_bound,
            "residual_A": _finite_or_none(pt.constraint_residual_A),
            "residual_B": _finite_or_none(pt.constraint_residual_B),
            "pointer_N_norm": _finite_or_none(pt.pointer_N_norm),
            "feasible": pt.feasible,
        }
        rows.append(row)
    if cfg.format == "csv":
        return to_csv(TRADEOFF_COLUMNS, rows), EXIT_OK, None
    for row, pt in zip(rows, points):
        row["model"] = model_to_dict(pt.model) if pt.model is not None else None
    return to_json({"feasibility_tol": FEASIBILITY_TOL, "points": rows}), EXIT_OK, None


def cmd_infeasibility(cfg: RunConfig):
    results = infeasibility_sweep(SIGMA_X, SIGMA_Y, KET_PLUS_Z, cfg.caps, cfg.seed, cfg.budget,
                                  cfg.restarts or 8, cfg.app_dim, cfg.variant)
    rows = [{"variant": r.variant, "cap": r.cap, "residual": _finite_or_none(r.residual),
             "floor": r.floor, "eps_A": _finite_or_none(r.eps_a),
             "b_defect": _finite_or_none(r.b_defect)} for r in results]
    text = to_csv(INFEASIBILITY_COLUMNS, rows) if cfg.format == "csv" else to_json({"rows": rows})
    return text, EXIT_OK, None


HANDLERS = {
    "sweep-spin": cmd_sweep_spin,
    "audit": cmd_audit,
    "estimate": cmd_estimate,
    "tradeoff": cmd_tradeoff,
    "infeasibility": cmd_infeasibility,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"qmeasure: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text, code, message = HANDLERS[cfg.command](cfg)
    if message:
        print(f"qmeasure: {message}", file=sys.stderr)
    if text is not None:
        try:
            if cfg.output_path is None:
                sys.stdout.write(text)
            else:
                with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
        except OSError as exc:
            print(f"qmeasure: cannot write output: {exc}", file=sys.stderr)
            return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
