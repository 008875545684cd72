"""Command-line front end: ``python -m betacutoff <command> [flags]``."""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

from . import __version__, calculus, figures, optimize, simulation
from .markov import AttackerParams, ConvergenceError
from .rewards import from_fields

COMMANDS = ("analytic", "optimize", "threshold", "simulate", "figure")

DEFAULTS = {
    "alpha": 0.3,
    "gamma": 0.0,
    "beta": "inf",
    "block_reward": 1.0,
    "linear_rate": 1.0,
    "bernoulli_p": 0.25,
    "bernoulli_e": 4.0,
    "objective": "total",
    "seed": 0,
    "events": 1_000_000,
    "replicas": 1,
    "lambda_mode": "analytic",
    "format": "csv",
    "out": None,
}

EXIT_USAGE, EXIT_INVALID, EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC = 2, 3, 4, 5, 6


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _parser():
    p = argparse.ArgumentParser(prog="betacutoff", description="Beta-cutoff selfish mining under static rewards.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("figure", nargs="?", help="figure name for the figure command")
    p.add_argument("--config", help="JSON file with any of the flag keys")
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--beta", help="cutoff in reward units, or 'inf'")
    p.add_argument("--block-reward", type=float)
    p.add_argument("--linear-rate", type=float)
    p.add_argument("--bernoulli-p", type=float)
    p.add_argument("--bernoulli-e", type=float)
    p.add_argument("--objective", help="total, block, linear, bernoulli, or names joined with '+'")
    p.add_argument("--seed", type=int)
    p.add_argument("--events", type=int)
    p.add_argument("--replicas", type=int)
    p.add_argument("--lambda-mode", help="analytic, self_calibrating, or a fixed orphan rate")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", help="output path (default: stdout, or <figure>.csv for figures)")
    return p


def _load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror}", EXIT_CONFIG) from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}", EXIT_CONFIG) from exc
    if not isinstance(data, dict):
        raise CliError(f"config {path} must hold a JSON object", EXIT_CONFIG)
    out = {}
    for key, value in data.items():
        norm = key.replace("-", "_")
        if norm not in DEFAULTS:
            raise CliError(f"unknown config key {key!r}", EXIT_CONFIG)
        out[norm] = value
    return out


def effective_config(args) -> dict:
    """Defaults, then config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(_load_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _float(value, name):
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid {name}: {value!r}", EXIT_INVALID) from exc


def _lambda_mode(value):
    if value in ("analytic", "self_calibrating"):
        return value
    lam = _float(value, "lambda mode")
    if not 0.0 <= lam < 1.0:
        raise CliError(f"fixed orphan rate must lie in [0, 1), got {lam}", EXIT_INVALID)
    return lam


def _spec(cfg):
    try:
        return from_fields(
            _float(cfg["block_reward"], "block reward"),
            _float(cfg["linear_rate"], "linear rate"),
            _float(cfg["bernoulli_p"], "bernoulli p"),
            _float(cfg["bernoulli_e"], "bernoulli e"),
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc


def _params(cfg):
    try:
        return AttackerParams(_float(cfg["alpha"], "alpha"), _float(cfg["gamma"], "gamma"), _float(cfg["beta"], "beta"))
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc


def _objective(cfg):
    try:
        return optimize.Objective.parse(str(cfg["objective"]))
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc


def _breakdown_cols(prefix, bd):
    return {f"{prefix}block": bd.block, f"{prefix}linear": bd.linear, f"{prefix}bernoulli": bd.bernoulli,
            f"{prefix}total": bd.total}


def cmd_analytic(cfg):
    spec, params = _spec(cfg), _params(cfg)
    res = calculus.attacker_reward(spec, params)
    row = {"alpha": params.alpha, "gamma": params.gamma, "beta": params.beta,
           "lambda": res.equilibrium.lam, "h": res.equilibrium.h}
    row.update(_breakdown_cols("", res.breakdown))
    row["honest_total"] = calculus.honest_benchmark(spec, params.alpha).total
    return [row]


def cmd_optimize(cfg):
    spec, params, obj = _spec(cfg), _params(cfg), _objective(cfg)
    if params.alpha == 0.0:
        raise CliError("optimize needs alpha in (0, 0.5)", EXIT_INVALID)
    res = optimize.optimize_beta(spec, params.alpha, params.gamma, obj)
    row = {"alpha": res.alpha, "gamma": res.gamma, "objective": obj.name, "beta_star": res.beta_star,
           "objective_value": res.objective_value, "honest_value": res.honest_value, "lambda": res.lam}
    row.update(_breakdown_cols("", res.full_breakdown))
    return [row]


def cmd_threshold(cfg):
    spec, obj = _spec(cfg), _objective(cfg)
    gamma = _float(cfg["gamma"], "gamma")
    if not 0.0 <= gamma <= 1.0:
        raise CliError(f"gamma must lie in [0, 1], got {gamma}", EXIT_INVALID)
    t = optimize.profitability_threshold(spec, gamma, obj)
    return [{"gamma": gamma, "objective": obj.name, "threshold": math.nan if t is None else t}]


def cmd_simulate(cfg):
    spec, params = _spec(cfg), _params(cfg)
    try:
        sim_cfg = simulation.SimConfig(spec, params, _lambda_mode(cfg["lambda_mode"]), int(cfg["events"]),
                                     int(cfg["seed"]), int(cfg["replicas"]))
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc
    res = simulation.simulate(sim_cfg)
    row = {"alpha": params.alpha, "gamma": params.gamma, "beta": params.beta, "lambda_used": res.lam_used,
           "orphan_rate": res.empirical_orphan_rate, "orphan_rate_se": res.orphan_rate_se,
           "canonical_growth_rate": res.canonical_growth_rate}
    row.update(_breakdown_cols("attacker_", res.attacker))
    row.update({f"attacker_{k}_se": getattr(res.attacker_se, k) for k in ("block", "linear", "bernoulli")})
    row["attacker_total_se"] = res.attacker_total_se
    row.update(_breakdown_cols("honest_", res.honest))
    return [row]


def cmd_figure(cfg, name):
    if name not in figures.FIGURES:
        raise CliError(f"unknown figure {name!r}; choose from {', '.join(figures.FIGURES)}", EXIT_INVALID)
    try:
        data = figures.build(name, spec=_spec(cfg), gamma=_float(cfg["gamma"], "gamma"), events=int(cfg["events"]),
                             seed=int(cfg["seed"]), replicas=int(cfg["replicas"]),
                             lambda_mode=_lambda_mode(cfg["lambda_mode"]))
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc
    return [dict(zip(data.columns, r)) for r in data.rows]


def _fmt(v):
    if isinstance(v, str):
        return v
    return "%.12g" % v


def render(rows, fmt) -> str:
    if fmt == "json":
        return json.dumps([{k: (v if isinstance(v, str) or math.isfinite(v) else str(v)) for k, v in r.items()}
                           for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    cols = list(rows[0]) if rows else []
    buf.write(",".join(cols) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(r[c]) for c in cols) + "\n")
    return buf.getvalue()


def _write(path, text):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write output {path}: {exc.strerror}", EXIT_IO) from exc


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = effective_config(args)
        if args.command == "figure":
            if not args.figure:
                raise CliError("figure command needs a figure name", EXIT_USAGE)
            rows = cmd_figure(cfg, args.figure)
            if cfg["out"] is None:
                cfg["out"] = f"{args.figure}.{cfg['format']}"
        elif args.figure:
            raise CliError(f"unexpected argument {args.figure!r}", EXIT_USAGE)
        else:
            rows = {"analytic": cmd_analytic, "optimize": cmd_optimize, "threshold": cmd_threshold,
                    "simulate": cmd_simulate}[args.command](cfg)
        text = render(rows, cfg["format"])
        if cfg["out"]:
            _write(cfg["out"], text)
            meta = {"command": args.command, "figure": args.figure, "version": __version__, "config": cfg}
            _write(cfg["out"] + ".json", json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
        else:
            stdout.write(text)
    except CliError as exc:
        print(f"betacutoff: error: {exc}", file=sys.stderr)
        return exc.code
    except ConvergenceError as exc:
        print(f"betacutoff: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


def main():
    sys.exit(run())


__all__ = ["run", "main", "effective_config", "render"]
