"""Command-line entry point.

Runs bound calculations, simulations, sweeps, rate tables, dominance
comparisons, and the hard-instance separation from a JSON config, and writes
deterministic CSV artifacts.

Exit codes: 0 success, 2 config/validation error, 3 runtime guard
(memory budget or stability violation).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    BoundConstants,
    gd_lower_bound,
    gd_ridge_type_bound,
    gd_sgd_type_bound,
    ridge_bound,
    sgd_bound,
)
from .estimators import GDConfig, RidgeConfig, SGDConfig
from .experiments import (
    dominance_gd_vs_ridge,
    dominance_gd_vs_sgd,
    hard_instance_separation,
    rate_table,
    tune_and_measure,
)
from .oracles import monte_carlo_risk, sgd_exact_risk_gaussian
from .problems import problem_from_dict

COMMANDS = ("bounds", "simulate", "sweep", "rates", "compare", "separation")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3


class ConfigError(ValueError):
    pass


class RuntimeGuard(RuntimeError):
    pass


def _fmt(value) -> str:
    """Fixed 17-significant-digit formatting for reproducible CSVs."""
    if isinstance(value, bool):
        return str(value).lower()
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[dict]):
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in header])


def _write_plotdata(path: Path, triples):
    rows = [{"x": x, "y": y, "yerr": yerr} for x, y, yerr in triples]
    _write_csv(path, ["x", "y", "yerr"], rows)


def _constants(params: dict) -> BoundConstants:
    return BoundConstants(**params.get("constants", {}))


def _report_row(name: str, report) -> dict:
    flags = ";".join(f"{k}={str(v).lower()}"
                     for k, v in sorted(report.preconditions_met.items()))
    return {
        "bound": name, "k_star": report.k_star, "ell_star": report.ell_star,
        "tilde_lambda": report.tilde_lambda, "D": report.D, "D1": report.D1,
        "N": report.N, "bias_head": report.bias_head,
        "bias_tail": report.bias_tail, "variance_term": report.variance_term,
        "eff_bias": report.eff_bias, "eff_var": report.eff_var,
        "upper_total": report.upper_total, "lower_total": report.lower_total,
        "preconditions": flags,
    }


BOUND_COLUMNS = ["bound", "k_star", "ell_star", "tilde_lambda", "D", "D1", "N",
                 "bias_head", "bias_tail", "variance_term", "eff_bias",
                 "eff_var", "upper_total", "lower_total", "preconditions"]


def _run_bounds(config: dict, outdir: Path):
    problem = problem_from_dict(config["problem"])
    params = config.get("params", {})
    n = int(params["n"])
    constants = _constants(params)
    trace = problem.spectrum.trace
    lam = float(params.get("lambda", 1.0 / n))
    eta = float(params.get("eta", 1.0 / (2.0 * trace)))
    t = int(params.get("t", math.ceil(1.0 / (eta * lam))))
    eta0 = float(params.get("eta0", 1.0 / (4.0 * trace)))
    rows = [
        _report_row("ridge", ridge_bound(problem, n, lam, constants)),
        _report_row("gd_ridge_type", gd_ridge_type_bound(problem, n, eta, t, constants)),
        _report_row("gd_lower", gd_lower_bound(problem, n, eta, t, constants)),
        _report_row("gd_sgd_type", gd_sgd_type_bound(
            problem, n, eta, t, constants, gaussian=problem.design == "gaussian")),
        _report_row("sgd", sgd_bound(problem, n, eta0, constants)),
    ]
    _write_csv(outdir / "result.csv", BOUND_COLUMNS, rows)


def _estimator_config(spec: dict):
    kind = spec.get("kind")
    if kind == "ridge":
        return RidgeConfig(float(spec["lambda"]))
    if kind == "gd":
        return GDConfig(float(spec["eta"]), int(spec["t"]))
    if kind == "sgd":
        return SGDConfig(float(spec["eta0"]))
    raise ConfigError(f"unknown estimator kind {kind!r}")


def _run_simulate(config: dict, outdir: Path):
    problem = problem_from_dict(config["problem"])
    params = config.get("params", {})
    n = int(params["n"])
    est = _estimator_config(params["estimator"])
    trials = int(config["trials"])
    mc = monte_carlo_risk(problem, est, n, trials, config["seed"])
    rows = [{"method": mc.method, "mean": mc.mean, "stderr": mc.stderr,
             "trials": mc.trials}]
    if isinstance(est, SGDConfig) and problem.design == "gaussian":
        exact = sgd_exact_risk_gaussian(problem, n, est.eta0)
        rows.append({"method": exact.method, "mean": exact.mean,
                     "stderr": exact.stderr, "trials": exact.trials})
    _write_csv(outdir / "result.csv", ["method", "mean", "stderr", "trials"], rows)


def _grid_from(params: dict, key: str) -> np.ndarray:
    spec = params[key]
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    pts = int(spec.get("points", 15))
    if spec.get("log", True):
        return np.geomspace(float(spec["start"]), float(spec["stop"]), pts)
    return np.linspace(float(spec["start"]), float(spec["stop"]), pts)


def _run_sweep(config: dict, outdir: Path):
    problem = problem_from_dict(config["problem"])
    params = config.get("params", {})
    n = int(params["n"])
    algorithm = params["algorithm"]
    grid = _grid_from(params, "grid")
    sweep = tune_and_measure(problem, algorithm, n, grid, int(config["trials"]),
                             config["seed"], eta=params.get("eta"))
    rows = [{"value": float(v), "risk": r.mean, "stderr": r.stderr,
             "best": i == sweep.best_index}
            for i, (v, r) in enumerate(zip(sweep.grid, sweep.risks))]
    _write_csv(outdir / "result.csv", ["value", "risk", "stderr", "best"], rows)
    _write_plotdata(outdir / "plotdata_sweep.csv",
                    [(row["value"], row["risk"], row["stderr"]) for row in rows])


def _run_rates(config: dict, outdir: Path):
    params = config.get("params", {})
    rows = rate_table(
        a=float(params["a"]), r_list=[float(r) for r in params["r_list"]],
        algorithms=list(params["algorithms"]),
        n_grid=[int(n) for n in params["n_grid"]],
        trials=int(config["trials"]), seed=config["seed"],
        sigma2=float(params.get("sigma2", 1.0)))
    out_rows = []
    for row in rows:
        out_rows.append({k: row[k] for k in
                         ("algorithm", "a", "r", "slope", "slope_stderr",
                          "intercept", "theory", "interior_ok")})
        tag = f"{row['algorithm']}_r{row['r']:g}".replace(".", "p")
        _write_plotdata(outdir / f"plotdata_{tag}.csv",
                        [(n, risk, 0.0) for n, risk in row["points"]])
    _write_csv(outdir / "result.csv",
               ["algorithm", "a", "r", "slope", "slope_stderr", "intercept",
                "theory", "interior_ok"], out_rows)


def _run_compare(config: dict, outdir: Path):
    problem = problem_from_dict(config["problem"])
    params = config.get("params", {})
    n = int(params["n"])
    against = params.get("against", "ridge")
    trials = int(config["trials"])
    if against == "ridge":
        eta = float(params.get("eta", 1.0 / (2.0 * problem.spectrum.trace)))
        rows = dominance_gd_vs_ridge(problem, n, _grid_from(params, "lambda_grid"),
                                     eta, trials, config["seed"],
                                     _constants(params))
        header = ["lam", "t", "saturated", "ratio_mean", "ratio_max"]
        triples = [(r["lam"], r["ratio_mean"], 0.0) for r in rows]
    elif against == "sgd":
        rows = dominance_gd_vs_sgd(problem, n, _grid_from(params, "eta_grid"),
                                   trials, config["seed"], _constants(params))
        header = ["eta0", "t", "gd_risk", "sgd_risk", "ratio"]
        triples = [(r["eta0"], r["ratio"], 0.0) for r in rows]
    else:
        raise ConfigError(f"unknown comparison target {against!r}")
    _write_csv(outdir / "result.csv", header, rows)
    _write_plotdata(outdir / "plotdata_ratio.csv", triples)


def _run_separation(config: dict, outdir: Path):
    params = config.get("params", {})
    try:
        rows = hard_instance_separation(
            n_grid=[int(n) for n in params["n_grid"]],
            sigma2=float(params.get("sigma2", 0.25)),
            trials=int(config["trials"]), seed=config["seed"],
            memory_budget=int(params.get("memory_budget", 4_000_000_000)))
    except ValueError as exc:
        if "budget" in str(exc):
            raise RuntimeGuard(str(exc)) from exc
        raise
    header = ["n", "gd_best_risk", "gd_best_t", "sgd_risk", "gd_normalized",
              "sgd_normalized", "ell_star"]
    _write_csv(outdir / "result.csv", header, rows)
    _write_plotdata(outdir / "plotdata_gd.csv",
                    [(r["n"], r["gd_best_risk"], 0.0) for r in rows])
    _write_plotdata(outdir / "plotdata_sgd.csv",
                    [(r["n"], r["sgd_risk"], 0.0) for r in rows])


RUNNERS = {
    "bounds": _run_bounds,
    "simulate": _run_simulate,
    "sweep": _run_sweep,
    "rates": _run_rates,
    "compare": _run_compare,
    "separation": _run_separation,
}


def validate_config(path, command: str | None = None) -> list[str]:
    """Schema and semantic checks without executing; returns diagnostics.

    Entries are prefixed ``error:`` or ``warning:``; an empty list means the
    config is clean.
    """
    diags: list[str] = []
    try:
        with open(path) as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        return [f"error: config is not valid JSON: {exc}"]
    if not isinstance(config, dict):
        return ["error: config must be a JSON object"]
    cmd = command or config.get("command")
    if cmd not in COMMANDS:
        diags.append(f"error: unknown command {cmd!r}")
        return diags
    if command and "command" in config and config["command"] != command:
        diags.append(f"error: config command {config['command']!r} "
                     f"does not match CLI command {command!r}")
    params = config.get("params", {})
    problem_spec = config.get("problem")
    if cmd not in ("rates", "separation"):
        if problem_spec is None:
            diags.append("error: missing 'problem'")
        else:
            spec = problem_spec.get("spectrum", {})
            if spec.get("kind") == "spike":
                n = int(spec.get("params", {}).get("n", 0))
                d = int(spec.get("d") or n * n)
                if d < n * n:
                    diags.append(f"error: spike requires d >= n^2 = {n * n}")
            try:
                problem_from_dict(problem_spec)
            except (KeyError, ValueError) as exc:
                diags.append(f"error: invalid problem: {exc}")
    if cmd == "bounds" and "n" in params:
        if int(params["n"]) < 100:
            diags.append("warning: SGD bound precondition expects n >= 100")
        prob = None
        if problem_spec is not None and not any(d.startswith("error") for d in diags):
            prob = problem_from_dict(problem_spec)
        if prob is not None:
            cap = 1.0 / (4.0 * prob.spectrum.trace)
            if float(params.get("eta0", cap)) > cap:
                diags.append("warning: SGD stepsize exceeds 1/(4 tr(Sigma))")
    if cmd in ("simulate", "sweep", "compare") and "n" not in params:
        diags.append("error: params.n is required")
    if cmd == "rates":
        for key in ("a", "r_list", "algorithms", "n_grid"):
            if key not in params:
                diags.append(f"error: params.{key} is required")
    if cmd == "separation" and "n_grid" not in params:
        diags.append("error: params.n_grid is required")
    return diags


def run_config(path, command: str | None = None, out=None, seed=None,
               trials=None, threads=None) -> int:
    """Execute a config file; returns the process exit code."""
    diags = validate_config(path, command)
    errors = [d for d in diags if d.startswith("error")]
    for d in diags:
        print(d, file=sys.stderr)
    if errors:
        return EXIT_CONFIG
    with open(path) as fh:
        config = json.load(fh)
    cmd = command or config["command"]
    config["command"] = cmd
    if seed is not None:
        config["seed"] = seed
    config.setdefault("seed", 0)
    if trials is not None:
        config["trials"] = trials
    config.setdefault("trials", 10)
    if threads is not None:
        config["threads"] = threads
    config.setdefault("threads", int(os.environ.get("RISKLAB_THREADS", "1")))
    outdir = Path(out or config.get("output_dir", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    config["output_dir"] = str(outdir)
    config["version"] = __version__
    try:
        RUNNERS[cmd](config, outdir)
    except RuntimeGuard as exc:
        print(f"runtime guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    with open(outdir / "run.json", "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="risklab",
        description="Risk comparisons for ridge, early-stopped GD, and SGD "
                    "on well-specified linear regression.")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--validate-only", action="store_true")
    args = parser.parse_args(argv)
    try:
        if args.validate_only:
            diags = validate_config(args.config, args.command)
            for d in diags:
                print(d, file=sys.stderr)
            return EXIT_CONFIG if any(d.startswith("error") for d in diags) else EXIT_OK
        return run_config(args.config, args.command, out=args.out,
                          seed=args.seed, trials=args.trials,
                          threads=args.threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
