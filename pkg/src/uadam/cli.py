"""Command-line front end: run single experiments, parameter sweeps, verification suites.

Exit codes are a stable contract: 0 success, 1 verification failure, 2
configuration error (including config-file parse errors, reported with
position), 3 numeric abort (reported with the failing step index).

Config files are TOML with exactly four sections (problem, noise, optimizer,
output); unknown sections or keys are rejected so hyperparameter typos cannot
pass silently. Every CSV starts with '#'-prefixed metadata lines (tool
version, seed, RNG identifier, the full config as JSON) followed by a header
row, and can be re-read by this module.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .core import (
    RULE_PARAM_SPEC,
    ConfigurationError,
    NumericAbortError,
    RunTrace,
    UAdamConfig,
    as_vector,
)
from .diagnostics import ConvergenceConditions, convergence_summary, validate_convergence_conditions
from .driver import run_to_completion
from .lr_rules import bound_certificate_from_config
from .oracle import RNG_IDENTIFIER, NoiseModel, Problem, default_start, make_problem
from .verify import SUITE_NAMES, run_suite

TRACE_COLUMNS = RunTrace.COLUMNS
SUMMARY_COLUMNS = ("avg_grad_sq", "min_grad_sq", "plateau", "conditions_verdict")
SWEEP_COLUMNS = ("param", "value", "seed", "avg_grad_sq", "min_grad_sq", "plateau")

_NUMBER = ("number", (int, float))
_INTEGER = ("integer", (int,))
_STRING = ("string", (str,))
_NUMBER_LIST = ("list of numbers", (list,))

_SCHEMA = {
    "problem": {
        "name": _STRING,
        "dim": _INTEGER,
        "x0": _NUMBER_LIST,
        "diag": _NUMBER_LIST,
        "region_halfwidth": _NUMBER,
        "n_samples": _INTEGER,
        "data_seed": _INTEGER,
        "reg": _NUMBER,
    },
    "noise": {"d0": _NUMBER, "d1": _NUMBER, "seed": _INTEGER},
    "optimizer": {
        "eta": _NUMBER,
        "beta": _NUMBER,
        "lambda": _NUMBER,
        "rule": _STRING,
        "T": _INTEGER,
        "beta2": _NUMBER,
        "epsilon": _NUMBER,
        "grad_bound": _NUMBER,
        "clip_lo": _NUMBER,
        "clip_hi": _NUMBER,
        "theta": _NUMBER,
        "weights": _STRING,
        "beta1": _NUMBER,
    },
    "output": {"directory": _STRING, "stride": _INTEGER},
}

_REQUIRED = {
    "problem": ("name", "dim"),
    "noise": ("d0", "d1", "seed"),
    "optimizer": ("eta", "beta", "lambda", "rule", "T"),
}


@dataclass
class ExperimentSetup:
    """Everything needed to execute one run, plus the raw config for metadata."""

    problem: Problem
    x0: np.ndarray
    noise: NoiseModel
    optimizer: UAdamConfig
    directory: str | None
    stride: int
    raw: dict


def _check_section(section: str, table: dict) -> None:
    keys = _SCHEMA[section]
    for key, value in table.items():
        if key not in keys:
            raise ConfigurationError(f"unknown key '{section}.{key}'")
        kind, types = keys[key]
        if isinstance(value, bool) or not isinstance(value, types):
            raise ConfigurationError(f"'{section}.{key}' must be a {kind}, got {value!r}")
        if types == (list,) and not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            raise ConfigurationError(f"'{section}.{key}' must contain only numbers")
    for key in _REQUIRED.get(section, ()):
        if key not in table:
            raise ConfigurationError(f"missing required key '{section}.{key}'")


def validate_raw_config(raw: dict) -> None:
    """Strict structural validation of a parsed config document."""
    for section in raw:
        if section not in _SCHEMA:
            raise ConfigurationError(f"unknown section '{section}'")
    for section in _REQUIRED:
        if section not in raw:
            raise ConfigurationError(f"missing required section '{section}'")
    for section, table in raw.items():
        if not isinstance(table, dict):
            raise ConfigurationError(f"section '{section}' must be a table")
        _check_section(section, table)


def setup_from_raw(raw: dict) -> ExperimentSetup:
    """Build runnable objects from a validated raw config mapping."""
    validate_raw_config(raw)
    prob = dict(raw["problem"])
    name = prob.pop("name")
    dim = prob.pop("dim")
    x0_values = prob.pop("x0", None)
    problem = make_problem(name, dim, **prob)
    x0 = as_vector(x0_values) if x0_values is not None else default_start(problem)
    if x0.shape != (dim,):
        raise ConfigurationError(f"problem.x0 has length {x0.shape[0]}, expected dim={dim}")

    noise_tbl = raw["noise"]
    noise = NoiseModel(
        d0=float(noise_tbl["d0"]), d1=float(noise_tbl["d1"]), seed=int(noise_tbl["seed"])
    )

    opt = dict(raw["optimizer"])
    optimizer = UAdamConfig(
        eta=float(opt.pop("eta")),
        beta=float(opt.pop("beta")),
        lam=float(opt.pop("lambda")),
        rule=opt.pop("rule"),
        max_steps=int(opt.pop("T")),
        seed=noise.seed,
        **{k: (v if isinstance(v, str) else float(v)) for k, v in opt.items()},
    )

    out = raw.get("output", {})
    stride = int(out.get("stride", 1))
    if stride < 1:
        raise ConfigurationError("output.stride must be >= 1")
    return ExperimentSetup(
        problem=problem, x0=x0, noise=noise, optimizer=optimizer,
        directory=out.get("directory"), stride=stride, raw=raw,
    )


def read_raw_config(path: str | Path) -> dict:
    """Parse and structurally validate a config file without building objects."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as err:
        # the decoder message carries line and column
        raise ConfigurationError(f"config parse error in {path}: {err}")
    validate_raw_config(raw)
    return raw


def load_config(path: str | Path) -> ExperimentSetup:
    return setup_from_raw(read_raw_config(path))


def _metadata_lines(setup: ExperimentSetup) -> list[str]:
    return _raw_metadata_lines(setup.noise.seed, setup.raw)


def _raw_metadata_lines(seed: int, raw: dict) -> list[str]:
    return [
        f"# tool: uadam {__version__}",
        f"# seed: {seed}",
        f"# rng: {RNG_IDENTIFIER}",
        f"# config: {json.dumps(raw, sort_keys=True)}",
    ]


def write_trace_csv(path: Path, trace: RunTrace, setup: ExperimentSetup, stride: int = 1) -> None:
    """Trace rows (every stride-th step) under self-describing metadata comments."""
    if stride < 1:
        raise ConfigurationError("stride must be >= 1")
    columns = [trace.column(c) for c in TRACE_COLUMNS[1:]]
    with open(path, "w", newline="") as fh:
        for line in _metadata_lines(setup):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for i in range(0, len(trace), stride):
            writer.writerow([int(trace.t[i])] + [repr(float(col[i])) for col in columns])


def conditions_verdict(setup: ExperimentSetup) -> str:
    """Condition-validator verdict for a run config: satisfied, violated,
    infeasible, or unavailable (no certificate without a gradient bound)."""
    try:
        cert = bound_certificate_from_config(setup.optimizer)
        report = validate_convergence_conditions(
            ConvergenceConditions(
                eta_l=cert.eta_l, eta_u=cert.eta_u, L=setup.problem.lipschitz_L,
                d0=setup.noise.d0, d1=setup.noise.d1,
                beta=setup.optimizer.beta, lam=setup.optimizer.lam,
            )
        )
    except ConfigurationError:
        return "unavailable"
    if report.satisfied:
        return "satisfied"
    return "violated" if report.beta_feasible else "infeasible"


def write_summary_csv(path: Path, trace: RunTrace, setup: ExperimentSetup) -> dict:
    if len(trace) == 0:
        # zero-horizon run: statistics are undefined, flagged rather than invented
        row = {
            "avg_grad_sq": math.nan, "min_grad_sq": math.nan, "plateau": math.nan,
            "conditions_verdict": "undefined",
        }
    else:
        summary = convergence_summary(trace)
        row = {
            "avg_grad_sq": summary.avg_grad_sq,
            "min_grad_sq": summary.min_grad_sq,
            "plateau": summary.plateau,
            "conditions_verdict": conditions_verdict(setup),
        }
    with open(path, "w", newline="") as fh:
        for line in _metadata_lines(setup):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        writer.writerow(
            [repr(float(row[c])) if c != "conditions_verdict" else row[c] for c in SUMMARY_COLUMNS]
        )
    return row


def read_csv_with_meta(path: str | Path) -> tuple[list[dict], dict]:
    """Re-parse a CSV written by this tool: (rows as dicts, metadata dict)."""
    meta: dict = {}
    data_lines = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                key = key.strip()
                value = value.strip()
                meta[key] = json.loads(value) if key == "config" else value
            else:
                data_lines.append(line)
    reader = csv.DictReader(data_lines)
    rows = []
    for record in reader:
        parsed = {}
        for key, value in record.items():
            try:
                parsed[key] = int(value) if key == "t" else float(value)
            except ValueError:
                parsed[key] = value
        rows.append(parsed)
    return rows, meta


def cmd_run(args) -> int:
    try:
        setup = load_config(args.config)
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    outdir = Path(args.out or setup.directory or "out")
    outdir.mkdir(parents=True, exist_ok=True)
    stride = args.stride or setup.stride
    if stride < 1:
        print("error: stride must be >= 1", file=sys.stderr)
        return 2
    try:
        trace = run_to_completion(setup.optimizer, setup.problem, setup.noise, x0=setup.x0)
    except NumericAbortError as err:
        if err.trace is not None:
            write_trace_csv(outdir / "trace.csv", err.trace, setup, stride)
        print(f"error: numeric abort at step {err.step}", file=sys.stderr)
        return 3
    write_trace_csv(outdir / "trace.csv", trace, setup, stride)
    write_summary_csv(outdir / "summary.csv", trace, setup)
    print(f"wrote {outdir / 'trace.csv'} and {outdir / 'summary.csv'} ({len(trace)} steps)")
    return 0


def _format_value(value) -> str:
    return value if isinstance(value, str) else repr(value)


_RULE_TUNABLES = ("beta2", "epsilon", "clip_lo", "clip_hi", "theta", "weights", "beta1")


def _filter_rule_params(optimizer_table: dict, rule: str) -> dict:
    """Keep only the rule parameters the given rule uses.

    A rule sweep carries the union of every swept rule's parameters in one
    config; each cell then runs under the strict per-rule parameter set.
    """
    if rule not in RULE_PARAM_SPEC:
        return optimizer_table  # let config validation report the unknown rule
    required, optional = RULE_PARAM_SPEC[rule]
    keep = required | optional
    return {
        k: v for k, v in optimizer_table.items() if k not in _RULE_TUNABLES or k in keep
    }


def _run_sweep_cell(payload: tuple[dict, str, int, str, str, int]) -> tuple[dict | None, str | None]:
    """One sweep cell in a worker process; returns (summary row, error message)."""
    raw, cell_dir, stride, param, value_repr, seed = payload
    setup = setup_from_raw(raw)
    out = Path(cell_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        trace = run_to_completion(setup.optimizer, setup.problem, setup.noise, x0=setup.x0)
    except NumericAbortError as err:
        if err.trace is not None:
            write_trace_csv(out / "trace.csv", err.trace, setup, stride)
        return None, f"{cell_dir}: numeric abort at step {err.step}"
    write_trace_csv(out / "trace.csv", trace, setup, stride)
    row = write_summary_csv(out / "summary.csv", trace, setup)
    return (
        {"param": param, "value": value_repr, "seed": seed,
         "avg_grad_sq": row["avg_grad_sq"], "min_grad_sq": row["min_grad_sq"],
         "plateau": row["plateau"]},
        None,
    )


def cmd_sweep(args) -> int:
    # objects are built per cell, after the sweep override is applied; a rule
    # sweep's base config legitimately carries the union of rule parameters
    try:
        base_raw = read_raw_config(args.config)
        section, _, key = args.param.partition(".")
        if not key or section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigurationError(f"unknown sweep parameter {args.param!r}")
        if key not in base_raw.get(section, {}):
            raise ConfigurationError(f"swept parameter {args.param!r} is not set in the config")
        kind = _SCHEMA[section][key][0]
        values: list = []
        for token in args.values.split(","):
            token = token.strip()
            if kind == "string":
                values.append(token)
            elif kind == "integer":
                values.append(int(token))
            else:
                values.append(float(token))
        if args.seeds < 1:
            raise ConfigurationError("--seeds must be >= 1")
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    output_tbl = base_raw.get("output", {})
    outdir = Path(args.out or output_tbl.get("directory") or "sweep")
    outdir.mkdir(parents=True, exist_ok=True)
    stride = args.stride or int(output_tbl.get("stride", 1))
    if stride < 1:
        print("error: stride must be >= 1", file=sys.stderr)
        return 2
    base_seed = int(base_raw["noise"]["seed"])

    payloads = []
    for value in values:
        for offset in range(args.seeds):
            seed = base_seed + offset
            raw = json.loads(json.dumps(base_raw))  # deep copy of plain data
            raw[section][key] = value
            if args.param == "optimizer.rule":
                raw["optimizer"] = _filter_rule_params(raw["optimizer"], value)
            raw["noise"]["seed"] = seed
            cell_dir = outdir / f"{key}={_format_value(value)}" / f"seed={seed}"
            payloads.append((raw, str(cell_dir), stride, args.param, _format_value(value), seed))
        # validate the override eagerly so a bad value fails before any run
        try:
            setup_from_raw(payloads[-1][0])
        except ConfigurationError as err:
            print(f"error: {err}", file=sys.stderr)
            return 2

    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            outcomes = list(pool.map(_run_sweep_cell, payloads))
    else:
        outcomes = [_run_sweep_cell(p) for p in payloads]

    rows = [row for row, _ in outcomes if row is not None]
    failures = [msg for _, msg in outcomes if msg is not None]

    with open(outdir / "sweep_summary.csv", "w", newline="") as fh:
        for line in _raw_metadata_lines(base_seed, base_raw):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow(
                [row["param"], row["value"], row["seed"]]
                + [repr(float(row[c])) for c in SWEEP_COLUMNS[3:]]
            )

    print(f"wrote {len(rows)} of {len(payloads)} cells under {outdir}")
    for msg in failures:
        print(f"failed cell: {msg}", file=sys.stderr)
    return 3 if failures else 0


def cmd_verify(args) -> int:
    try:
        results = run_suite(args.suite)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    width = max(len(f"{r.suite}/{r.name}") for r in results)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.suite + '/' + r.name:<{width}}  {r.detail}")
        failed += 0 if r.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uadam", description="Unified adaptive momentum experiments and verification."
    )
    parser.add_argument("--version", action="version", version=f"uadam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one experiment from a config file")
    run_p.add_argument("--config", required=True, help="TOML config path")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--stride", type=int, default=None, help="record every k-th trace row")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a parameter sweep with paired seeds")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--param", required=True, help="parameter to sweep, e.g. optimizer.beta")
    sweep_p.add_argument("--values", required=True, help="comma-separated values")
    sweep_p.add_argument("--seeds", type=int, default=1, help="seeds per value (base seed + i)")
    sweep_p.add_argument("--out", default=None)
    sweep_p.add_argument("--workers", type=int, default=1)
    sweep_p.add_argument("--stride", type=int, default=None)
    sweep_p.set_defaults(func=cmd_sweep)

    verify_p = sub.add_parser("verify", help="run a built-in verification suite")
    verify_p.add_argument("suite", choices=list(SUITE_NAMES) + ["all"])
    verify_p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
