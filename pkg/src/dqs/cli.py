"""Command-line front end: config ingestion, scenario dispatch, table output.

Usage: dqs <command> --config <path> [--out <path>] [--format csv|json] [--threads N]
Commands: bounds, saturate, noise-scan, two-mode, validate.
Exit codes: 0 ok, 1 config error, 2 numerical-validity violation, 3 validate breach.
The JSON config schema is documented in the README.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .channels import NoiseSpec
from .errors import ConfigError, DqsError, TruncationError, ValidityError
from .fock_core import StateSpec
from .metrology import (
    NumericsConfig,
    analytic_two_mode_parity_fi,
    homodyne_fi_gaussian,
)
from .scenarios import (
    Strategy,
    build_strategy_state,
    evaluate_probe,
    noise_scan,
    oracle_crosscheck,
    saturation_scan,
)

CSV_VERSION = "dqs-csv-v1"
REPORT_COLUMNS = (
    "axis",
    "qfi",
    "cfi",
    "f_self",
    "f_cross",
    "bound_eq6",
    "bound_eq7",
    "bound_eq10",
    "bound_eq17",
    "bound_phase_fixed",
    "sql",
    "parity_prediction",
    "chain_ok",
)


def _require_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in {where}")


def _parse_spec(probe: dict) -> StateSpec:
    family = probe.get("family")
    if family == "fock":
        return StateSpec.fock(int(probe.get("n", 0)))
    if family == "squeezed_vacuum":
        if "nbar" in probe:
            return StateSpec.squeezed_vacuum_nbar(float(probe["nbar"]))
        return StateSpec.squeezed_vacuum(float(probe.get("r", 0.0)))
    if family == "coherent":
        return StateSpec.coherent(complex(probe.get("amplitude", 0.0)))
    if family == "cat":
        if "nbar" in probe:
            return StateSpec.cat_nbar(float(probe["nbar"]), int(probe.get("sign", 1)))
        return StateSpec.cat(float(probe.get("gamma", 0.0)), int(probe.get("sign", 1)))
    raise ConfigError(f"unknown or missing state family {family!r}")


def _parse_strategy(config: dict) -> Strategy:
    probe = config.get("probe")
    if not isinstance(probe, dict):
        raise ConfigError("config must contain a 'probe' object")
    _require_keys(
        probe,
        {"kind", "family", "n", "r", "amplitude", "gamma", "sign", "nbar", "M", "measurement", "cutoff"},
        "probe",
    )
    try:
        return Strategy(
            kind=probe.get("kind", "separable"),
            base=_parse_spec(probe),
            M=int(probe.get("M", 2)),
            measurement=probe.get("measurement", "joint_parity"),
            cutoff=int(probe.get("cutoff", 12)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_grid(config: dict) -> list[float]:
    grid = config.get("grid")
    if isinstance(grid, dict):
        _require_keys(grid, {"alpha", "start", "stop", "num", "spacing"}, "grid")
        if "alpha" in grid:
            values = [float(a) for a in grid["alpha"]]
        else:
            try:
                start, stop, num = float(grid["start"]), float(grid["stop"]), int(grid["num"])
            except KeyError as exc:
                raise ConfigError(f"grid missing key {exc}") from exc
            if grid.get("spacing", "linear") == "log":
                values = list(np.geomspace(start, stop, num))
            else:
                values = list(np.linspace(start, stop, num))
    elif isinstance(grid, list):
        values = [float(a) for a in grid]
    else:
        raise ConfigError("config must contain a 'grid' (list or object)")
    if not values:
        raise ConfigError("empty alpha grid")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("alpha grid must be strictly increasing")
    if any(a <= 0 for a in values):
        raise ConfigError("alpha values must be > 0")
    return values


def _parse_numerics(config: dict) -> NumericsConfig:
    section = config.get("numerics", {})
    _require_keys(section, {"fd_step", "eigen_cutoff", "richardson"}, "numerics")
    try:
        return NumericsConfig(
            fd_step=float(section.get("fd_step", 1e-4)),
            eigen_cutoff=float(section.get("eigen_cutoff", 1e-12)),
            richardson=bool(section.get("richardson", False)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_noise(config: dict) -> list[NoiseSpec]:
    noise = config.get("noise")
    if not isinstance(noise, list) or not noise:
        raise ConfigError("noise-scan config must contain a nonempty 'noise' list")
    out = []
    for i, item in enumerate(noise):
        _require_keys(item, {"kind", "kappa_t", "nbar", "gamma_t", "sigma"}, f"noise[{i}]")
        try:
            out.append(
                NoiseSpec(
                    kind=item.get("kind", ""),
                    kappa_t=float(item.get("kappa_t", 0.0)),
                    nbar=float(item.get("nbar", 0.0)),
                    gamma_t=float(item.get("gamma_t", 0.0)),
                    sigma=float(item.get("sigma", 0.0)),
                )
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _report_row(axis_value: float, report) -> list:
    chain_ok = report.cfi is None or (
        (report.qfi is None or report.cfi <= report.qfi * 1.01 + 1e-6)
        and report.bound_eq6 <= report.bound_eq7 * (1 + 1e-12) + 1e-9
        and report.bound_eq7 <= report.bound_eq10 * (1 + 1e-12) + 1e-9
    )
    return [
        axis_value,
        report.qfi,
        report.cfi,
        report.f_self,
        report.f_cross,
        report.bound_eq6,
        report.bound_eq7,
        report.bound_eq10,
        report.bound_eq17,
        report.bound_phase_fixed,
        report.sql,
        report.metadata.get("parity_prediction"),
        chain_ok,
    ]


def _write_table(path, columns, rows, fmt: str, command: str, config: dict) -> None:
    if fmt == "csv":
        lines = [f"# {CSV_VERSION} command={command}", ",".join(columns)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        payload = {
            "version": __version__,
            "table": CSV_VERSION,
            "command": command,
            "config": config,
            "columns": list(columns),
            "rows": [
                [float(v) if isinstance(v, float) else v for v in row] for row in rows
            ],
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _cmd_bounds(config: dict, args) -> tuple[tuple, list]:
    strategy = _parse_strategy(config)
    numerics = _parse_numerics(config)
    alpha = float(config.get("alpha", 1e-3))
    probe = build_strategy_state(strategy)
    compute_qfi = bool(config.get("compute_qfi", False))
    report = evaluate_probe(
        probe, alpha, numerics, measurement=strategy.measurement, compute_qfi=compute_qfi
    )
    return REPORT_COLUMNS, [_report_row(alpha, report)]


def _cmd_saturate(config: dict, args) -> tuple[tuple, list]:
    strategy = _parse_strategy(config)
    numerics = _parse_numerics(config)
    grid = _parse_grid(config)
    result = saturation_scan(strategy, grid, numerics, threads=args.threads)
    return REPORT_COLUMNS, [_report_row(a, r) for a, r in zip(result.axis, result.reports)]


def _cmd_noise_scan(config: dict, args) -> tuple[tuple, list]:
    strategy = _parse_strategy(config)
    numerics = _parse_numerics(config)
    alpha = float(config.get("alpha", 1e-3))
    noise = _parse_noise(config)
    result = noise_scan(strategy, noise, alpha, numerics, threads=args.threads)
    columns = ("noise_kind", "noise_value") + REPORT_COLUMNS[1:]
    rows = []
    for spec, report in zip(noise, result.reports):
        value = {"loss": spec.kappa_t, "heating": spec.kappa_t, "dephasing": spec.gamma_t, "jitter": spec.sigma}[spec.kind]
        rows.append([spec.kind, value] + _report_row(0.0, report)[1:])
    return columns, rows


def _cmd_two_mode(config: dict, args) -> tuple[tuple, list]:
    section = config.get("two_mode", {})
    _require_keys(section, {"families", "strategies", "nbar", "alpha", "r"}, "two_mode")
    families = section.get("families", ["fock", "squeezed_vacuum", "cat"])
    strategies = section.get("strategies", ["delocalized", "single_mode", "separable"])
    nbar = float(section.get("nbar", 1.0))
    alphas = [float(a) for a in section.get("alpha", [1e-3])]
    r = float(section.get("r", math.asinh(math.sqrt(nbar))))
    columns = ("family", "strategy", "alpha", "fi", "homodyne_two_copies", "homodyne_mixed")
    rows = []
    for family in families:
        for strat in strategies:
            for alpha in alphas:
                fi = analytic_two_mode_parity_fi(family, nbar, alpha, strat)
                rows.append(
                    [
                        family,
                        strat,
                        alpha,
                        fi,
                        homodyne_fi_gaussian("two_copies", r),
                        homodyne_fi_gaussian("interferometric_mixed", r, alpha),
                    ]
                )
    return columns, rows


VALIDATE_BATTERY = (
    ("fock1_single_mode", Strategy("delocalized", StateSpec.fock(1), M=1, cutoff=12)),
    ("fock2_delocalized", Strategy("delocalized", StateSpec.fock(2), M=2, cutoff=10)),
    ("fock1_separable", Strategy("separable", StateSpec.fock(1), M=2, cutoff=8)),
    (
        "squeezed_delocalized",
        Strategy("delocalized", StateSpec.squeezed_vacuum(0.4), M=2, cutoff=22),
    ),
    ("coherent_single_mode", Strategy("separable", StateSpec.coherent(0.5), M=1, cutoff=14)),
)

VALIDATE_TOLERANCES = {
    "analytic_vs_numeric": 1e-3,
    "prediction_vs_numeric": 0.01,
    "chain_violation": 0.01,
}


def _cmd_validate(config: dict, args) -> tuple[tuple, list, bool]:
    numerics = _parse_numerics(config) if config else NumericsConfig()
    alpha = float(config.get("alpha", 1e-3)) if config else 1e-3
    columns = (
        "case",
        "family",
        "strategy",
        "cfi",
        "qfi",
        "bound_eq6",
        "analytic_vs_numeric",
        "prediction_vs_numeric",
        "chain_violation",
        "pass",
    )
    rows = []
    breached = False
    for name, strategy in VALIDATE_BATTERY:
        rep = oracle_crosscheck(strategy, alpha, numerics)
        ok = True
        for key, tol in VALIDATE_TOLERANCES.items():
            if rep.get(key) is not None and rep[key] > tol:
                ok = False
        breached = breached or not ok
        rows.append(
            [
                name,
                rep["family"],
                rep["strategy"],
                rep["cfi"],
                rep["qfi"],
                rep["bound_eq6"],
                rep["analytic_vs_numeric"],
                rep["prediction_vs_numeric"],
                rep["chain_violation"],
                ok,
            ]
        )
    return columns, rows, breached


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dqs", description="Displacement-sensing Fisher-information tables"
    )
    parser.add_argument(
        "command", choices=["bounds", "saturate", "noise-scan", "two-mode", "validate"]
    )
    parser.add_argument("--config", help="path to the JSON run configuration")
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    if args.threads is None:
        args.threads = int(os.environ.get("DQS_THREADS", "1"))

    config: dict = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"dqs: config error: {exc}", file=sys.stderr)
            return 1
    elif args.command != "validate":
        print("dqs: --config is required for this command", file=sys.stderr)
        return 1

    top_allowed = {
        "probe", "grid", "alpha", "noise", "numerics", "two_mode", "compute_qfi",
    }
    try:
        if isinstance(config, dict):
            _require_keys(config, top_allowed, "config")
        else:
            raise ConfigError("top-level config must be a JSON object")
        if args.command == "bounds":
            columns, rows = _cmd_bounds(config, args)
        elif args.command == "saturate":
            columns, rows = _cmd_saturate(config, args)
        elif args.command == "noise-scan":
            columns, rows = _cmd_noise_scan(config, args)
        elif args.command == "two-mode":
            columns, rows = _cmd_two_mode(config, args)
        else:
            columns, rows, breached = _cmd_validate(config, args)
            _write_table(args.out, columns, rows, args.format, args.command, config)
            if breached:
                print("dqs: validate tolerance breach", file=sys.stderr)
                return 3
            return 0
    except ConfigError as exc:
        print(f"dqs: config error: {exc}", file=sys.stderr)
        return 1
    except (ValidityError, TruncationError) as exc:
        print(f"dqs: numerical validity violation: {exc}", file=sys.stderr)
        return 2
    except DqsError as exc:
        print(f"dqs: error: {exc}", file=sys.stderr)
        return 2

    _write_table(args.out, columns, rows, args.format, args.command, config)
    return 0


if __name__ == "__main__":
    sys.exit(main())
