"""Command-line front end.

Subcommands:
  sweep            run a parameter sweep and emit CSV
  point            evaluate one (profile, z, gamma, n) tuple
  active-distance  largest decodable separation for a profile
  validate         cross-check the analytic chain against the simulator

Exit codes: 0 success, 1 configuration problem (including bad flags),
2 numerical failure, 3 validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from typing import IO

from . import __version__
from .channel import active_distance, db_to_linear, linear_to_db, preset
from .experiment import (
    DEFAULT_VALIDATION_SEED,
    ConfigError,
    ExperimentSpec,
    emit_csv,
    load_spec,
    run_sweep,
    run_validation,
    write_gnuplot_script,
)
from .numerics import NumericalError
from .simulator import SimConfig

__all__ = ["main"]

_EXIT_OK = 0
_EXIT_CONFIG = 1
_EXIT_NUMERICAL = 2
_EXIT_VALIDATION = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; here that status is
    reserved for numerical failures, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(_EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _seed_type(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not (0 <= value < 2 ** 64):
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit word")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _add_threshold_unit(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threshold-unit", choices=("db", "linear"), default="db",
                        help="how to read SNR thresholds (default: db)")


def _add_sim_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", type=_positive_int, default=None,
                        help="enable Monte Carlo columns with this many trials per row")
    parser.add_argument("--seed", type=_seed_type, default=None,
                        help="base simulation seed (unsigned 64-bit)")
    parser.add_argument("--workers", type=_positive_int, default=1,
                        help="worker threads (default: 1)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="wpbft",
                     description="PBFT consensus over fading wireless links: "
                                 "analytic sweeps and Monte Carlo checks.")
    parser.add_argument("--version", action="version", version=f"wpbft {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    sweep = commands.add_parser(
        "sweep", help="run a parameter sweep and emit CSV",
        description="Evaluate every (profile, setting, n) tuple of a sweep "
                    "spec and write one CSV row per tuple.")
    sweep.add_argument("--spec", default=None, metavar="PATH",
                       help="sweep spec file (INI; omitted means the built-in sweep)")
    sweep.add_argument("--out", default=None, metavar="PATH",
                       help="CSV destination (default: stdout)")
    sweep.add_argument("--gnuplot", default=None, metavar="PATH",
                       help="also write a gnuplot script for the CSV (needs --out)")
    sweep.add_argument("--raw-eq11", action="store_true",
                       help="treat capacity/rate as raw bit rates in the symbol "
                            "error model instead of per-bandwidth efficiencies")
    sweep.add_argument("--exploratory-fixed-positions", action="store_true",
                       help="simulate with node positions drawn once per trial "
                            "and frozen across stages (geometric mode)")
    _add_threshold_unit(sweep)
    _add_sim_flags(sweep)
    sweep.set_defaults(handler=_cmd_sweep)

    point = commands.add_parser(
        "point", help="evaluate one (profile, z, gamma, n) tuple",
        description="Print one sweep row as key=value lines.")
    point.add_argument("--profile", required=True, help="signal profile name")
    point.add_argument("--z", required=True, type=float, help="SNR threshold")
    point.add_argument("--gamma", required=True, type=float,
                       help="node density (nodes per unit area)")
    point.add_argument("--n", required=True, type=int, help="node count (3f + 1)")
    point.add_argument("--raw-eq11", action="store_true",
                       help="treat capacity/rate as raw bit rates in the symbol "
                            "error model instead of per-bandwidth efficiencies")
    _add_threshold_unit(point)
    _add_sim_flags(point)
    point.set_defaults(handler=_cmd_point)

    active = commands.add_parser(
        "active-distance", help="largest decodable separation for a profile",
        description="Distance at which a message with the given fading gain "
                    "sits exactly at the SNR threshold.")
    active.add_argument("--profile", required=True, help="signal profile name")
    active.add_argument("--z", required=True, type=float, help="SNR threshold")
    active.add_argument("--gain", type=float, default=1.0,
                        help="channel fading gain h (default: 1.0)")
    _add_threshold_unit(active)
    active.set_defaults(handler=_cmd_active_distance)

    validate = commands.add_parser(
        "validate", help="cross-check the analytic chain against the simulator",
        description="Run the built-in analytic-versus-simulation grid and "
                    "report each cell.")
    validate.add_argument("--trials", type=_positive_int, default=100_000,
                          help="Monte Carlo trials per cell (default: 100000)")
    validate.add_argument("--seed", type=_seed_type, default=DEFAULT_VALIDATION_SEED,
                          help=f"base seed (default: {DEFAULT_VALIDATION_SEED})")
    validate.add_argument("--workers", type=_positive_int, default=1,
                          help="worker threads (default: 1)")
    validate.set_defaults(handler=_cmd_validate)

    return parser


def _threshold_db(value: float, unit: str) -> float:
    if unit == "linear":
        if value <= 0.0:
            raise ConfigError(f"linear threshold must be > 0, got {value!r}")
        return linear_to_db(value)
    return value


def _apply_sim_overrides(spec: ExperimentSpec, trials: int | None,
                         seed: int | None) -> ExperimentSpec:
    sim = spec.sim
    if trials is not None:
        if sim is None:
            sim = SimConfig(trials=trials, seed=seed if seed is not None else 0)
        else:
            sim = dataclasses.replace(sim, trials=trials)
    if seed is not None and sim is not None:
        sim = dataclasses.replace(sim, seed=seed)
    if sim is spec.sim:
        return spec
    outputs = spec.outputs
    if "sim" not in outputs:
        outputs = outputs + ("sim",)
    return dataclasses.replace(spec, sim=sim, outputs=outputs)


def _cmd_sweep(args) -> int:
    spec = load_spec(args.spec, threshold_unit=args.threshold_unit)
    spec = _apply_sim_overrides(spec, args.trials, args.seed)
    if args.exploratory_fixed_positions and spec.sim is None:
        raise ConfigError("--exploratory-fixed-positions needs simulation trials "
                          "(pass --trials or add a [sim] section)")
    if args.gnuplot is not None and args.out is None:
        raise ConfigError("--gnuplot needs --out so the script can name the CSV file")

    rows = run_sweep(spec, workers=args.workers, raw_units=args.raw_eq11,
                     fixed_positions=args.exploratory_fixed_positions)
    if args.out is None:
        emit_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            emit_csv(rows, handle)
    if args.gnuplot is not None:
        write_gnuplot_script(args.gnuplot, args.out, spec)
    return _EXIT_OK


def _point_spec(args) -> ExperimentSpec:
    try:
        profile = preset(args.profile)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    z_db = _threshold_db(args.z, args.threshold_unit)
    sim = None
    if args.trials is not None:
        sim = SimConfig(trials=args.trials,
                        seed=args.seed if args.seed is not None else 0)
    outputs = ("ps", "stages", "consensus", "delays")
    if sim is not None:
        outputs = outputs + ("sim",)
    return ExperimentSpec(profiles=(profile,), settings=((z_db, args.gamma),),
                          n_values=(args.n,), outputs=outputs, sim=sim)


def _cmd_point(args) -> int:
    spec = _point_spec(args)
    (row,) = run_sweep(spec, workers=args.workers, raw_units=args.raw_eq11)
    for field in dataclasses.fields(row):
        value = getattr(row, field.name)
        if value is None:
            continue
        text = value if isinstance(value, str) else repr(value)
        print(f"{field.name}={text}")
    return _EXIT_OK


def _cmd_active_distance(args) -> int:
    try:
        profile = preset(args.profile)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    z_db = _threshold_db(args.z, args.threshold_unit)
    distance = active_distance(profile, db_to_linear(z_db), args.gain)
    print(f"active_distance_m={distance!r}")
    return _EXIT_OK


def _cmd_validate(args) -> int:
    cells = run_validation(trials=args.trials, seed=args.seed, workers=args.workers)
    failures = 0
    for cell in cells:
        status = "ok" if cell.passed else "FAIL"
        failures += 0 if cell.passed else 1
        print(f"n={cell.node_count} ps={cell.link_success:g} "
              f"analytic={cell.analytic:.6f} sim={cell.estimate.p_hat:.6f} "
              f"ci=[{cell.estimate.ci_low:.6f}, {cell.estimate.ci_high:.6f}] {status}")
    if failures:
        print(f"validation FAILED: {failures} of {len(cells)} cells outside "
              f"the confidence interval")
        return _EXIT_VALIDATION
    print(f"validation passed: {len(cells)} of {len(cells)} cells inside "
          f"the confidence interval")
    return _EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code is None else int(exc.code)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"wpbft: configuration error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except NumericalError as exc:
        print(f"wpbft: numerical error: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL
    except ValueError as exc:
        print(f"wpbft: configuration error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
