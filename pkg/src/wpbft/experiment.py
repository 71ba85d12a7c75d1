"""Sweep orchestration: spec files, row evaluation, CSV output, validation.

A sweep walks (signal profile) x (threshold z, density gamma) x (node
count n) and reports, per tuple, the analytic chain (per-link success,
per-stage and end-to-end consensus rates, stage delays) plus optional
Monte Carlo columns. Output is deterministic: rows are ordered
profile-major, floats are written with repr round-tripping, and per-row
simulation seeds derive from the spec seed and the row index.
"""

from __future__ import annotations

import configparser
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable

from .channel import (
    PRESETS,
    NetworkGeometry,
    SignalProfile,
    avg_success_prob,
    linear_to_db,
)
from .consensus import FaultBudget, consensus_success, marginal_stage_rates
from .latency import DelayReport, solve_symbol_duration
from .simulator import SimConfig, SimEstimate, estimate_consensus_rate
from .simulator._rng import MASK64, mix64

__all__ = [
    "ConfigError",
    "DEFAULT_VALIDATION_SEED",
    "ExperimentSpec",
    "SweepRow",
    "ValidationCell",
    "default_spec",
    "emit_csv",
    "load_spec",
    "run_sweep",
    "run_validation",
    "write_gnuplot_script",
]

_ROW_SALT = 0xD1B54A32D192ED03
_OUTPUT_GROUPS = ("ps", "stages", "consensus", "delays", "sim")

DEFAULT_PROFILES = ("thz-0.22", "mmwave-28")
DEFAULT_SETTINGS = ((6.0, 2.0), (6.0, 5.0), (4.0, 5.0))
DEFAULT_N_VALUES = tuple(range(4, 101, 3))
DEFAULT_VALIDATION_SEED = 20240817

VALIDATION_NODE_COUNTS = (4, 7, 10, 13)
VALIDATION_LINK_RATES = (0.8, 0.9, 0.95)


class ConfigError(ValueError):
    """A spec file or command-line configuration problem."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything one sweep needs: profiles, settings, sizes, outputs, sim."""

    profiles: tuple[SignalProfile, ...]
    settings: tuple[tuple[float, float], ...]  # (z_db, density)
    n_values: tuple[int, ...]
    outputs: tuple[str, ...]
    sim: SimConfig | None = None

    def __post_init__(self):
        if not self.profiles:
            raise ConfigError("at least one signal profile is required")
        if not self.settings:
            raise ConfigError("at least one (z, density) setting is required")
        if not self.n_values:
            raise ConfigError("at least one node count is required")
        for z_db, density in self.settings:
            if not math.isfinite(z_db):
                raise ConfigError(f"threshold must be finite, got {z_db!r}")
            if not (math.isfinite(density) and density > 0.0):
                raise ConfigError(f"density must be > 0, got {density!r}")
        for n in self.n_values:
            if not (isinstance(n, int) and n >= 4 and n % 3 == 1):
                raise ConfigError(
                    f"node count {n!r} is invalid: n must equal 3f + 1 for "
                    f"integer f >= 1")
        seen = set()
        for name in self.outputs:
            if name not in _OUTPUT_GROUPS:
                raise ConfigError(
                    f"unknown output group {name!r} (known: {', '.join(_OUTPUT_GROUPS)})")
            if name in seen:
                raise ConfigError(f"output group {name!r} listed twice")
            seen.add(name)
        if "sim" in self.outputs and self.sim is None:
            raise ConfigError("outputs request 'sim' but no simulation is configured")


@dataclass(frozen=True)
class SweepRow:
    """One (profile, setting, n) evaluation, ready for CSV."""

    signal: str
    z_db: float
    gamma: float
    n: int
    f: int
    ps: float
    p_pre_prepare: float
    p_prepare: float
    p_commit: float
    p_reply: float
    p_consensus: float
    T_s: float
    t1_s: float
    t2_s: float
    t_total_s: float
    sim_p_hat: float | None = None
    sim_ci_low: float | None = None
    sim_ci_high: float | None = None


@dataclass(frozen=True)
class ValidationCell:
    """One analytic-versus-simulation comparison."""

    node_count: int
    link_success: float
    analytic: float
    estimate: SimEstimate
    passed: bool


def default_spec(sim: SimConfig | None = None) -> ExperimentSpec:
    """The built-in sweep: both presets, three settings, n = 4..100 step 3."""
    outputs = ("ps", "stages", "consensus", "delays")
    if sim is not None:
        outputs = outputs + ("sim",)
    return ExperimentSpec(
        profiles=tuple(PRESETS[name] for name in DEFAULT_PROFILES),
        settings=DEFAULT_SETTINGS,
        n_values=DEFAULT_N_VALUES,
        outputs=outputs,
        sim=sim,
    )


# ---------------------------------------------------------------------------
# Spec files
# ---------------------------------------------------------------------------

def _parse_floats(text: str, count: int, context: str) -> tuple[float, ...]:
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != count:
        raise ConfigError(f"{context}: expected {count} comma-separated values, "
                          f"got {text!r}")
    try:
        return tuple(float(part) for part in parts)
    except ValueError:
        raise ConfigError(f"{context}: could not parse {text!r} as numbers") from None


def _parse_names(text: str) -> list[str]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    if not names:
        raise ConfigError("expected a comma-separated list of names")
    return names


def _parse_n_values(section: configparser.SectionProxy) -> tuple[int, ...]:
    keys = set(section.keys())
    if keys - {"range", "list"}:
        raise ConfigError(f"[n_values] allows keys 'range' or 'list', got {sorted(keys)}")
    if ("range" in keys) == ("list" in keys):
        raise ConfigError("[n_values] needs exactly one of 'range' or 'list'")
    if "range" in keys:
        parts = section["range"].split(":")
        if len(parts) != 3:
            raise ConfigError(f"[n_values] range must be start:stop:step, "
                              f"got {section['range']!r}")
        try:
            start, stop, step = (int(part) for part in parts)
        except ValueError:
            raise ConfigError(f"[n_values] range has non-integer parts: "
                              f"{section['range']!r}") from None
        if step < 1:
            raise ConfigError("[n_values] range step must be >= 1")
        return tuple(range(start, stop + 1, step))
    try:
        return tuple(int(part.strip()) for part in section["list"].split(","))
    except ValueError:
        raise ConfigError(f"[n_values] list has non-integer entries: "
                          f"{section['list']!r}") from None


_PROFILE_FIELDS = (
    "transmit_power_w", "noise_power_w", "bandwidth_hz", "capacity_bps",
    "rate_bps", "path_loss_exponent", "carrier_frequency_hz",
)


def _parse_custom_profile(name: str, section: configparser.SectionProxy) -> SignalProfile:
    values = {}
    for field_name in _PROFILE_FIELDS:
        if field_name not in section:
            raise ConfigError(f"[profile.{name}] is missing {field_name!r}")
        try:
            values[field_name] = float(section[field_name])
        except ValueError:
            raise ConfigError(f"[profile.{name}] {field_name} is not a number: "
                              f"{section[field_name]!r}") from None
    extra = set(section.keys()) - set(_PROFILE_FIELDS)
    if extra:
        raise ConfigError(f"[profile.{name}] has unknown keys {sorted(extra)}")
    try:
        return SignalProfile(name=name, **values)
    except ValueError as exc:
        raise ConfigError(f"[profile.{name}] is invalid: {exc}") from None


def load_spec(path: str | None, threshold_unit: str = "db",
              sim_override: SimConfig | None = None) -> ExperimentSpec:
    """Read a sweep spec file; a missing path or empty file means defaults.

    The format is INI-style: [profiles] use=..., [settings] with one
    "z, density" pair per line, [n_values] range=start:stop:step or
    list=..., an optional [sim] section, an optional [outputs] section,
    and optional [profile.<name>] definitions. With
    threshold_unit="linear", setting thresholds are linear SNR ratios and
    are converted to dB on load.
    """
    if threshold_unit not in ("db", "linear"):
        raise ConfigError(f"threshold unit must be 'db' or 'linear', got {threshold_unit!r}")

    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                parser.read_file(handle)
        except OSError as exc:
            raise ConfigError(f"cannot read spec file {path!r}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed spec file {path!r}: {exc}") from None

    known = {"profiles", "settings", "n_values", "sim", "outputs"}
    custom_profiles: dict[str, SignalProfile] = {}
    for section_name in parser.sections():
        if section_name.startswith("profile."):
            short = section_name[len("profile."):]
            if not short:
                raise ConfigError("custom profile sections need a name: [profile.<name>]")
            custom_profiles[short] = _parse_custom_profile(short, parser[section_name])
        elif section_name not in known:
            raise ConfigError(f"unknown section [{section_name}]")

    catalogue = dict(PRESETS)
    catalogue.update(custom_profiles)

    if parser.has_section("profiles"):
        section = parser["profiles"]
        if set(section.keys()) != {"use"}:
            raise ConfigError("[profiles] takes exactly one key, 'use'")
        names = _parse_names(section["use"])
    else:
        names = list(DEFAULT_PROFILES)
    try:
        profiles = tuple(catalogue[name] for name in names)
    except KeyError as exc:
        raise ConfigError(
            f"unknown signal profile {exc.args[0]!r} "
            f"(known: {', '.join(sorted(catalogue))})") from None

    if parser.has_section("settings"):
        raw_settings = [
            _parse_floats(value, 2, f"[settings] {key}")
            for key, value in parser["settings"].items()
        ]
        if not raw_settings:
            raise ConfigError("[settings] lists no (z, density) pairs")
    else:
        raw_settings = list(DEFAULT_SETTINGS)
    if threshold_unit == "linear":
        converted = []
        for z_value, density in raw_settings:
            if not (math.isfinite(z_value) and z_value > 0.0):
                raise ConfigError(
                    f"linear threshold must be > 0, got {z_value!r}")
            converted.append((linear_to_db(z_value), density))
        raw_settings = converted
    settings = tuple((float(z), float(g)) for z, g in raw_settings)

    if parser.has_section("n_values"):
        n_values = _parse_n_values(parser["n_values"])
    else:
        n_values = DEFAULT_N_VALUES

    sim = sim_override
    if sim is None and parser.has_section("sim"):
        section = parser["sim"]
        extra = set(section.keys()) - {"trials", "seed", "mode", "confidence"}
        if extra:
            raise ConfigError(f"[sim] has unknown keys {sorted(extra)}")
        if "trials" not in section:
            raise ConfigError("[sim] requires 'trials'")
        try:
            sim = SimConfig(
                trials=int(section["trials"]),
                seed=int(section.get("seed", "0")),
                mode=section.get("mode", "iid-link").strip(),
                confidence_level=float(section.get("confidence", "0.99")),
            )
        except ValueError as exc:
            raise ConfigError(f"[sim] is invalid: {exc}") from None

    if parser.has_section("outputs"):
        section = parser["outputs"]
        if set(section.keys()) != {"use"}:
            raise ConfigError("[outputs] takes exactly one key, 'use'")
        outputs = tuple(_parse_names(section["use"]))
    else:
        outputs = ("ps", "stages", "consensus", "delays")
        if sim is not None:
            outputs = outputs + ("sim",)

    try:
        return ExperimentSpec(profiles=profiles, settings=settings,
                              n_values=tuple(n_values), outputs=outputs, sim=sim)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# Row evaluation
# ---------------------------------------------------------------------------

def _row_seed(base_seed: int, row_index: int) -> int:
    return mix64((base_seed + (row_index + 1) * _ROW_SALT) & MASK64)


def _evaluate_row(spec: ExperimentSpec, row_index: int, profile: SignalProfile,
                  z_db: float, density: float, n: int, raw_units: bool,
                  fixed_positions: bool) -> SweepRow:
    geometry = NetworkGeometry(node_count=n, density=density, snr_threshold_db=z_db)
    budget = FaultBudget.from_node_count(n)
    ps = avg_success_prob(profile, geometry)
    stages = marginal_stage_rates(budget, ps)
    duration = solve_symbol_duration(profile, ps, raw_units=raw_units)
    delays = DelayReport.for_network(duration, n)

    sim_p_hat = sim_ci_low = sim_ci_high = None
    if spec.sim is not None and "sim" in spec.outputs:
        config = SimConfig(
            trials=spec.sim.trials,
            seed=_row_seed(spec.sim.seed, row_index),
            mode="geometric" if fixed_positions else spec.sim.mode,
            confidence_level=spec.sim.confidence_level,
        )
        link_model = (ps if config.mode == "iid-link" else (profile, geometry))
        estimate = estimate_consensus_rate(config, budget, link_model,
                                           fixed_positions=fixed_positions)
        sim_p_hat = estimate.p_hat
        sim_ci_low = estimate.ci_low
        sim_ci_high = estimate.ci_high

    return SweepRow(
        signal=profile.name,
        z_db=z_db,
        gamma=density,
        n=n,
        f=budget.fault_tolerance,
        ps=ps,
        p_pre_prepare=stages.pre_prepare,
        p_prepare=stages.prepare,
        p_commit=stages.commit,
        p_reply=stages.reply,
        p_consensus=stages.consensus,
        T_s=duration,
        t1_s=delays.broadcast_delay,
        t2_s=delays.reply_delay,
        t_total_s=delays.total_delay,
        sim_p_hat=sim_p_hat,
        sim_ci_low=sim_ci_low,
        sim_ci_high=sim_ci_high,
    )


def run_sweep(spec: ExperimentSpec, workers: int = 1, raw_units: bool = False,
              fixed_positions: bool = False) -> list[SweepRow]:
    """Evaluate every (profile, setting, n) tuple of the spec, in order.

    Rows may be computed concurrently; the returned order (profile-major,
    then setting, then ascending n) and all values are independent of
    `workers`.
    """
    if not (isinstance(workers, int) and workers >= 1):
        raise ConfigError(f"workers must be a positive integer, got {workers!r}")
    tuples = [
        (profile, z_db, density, n)
        for profile in spec.profiles
        for z_db, density in spec.settings
        for n in sorted(spec.n_values)
    ]
    if workers == 1:
        return [
            _evaluate_row(spec, index, profile, z_db, density, n,
                          raw_units, fixed_positions)
            for index, (profile, z_db, density, n) in enumerate(tuples)
        ]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_evaluate_row, spec, index, profile, z_db, density, n,
                        raw_units, fixed_positions)
            for index, (profile, z_db, density, n) in enumerate(tuples)
        ]
        return [future.result() for future in futures]


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

_BASE_COLUMNS = ("signal", "z_db", "gamma", "n", "f", "ps", "p_pre_prepare",
                 "p_prepare", "p_commit", "p_reply", "p_consensus", "T_s",
                 "t1_s", "t2_s", "t_total_s")
_SIM_COLUMNS = ("sim_p_hat", "sim_ci_low", "sim_ci_high")


def _format_value(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        raise TypeError("unexpected boolean in a CSV row")
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def emit_csv(rows: Iterable[SweepRow], stream: IO[str]) -> None:
    """Write rows as CSV; the column set and order are fixed, with the
    simulation columns appended only when the rows carry estimates."""
    rows = list(rows)
    with_sim = bool(rows) and rows[0].sim_p_hat is not None
    columns = _BASE_COLUMNS + _SIM_COLUMNS if with_sim else _BASE_COLUMNS
    stream.write(",".join(columns) + "\n")
    for row in rows:
        values = [getattr(row, column) for column in columns]
        stream.write(",".join(_format_value(value) for value in values) + "\n")


def write_gnuplot_script(path: str, csv_path: str, spec: ExperimentSpec) -> None:
    """Companion gnuplot script plotting the sweep's headline columns."""
    curves = [
        (profile.name, z_db, density)
        for profile in spec.profiles
        for z_db, density in spec.settings
    ]

    def selector(name: str, z_db: float, density: float, column: int) -> str:
        return (f"(strcol(1) eq '{name}' && $2 == {z_db!r} && $3 == {density!r} "
                f"? ${column} : NaN)")

    blocks = []
    for title, column, ylabel, extra in (
            ("per-link success rate", 6, "P_s", ""),
            ("consensus success rate", 11, "P_c", ""),
            ("total round delay", 15, "seconds", "set logscale y\n"),
    ):
        plots = ",\\\n    ".join(
            f"csvfile using 4:{selector(name, z_db, density, column)} "
            f"with linespoints title '{name} z={z_db:g}dB g={density:g}'"
            for name, z_db, density in curves
        )
        blocks.append(f"set title '{title}'\nset ylabel '{ylabel}'\n{extra}"
                      f"plot \\\n    {plots}\nunset logscale y\npause -1\n")
    script = (
        "# Generated companion plot script; run: gnuplot <this file>\n"
        f"csvfile = '{csv_path}'\n"
        "set datafile separator ','\n"
        "set datafile missing 'NaN'\n"
        "set key outside\n"
        "set xlabel 'nodes'\n\n"
        + "\n".join(blocks)
    )
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(script)


# ---------------------------------------------------------------------------
# Validation grid
# ---------------------------------------------------------------------------

def run_validation(trials: int = 100_000, seed: int = DEFAULT_VALIDATION_SEED,
                   workers: int = 1) -> list[ValidationCell]:
    """Cross-check the analytic end-to-end rate against the simulator.

    For each (n, ps) cell the analytic value must fall inside the
    simulator's 99% Wilson interval.
    """
    cells = []
    index = 0
    for n in VALIDATION_NODE_COUNTS:
        budget = FaultBudget.from_node_count(n)
        for ps in VALIDATION_LINK_RATES:
            analytic = consensus_success(budget, ps)
            config = SimConfig(trials=trials, seed=_row_seed(seed, index),
                               mode="iid-link")
            estimate = estimate_consensus_rate(config, budget, ps, workers=workers)
            passed = estimate.ci_low <= analytic <= estimate.ci_high
            cells.append(ValidationCell(
                node_count=n, link_success=ps, analytic=analytic,
                estimate=estimate, passed=passed))
            index += 1
    return cells
