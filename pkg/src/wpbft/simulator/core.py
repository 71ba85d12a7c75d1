"""Seeded Monte Carlo estimation of the end-to-end consensus success rate.

The simulator is an independent check on the analytic chain: it replays
the four-stage failure-counting protocol with real random draws, either
with a fixed per-link success probability ("iid-link" mode) or by drawing
a distance and a fading gain per message ("geometric" mode).

Determinism contract: every draw is a pure function of (seed, trial
index, slot), trials are partitioned into fixed chunks, and reductions
are integer sums, so the estimate is bit-identical for any worker count
and across the compiled and fallback kernels.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from ..channel import NetworkGeometry, SignalProfile
from ..consensus import FaultBudget
from ..numerics import q_inverse
from . import _backend
from ._rng import MASK64, TrialStream

__all__ = [
    "LinkModel",
    "SimConfig",
    "SimEstimate",
    "TrialOutcome",
    "backend_name",
    "distance_from_uniform",
    "estimate_consensus_rate",
    "fading_from_uniform",
    "run_trial",
    "sample_distance",
    "sample_fading",
    "wilson_interval",
]

_CHUNK = 4096
_STAGES = ("pre_prepare", "prepare", "commit", "reply")

LinkModel = Union[float, tuple[SignalProfile, NetworkGeometry]]


def backend_name() -> str:
    """Which trial kernel is active: "compiled" or "pure"."""
    return _backend.BACKEND_NAME


@dataclass(frozen=True)
class SimConfig:
    """How many trials to run, from which seed, under which link model."""

    trials: int
    seed: int
    mode: str = "iid-link"
    confidence_level: float = 0.99

    def __post_init__(self):
        if not (isinstance(self.trials, int) and self.trials >= 1):
            raise ValueError(f"trials must be a positive integer, got {self.trials!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed <= MASK64):
            raise ValueError(f"seed must fit in 64 bits, got {self.seed!r}")
        if self.mode not in ("iid-link", "geometric"):
            raise ValueError(f"mode must be 'iid-link' or 'geometric', got {self.mode!r}")
        if not (0.0 < self.confidence_level < 1.0):
            raise ValueError(
                f"confidence_level must lie in (0, 1), got {self.confidence_level!r}")


@dataclass(frozen=True)
class SimEstimate:
    """Estimated success rate with a Wilson score confidence interval."""

    successes: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float
    stage_failure_histogram: dict[str, dict[int, int]]

    def __post_init__(self):
        if not (0 <= self.successes <= self.trials):
            raise ValueError("successes must lie in [0, trials]")
        if not (self.ci_low <= self.p_hat <= self.ci_high):
            raise ValueError("interval must bracket the point estimate")


@dataclass(frozen=True)
class TrialOutcome:
    """One trial: overall success plus per-stage failure counts.

    Stages after the aborting one never run; their counts are None.
    """

    success: bool
    failures: tuple[int | None, int | None, int | None, int | None]


def distance_from_uniform(u: float, radius: float) -> float:
    """Inverse-CDF map of u in (0, 1] to a sender-receiver distance.

    Under uniform placement on a disk the distance density is 2r/R^2,
    whose inverse CDF is R * sqrt(u).
    """
    if not (0.0 < u <= 1.0):
        raise ValueError(f"u must lie in (0, 1], got {u!r}")
    if not (math.isfinite(radius) and radius > 0.0):
        raise ValueError(f"radius must be > 0, got {radius!r}")
    return radius * math.sqrt(u)


def fading_from_uniform(u: float) -> float:
    """Inverse-CDF map of u in (0, 1) to a unit-mean exponential gain."""
    if not (0.0 < u < 1.0):
        raise ValueError(f"u must lie in (0, 1), got {u!r}")
    return -math.log(u)


def sample_distance(stream: TrialStream, radius: float) -> float:
    """Draw one link distance on (0, radius]."""
    return distance_from_uniform(stream.positive_uniform(), radius)


def sample_fading(stream: TrialStream) -> float:
    """Draw one exponential fading power gain (unit mean)."""
    return fading_from_uniform(stream.open_uniform())


def wilson_interval(successes: int, trials: int,
                    confidence_level: float = 0.99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if not (0 <= successes <= trials) or trials < 1:
        raise ValueError("need 0 <= successes <= trials with trials >= 1")
    if not (0.0 < confidence_level < 1.0):
        raise ValueError(f"confidence_level must lie in (0, 1), got {confidence_level!r}")
    crit = q_inverse((1.0 - confidence_level) / 2.0)
    p_hat = successes / trials
    crit_sq = crit * crit / trials
    center = (p_hat + 0.5 * crit_sq) / (1.0 + crit_sq)
    half = (crit * math.sqrt(p_hat * (1.0 - p_hat) / trials + 0.25 * crit_sq / trials)
            / (1.0 + crit_sq))
    return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------------
# Trial execution
# ---------------------------------------------------------------------------

def _resolve_link(mode: str, budget: FaultBudget, link_model: LinkModel,
                  fixed_positions: bool):
    """Validate the (mode, link_model) pairing and unpack kernel parameters."""
    if mode not in ("iid-link", "geometric"):
        raise ValueError(f"mode must be 'iid-link' or 'geometric', got {mode!r}")
    if mode == "iid-link":
        if fixed_positions:
            raise ValueError("fixed positions require geometric mode")
        if isinstance(link_model, bool) or not isinstance(link_model, (int, float)):
            raise ValueError("iid-link mode takes a per-link success probability")
        ps = float(link_model)
        if not (0.0 <= ps <= 1.0):
            raise ValueError(f"per-link success probability must lie in [0, 1], got {ps!r}")
        return ("iid", ps)
    if not (isinstance(link_model, tuple) and len(link_model) == 2
            and isinstance(link_model[0], SignalProfile)
            and isinstance(link_model[1], NetworkGeometry)):
        raise ValueError("geometric mode takes a (profile, geometry) pair")
    profile, geometry = link_model
    if geometry.node_count != budget.node_count:
        raise ValueError(
            f"geometry is sized for {geometry.node_count} nodes but the fault "
            f"budget expects {budget.node_count}")
    coefficient = (geometry.z_linear * profile.noise_power_w
                   / profile.transmit_power_w)
    kind = "fixed" if fixed_positions else "geometric"
    return (kind, geometry.radius, coefficient, profile.path_loss_exponent)


def _delivered_iid(stream: TrialStream, slot: int, ps: float) -> bool:
    return stream.uniform_at(slot) < ps


def _delivered_geometric(stream: TrialStream, slot: int, radius: float,
                         coefficient: float, alpha: float) -> bool:
    separation = distance_from_uniform(stream.positive_uniform_at(2 * slot), radius)
    fading = fading_from_uniform(stream.open_uniform_at(2 * slot + 1))
    return fading > coefficient * separation ** alpha


def run_trial(stream: TrialStream, budget: FaultBudget, link_model: LinkModel,
              mode: str = "iid-link", fixed_positions: bool = False) -> TrialOutcome:
    """Replay one four-stage round against the stream's draws.

    Reference implementation of the protocol the kernels vectorize; it
    consumes the same slots, so outcomes match the estimator trial for
    trial.
    """
    resolved = _resolve_link(mode, budget, link_model, fixed_positions)
    n = budget.node_count
    if resolved[0] == "fixed":
        _, radius, coefficient, alpha = resolved
        attenuation = [
            coefficient * distance_from_uniform(
                stream.positive_uniform_at(p), radius) ** alpha
            for p in range(n)
        ]

    counts: list[int | None] = [None, None, None, None]
    cumulative = 0
    for stage in range(4):
        population = n - 1 - cumulative if stage < 2 else n - cumulative
        fails = 0
        for position in range(population):
            slot = stage * n + position
            if resolved[0] == "iid":
                delivered = _delivered_iid(stream, slot, resolved[1])
            elif resolved[0] == "geometric":
                delivered = _delivered_geometric(stream, slot, *resolved[1:])
            else:
                fading = fading_from_uniform(stream.open_uniform_at(n + slot))
                delivered = fading > attenuation[position]
            if not delivered:
                fails += 1
        counts[stage] = fails
        cumulative += fails
        if cumulative > budget.fault_tolerance:
            return TrialOutcome(False, tuple(counts))
    return TrialOutcome(True, tuple(counts))


def _run_chunk(resolved, seed: int, start: int, stop: int, n: int, f: int):
    hist = np.zeros((4, n + 1), dtype=np.int64)
    if resolved[0] == "iid":
        successes = _backend.run_chunk_iid(seed, start, stop, n, f, resolved[1], hist)
    elif resolved[0] == "geometric":
        successes = _backend.run_chunk_geometric(
            seed, start, stop, n, f, resolved[1], resolved[2], resolved[3], hist)
    else:
        successes = _backend.run_chunk_fixed_positions(
            seed, start, stop, n, f, resolved[1], resolved[2], resolved[3], hist)
    return successes, hist


def estimate_consensus_rate(config: SimConfig, budget: FaultBudget,
                            link_model: LinkModel, workers: int = 1,
                            fixed_positions: bool = False) -> SimEstimate:
    """Monte Carlo estimate of the end-to-end consensus success rate.

    Trials are independent and chunked; `workers` only sets how many
    chunks run concurrently and never changes the result.
    """
    if not (isinstance(workers, int) and workers >= 1):
        raise ValueError(f"workers must be a positive integer, got {workers!r}")
    resolved = _resolve_link(config.mode, budget, link_model, fixed_positions)
    n = budget.node_count
    f = budget.fault_tolerance

    spans = [(start, min(start + _CHUNK, config.trials))
             for start in range(0, config.trials, _CHUNK)]
    if workers == 1 or len(spans) == 1:
        parts = [_run_chunk(resolved, config.seed, lo, hi, n, f) for lo, hi in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda span: _run_chunk(resolved, config.seed, span[0], span[1], n, f),
                spans))

    successes = sum(part[0] for part in parts)
    hist = np.zeros((4, n + 1), dtype=np.int64)
    for _, chunk_hist in parts:
        hist += chunk_hist

    p_hat = successes / config.trials
    ci_low, ci_high = wilson_interval(successes, config.trials, config.confidence_level)
    histogram = {
        name: {fails: int(count) for fails, count in enumerate(hist[stage]) if count}
        for stage, name in enumerate(_STAGES)
    }
    return SimEstimate(
        successes=successes,
        trials=config.trials,
        p_hat=p_hat,
        ci_low=min(ci_low, p_hat),
        ci_high=max(ci_high, p_hat),
        stage_failure_histogram=histogram,
    )
