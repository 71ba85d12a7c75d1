"""Seeded Monte Carlo simulator for the four-stage consensus round."""

from ._rng import TrialStream
from .core import (
    LinkModel,
    SimConfig,
    SimEstimate,
    TrialOutcome,
    backend_name,
    distance_from_uniform,
    estimate_consensus_rate,
    fading_from_uniform,
    run_trial,
    sample_distance,
    sample_fading,
    wilson_interval,
)

__all__ = [
    "LinkModel",
    "SimConfig",
    "SimEstimate",
    "TrialOutcome",
    "TrialStream",
    "backend_name",
    "distance_from_uniform",
    "estimate_consensus_rate",
    "fading_from_uniform",
    "run_trial",
    "sample_distance",
    "sample_fading",
    "wilson_interval",
]
