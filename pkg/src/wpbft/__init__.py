"""Performance laboratory for PBFT consensus over fading wireless links.

The package chains three layers: a channel model (Rayleigh fading plus
power-law path loss on a random disk of nodes), the PBFT success
calculus built on top of the per-message delivery probability, and a
finite-blocklength delay model for the protocol's four stages. A seeded
Monte Carlo simulator provides an independent check on the analytic
chain, and `wpbft.cli` exposes sweeps over all of it.
"""

from .channel import (
    PRESETS,
    NetworkGeometry,
    PathLossSample,
    SignalProfile,
    active_distance,
    avg_success_prob,
    db_to_linear,
    linear_to_db,
    link_success_prob,
    path_loss_db,
    preset,
    snr,
)
from .consensus import (
    FaultBudget,
    StageReport,
    consensus_success,
    marginal_stage_rates,
    stage_commit,
    stage_pre_prepare,
    stage_prepare,
    stage_reply,
)
from .experiment import (
    ConfigError,
    ExperimentSpec,
    SweepRow,
    default_spec,
    emit_csv,
    load_spec,
    run_sweep,
    run_validation,
)
from .latency import DelayReport, delay_report, error_prob_for_duration, solve_symbol_duration
from .numerics import DEFAULT_TOLERANCE, NumericalError, Tolerance
from .simulator import (
    SimConfig,
    SimEstimate,
    TrialStream,
    estimate_consensus_rate,
    run_trial,
)

__version__ = "0.1.0"

__all__ = [
    "PRESETS",
    "NetworkGeometry",
    "PathLossSample",
    "SignalProfile",
    "active_distance",
    "avg_success_prob",
    "db_to_linear",
    "linear_to_db",
    "link_success_prob",
    "path_loss_db",
    "preset",
    "snr",
    "FaultBudget",
    "StageReport",
    "consensus_success",
    "marginal_stage_rates",
    "stage_commit",
    "stage_pre_prepare",
    "stage_prepare",
    "stage_reply",
    "ConfigError",
    "ExperimentSpec",
    "SweepRow",
    "default_spec",
    "emit_csv",
    "load_spec",
    "run_sweep",
    "run_validation",
    "DelayReport",
    "delay_report",
    "error_prob_for_duration",
    "solve_symbol_duration",
    "DEFAULT_TOLERANCE",
    "NumericalError",
    "Tolerance",
    "SimConfig",
    "SimEstimate",
    "TrialStream",
    "estimate_consensus_rate",
    "run_trial",
    "__version__",
]
