"""Success probabilities for four-stage Byzantine consensus over lossy links.

Each message delivery is an independent Bernoulli trial with success
probability ps. A round survives a stage when the number of failed
deliveries stays within the remaining fault budget, and the populations
shrink as failed nodes drop out:

    pre-prepare: n - 1 deliveries, up to f failures
    prepare:     n - 1 - i deliveries, up to f - i failures
    commit:      n - i - j deliveries (the primary answers too), up to f - i - j
    reply:       n - i - j - k deliveries, up to f - i - j - k

with i, j, k the failures observed so far. Chaining the four stages over
every admissible failure pattern gives the end-to-end success rate.

All sums are accumulated in log space and clamped to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import log_choose

__all__ = [
    "FaultBudget",
    "StageReport",
    "consensus_success",
    "marginal_stage_rates",
    "stage_commit",
    "stage_pre_prepare",
    "stage_prepare",
    "stage_reply",
]


@dataclass(frozen=True)
class FaultBudget:
    """Network size n and the number f of tolerable Byzantine faults, n = 3f + 1."""

    node_count: int
    fault_tolerance: int

    def __post_init__(self):
        if not (isinstance(self.node_count, int) and isinstance(self.fault_tolerance, int)):
            raise ValueError("node_count and fault_tolerance must be integers")
        if self.node_count < 4:
            raise ValueError(f"node_count must be >= 4, got {self.node_count}")
        if self.fault_tolerance < 1:
            raise ValueError(f"fault_tolerance must be >= 1, got {self.fault_tolerance}")
        if self.node_count != 3 * self.fault_tolerance + 1:
            raise ValueError(
                f"node_count must equal 3f + 1, got n={self.node_count} "
                f"with f={self.fault_tolerance}")

    @classmethod
    def from_node_count(cls, node_count: int) -> "FaultBudget":
        """Budget for a network of n = 3f + 1 nodes; rejects other sizes."""
        if not isinstance(node_count, int) or node_count < 4 or node_count % 3 != 1:
            raise ValueError(
                f"node_count must be 3f + 1 for integer f >= 1, got {node_count!r}")
        return cls(node_count, (node_count - 1) // 3)


@dataclass(frozen=True)
class StageReport:
    """Marginal per-stage success rates plus the end-to-end rate."""

    pre_prepare: float
    prepare: float
    commit: float
    reply: float
    consensus: float

    def __post_init__(self):
        for label in ("pre_prepare", "prepare", "commit", "reply", "consensus"):
            value = getattr(self, label)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{label} must lie in [0, 1], got {value!r}")


def _validate_ps(ps: float) -> None:
    if not (isinstance(ps, (int, float)) and 0.0 <= ps <= 1.0):
        raise ValueError(f"per-link success probability must lie in [0, 1], got {ps!r}")


def _binomial_tail(population: int, max_failures: int, ps: float,
                   log_fact: list[float] | None = None) -> float:
    """P{failures <= max_failures} out of `population` independent deliveries.

    Callers in hot loops may pass a precomputed log-factorial table; the
    default path goes through log_choose.
    """
    if max_failures == 0:
        return ps ** population  # single term, kept exact
    if ps == 1.0:
        return 1.0
    if ps == 0.0:
        return 1.0 if max_failures >= population else 0.0
    log_ps = math.log(ps)
    log_qs = math.log1p(-ps)
    terms = []
    for failures in range(max_failures + 1):
        if log_fact is None:
            log_comb = log_choose(population, failures)
        else:
            log_comb = (log_fact[population] - log_fact[failures]
                        - log_fact[population - failures])
        terms.append(math.exp(
            log_comb + failures * log_qs + (population - failures) * log_ps))
    return min(math.fsum(terms), 1.0)


def stage_pre_prepare(budget: FaultBudget, ps: float) -> float:
    """Probability the primary's broadcast leaves at most f of n-1 links failed."""
    _validate_ps(ps)
    return _binomial_tail(budget.node_count - 1, budget.fault_tolerance, ps)


def stage_prepare(budget: FaultBudget, ps: float, prior_failures: int = 0) -> float:
    """Prepare-stage survival given i failures carried in from pre-prepare."""
    _validate_ps(ps)
    i = prior_failures
    if not (0 <= i <= budget.fault_tolerance):
        raise ValueError(
            f"prior_failures must lie in [0, f={budget.fault_tolerance}], got {i!r}")
    return _binomial_tail(budget.node_count - 1 - i, budget.fault_tolerance - i, ps)


def stage_commit(budget: FaultBudget, ps: float, prior_failures: int = 0) -> float:
    """Commit-stage survival given i + j prior failures (primary included)."""
    _validate_ps(ps)
    ij = prior_failures
    if not (0 <= ij <= budget.fault_tolerance):
        raise ValueError(
            f"prior_failures must lie in [0, f={budget.fault_tolerance}], got {ij!r}")
    return _binomial_tail(budget.node_count - ij, budget.fault_tolerance - ij, ps)


def stage_reply(budget: FaultBudget, ps: float, prior_failures: int = 0) -> float:
    """Reply-stage survival given i + j + k prior failures."""
    _validate_ps(ps)
    ijk = prior_failures
    if not (0 <= ijk <= budget.fault_tolerance):
        raise ValueError(
            f"prior_failures must lie in [0, f={budget.fault_tolerance}], got {ijk!r}")
    return _binomial_tail(budget.node_count - ijk, budget.fault_tolerance - ijk, ps)


def consensus_success(budget: FaultBudget, ps: float) -> float:
    """End-to-end probability that one request completes all four stages.

    Sums the stage chain over every admissible failure pattern (i, j, k, l)
    with i + j + k + l <= f. The term count is C(f + 4, 4), which stays
    comfortable even at n = 100 (f = 33).
    """
    _validate_ps(ps)
    if ps == 1.0:
        return 1.0
    if ps == 0.0:
        return 0.0

    n = budget.node_count
    f = budget.fault_tolerance
    log_ps = math.log(ps)
    log_qs = math.log1p(-ps)
    # log k! for k up to n, so binomial terms are table lookups.
    log_fact = [0.0] * (n + 1)
    for value in range(2, n + 1):
        log_fact[value] = log_fact[value - 1] + math.log(value)

    def term(population: int, failures: int) -> float:
        log_comb = (log_fact[population] - log_fact[failures]
                    - log_fact[population - failures])
        return math.exp(log_comb + failures * log_qs
                        + (population - failures) * log_ps)

    outer = []
    for i in range(f + 1):
        mid = []
        for j in range(f - i + 1):
            inner = []
            for k in range(f - i - j + 1):
                reply_tail = _binomial_tail(n - i - j - k, f - i - j - k, ps, log_fact)
                inner.append(term(n - i - j, k) * reply_tail)
            mid.append(term(n - 1 - i, j) * min(math.fsum(inner), 1.0))
        outer.append(term(n - 1, i) * min(math.fsum(mid), 1.0))
    return min(math.fsum(outer), 1.0)


def marginal_stage_rates(budget: FaultBudget, ps: float) -> StageReport:
    """Stage survival rates conditioned on zero failures in earlier stages.

    These are the per-stage curves worth plotting next to the end-to-end
    rate: each stage is shown from a clean slate rather than averaged over
    upstream failure patterns.
    """
    return StageReport(
        pre_prepare=stage_pre_prepare(budget, ps),
        prepare=stage_prepare(budget, ps, 0),
        commit=stage_commit(budget, ps, 0),
        reply=stage_reply(budget, ps, 0),
        consensus=consensus_success(budget, ps),
    )
