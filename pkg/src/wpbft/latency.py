"""Finite-blocklength symbol durations and the four-stage delay budget.

A transmission of duration T over bandwidth B spends m = T * B channel
uses. With spectral capacity c and coding rate r (bits per use), the
decoding error probability follows the normal-approximation relation

    error = Q( (m*c - m*r + log2(m)/2) / (log2(e) * sqrt(m)) ).

solve_symbol_duration inverts that relation for a wanted per-message
success rate, pinning the physically meaningful branch where error decays
as the duration grows. Stage delays then follow from the network size:
each broadcast stage takes (n - 1) * T, the reply takes T, and a round
takes three broadcasts plus the reply.

`raw_units=True` evaluates the same relation with the absolute capacity
and rate in bits/s in place of the per-use efficiencies; it is kept for
comparison with sources that mix units that way, and yields durations
many orders of magnitude shorter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import NetworkGeometry, SignalProfile, avg_success_prob
from .numerics import DEFAULT_TOLERANCE, NumericalError, Tolerance, q_function, q_inverse

__all__ = [
    "DelayReport",
    "delay_report",
    "error_prob_for_duration",
    "solve_symbol_duration",
]

_LOG2_E = math.log2(math.e)
_HALF_INV_LN2 = 0.5 / math.log(2.0)


@dataclass(frozen=True)
class DelayReport:
    """Per-stage delays for one consensus round, all in seconds."""

    symbol_duration: float   # T, one message transmission
    broadcast_delay: float   # t1 = (n - 1) * T, each of the three broadcast stages
    reply_delay: float       # t2 = T
    total_delay: float       # 3 * t1 + t2

    def __post_init__(self):
        if not (math.isfinite(self.symbol_duration) and self.symbol_duration > 0.0):
            raise ValueError(
                f"symbol_duration must be > 0, got {self.symbol_duration!r}")
        if self.reply_delay != self.symbol_duration:
            raise ValueError("reply_delay must equal symbol_duration exactly")
        if self.total_delay != 3.0 * self.broadcast_delay + self.reply_delay:
            raise ValueError("total_delay must equal 3 * broadcast + reply exactly")

    @classmethod
    def for_network(cls, symbol_duration: float, node_count: int) -> "DelayReport":
        """Assemble the stage delays for a network of node_count >= 2 nodes."""
        if not (isinstance(node_count, int) and node_count >= 2):
            raise ValueError(f"node_count must be an integer >= 2, got {node_count!r}")
        broadcast = (node_count - 1) * symbol_duration
        return cls(
            symbol_duration=symbol_duration,
            broadcast_delay=broadcast,
            reply_delay=symbol_duration,
            total_delay=3.0 * broadcast + symbol_duration,
        )


def _q_argument(blocklength: float, delta: float) -> float:
    """Argument of the Q function at m channel uses and rate margin delta."""
    return ((delta * blocklength + 0.5 * math.log2(blocklength))
            / (_LOG2_E * math.sqrt(blocklength)))


def _rate_margin(profile: SignalProfile, raw_units: bool) -> float:
    if raw_units:
        return profile.capacity_bps - profile.rate_bps
    return profile.spectral_capacity - profile.spectral_rate


def error_prob_for_duration(profile: SignalProfile, duration_s: float,
                            raw_units: bool = False) -> float:
    """Decoding error probability for one message of the given duration."""
    if not (math.isfinite(duration_s) and duration_s > 0.0):
        raise ValueError(f"duration_s must be > 0, got {duration_s!r}")
    blocklength = duration_s * profile.bandwidth_hz
    return q_function(_q_argument(blocklength, _rate_margin(profile, raw_units)))


def _branch_floor(delta: float) -> float:
    """Smallest blocklength on the increasing branch of the Q argument.

    The argument's derivative has the sign of
    B(m) = (delta/2) m + K - (K/2) ln m with K = 1/(2 ln 2). When B has no
    root the argument rises monotonically and the branch starts at 0;
    otherwise it starts at B's larger root.
    """
    k = _HALF_INV_LN2
    m_star = k / delta  # minimizer of B
    if (k / 2.0) * (3.0 - math.log(m_star)) > 0.0:
        return 0.0
    b = lambda m: (delta / 2.0) * m + k - (k / 2.0) * math.log(m)
    hi = m_star
    for _ in range(2000):
        hi *= 2.0
        if b(hi) > 0.0:
            break
    else:
        raise NumericalError("no increasing branch found for the Q argument")
    lo = m_star
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if b(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14 * hi:
            break
    return hi


def solve_symbol_duration(profile: SignalProfile, ps: float,
                          tol: Tolerance | None = None,
                          raw_units: bool = False) -> float:
    """Shortest duration T whose decoding error probability is 1 - ps.

    Bisection in blocklength on the increasing branch of the Q argument,
    with geometric bracket expansion. The returned T satisfies
    error_prob_for_duration(profile, T) = 1 - ps to well below tol.absolute.
    """
    if not (0.0 < ps < 1.0):
        raise ValueError(f"per-message success rate must lie in (0, 1), got {ps!r}")
    if tol is None:
        tol = DEFAULT_TOLERANCE
    delta = _rate_margin(profile, raw_units)
    target = q_inverse(1.0 - ps)

    floor = _branch_floor(delta)
    if floor > 0.0:
        lo = floor
        if _q_argument(lo, delta) > target:
            raise NumericalError(
                f"no duration on the increasing branch reaches success rate {ps}",
                estimate=lo / profile.bandwidth_hz)
    else:
        lo = 1.0
        for _ in range(2000):
            if _q_argument(lo, delta) <= target:
                break
            lo *= 0.5
            if lo < 1e-300:
                raise NumericalError("bracket expansion underflowed searching "
                                     "for the lower blocklength bound")
        else:
            raise NumericalError("failed to bracket the blocklength from below")

    hi = max(lo, 1.0)
    for _ in range(2000):
        if _q_argument(hi, delta) >= target:
            break
        hi *= 2.0
        if hi > 1e300:
            raise NumericalError("bracket expansion overflowed searching "
                                 "for the upper blocklength bound")
    else:
        raise NumericalError("failed to bracket the blocklength from above")

    for _ in range(tol.max_iterations):
        mid = 0.5 * (lo + hi)
        if _q_argument(mid, delta) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    blocklength = 0.5 * (lo + hi)

    duration = blocklength / profile.bandwidth_hz
    residual = abs(q_function(_q_argument(blocklength, delta)) - (1.0 - ps))
    if residual > max(tol.absolute, tol.relative * (1.0 - ps)):
        raise NumericalError(
            f"duration solver stalled with residual {residual:.3e}",
            estimate=duration, error_bound=residual)
    return duration


def delay_report(profile: SignalProfile, geometry: NetworkGeometry,
                 tol: Tolerance | None = None,
                 raw_units: bool = False) -> DelayReport:
    """Stage delays for one consensus round at this profile and geometry.

    The symbol duration is sized so each message succeeds with the
    placement-and-fading averaged probability of the channel model.
    """
    ps = avg_success_prob(profile, geometry, tol)
    if ps >= 1.0:
        raise ValueError("average success probability is 1; no finite-error "
                         "duration to solve for")
    duration = solve_symbol_duration(profile, ps, tol, raw_units=raw_units)
    return DelayReport.for_network(duration, geometry.node_count)
