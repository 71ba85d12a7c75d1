"""Counter-based random streams for reproducible trials.

Every uniform is a pure function of (seed, trial index, slot): the trial
key is the SplitMix64 output at the trial's index, and draw j within the
trial is the SplitMix64 output at offset j from that key. Consumers may
therefore evaluate draws sequentially (compiled kernel), in vectorized
blocks (numpy fallback), or individually (tests) and see identical
streams, independent of scheduling.

Slot layout per trial, for a network of n nodes:
    iid link model        message (stage s, position p) -> slot s*n + p
    geometric link model  distance at slot 2*(s*n + p), fading at the next
    fixed positions       node p's distance at slot p, fading for
                          (stage s, position p) at slot n + s*n + p

Bit-to-float conversion uses the high bits of each 64-bit output: the top
53 give [0, 1) for Bernoulli draws and (0, 1] for distances; the fading
map uses the top 52 plus a half so the open interval (0, 1) holds at both
ends, every value exactly representable.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_U53 = 2.0 ** -53
_U52 = 2.0 ** -52


def mix64(value: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z = value & MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & MASK64
    return z ^ (z >> 31)


def trial_key(seed: int, trial_index: int) -> int:
    """Base key of one trial's substream."""
    return mix64(seed + (trial_index + 1) * GOLDEN)


def draw_bits(key: int, slot: int) -> int:
    """Raw 64-bit output for one slot of a trial's substream."""
    return mix64(key + (slot + 1) * GOLDEN)


def bits_to_uniform(bits: int) -> float:
    """Map 64 bits to [0, 1)."""
    return (bits >> 11) * _U53


def bits_to_positive_uniform(bits: int) -> float:
    """Map 64 bits to (0, 1]."""
    return ((bits >> 11) + 1) * _U53


def bits_to_open_uniform(bits: int) -> float:
    """Map 64 bits to the open interval (0, 1).

    52-bit resolution: with 53 bits the top value (2^53 - 0.5) is not
    representable and would round up to exactly 1.0.
    """
    return ((bits >> 12) + 0.5) * _U52


class TrialStream:
    """One trial's random stream with both sequential and slot access."""

    def __init__(self, seed: int, trial_index: int):
        if not (0 <= seed <= MASK64):
            raise ValueError(f"seed must fit in 64 bits, got {seed!r}")
        if trial_index < 0:
            raise ValueError(f"trial_index must be >= 0, got {trial_index!r}")
        self._key = trial_key(seed, trial_index)
        self._next_slot = 0

    def bits_at(self, slot: int) -> int:
        return draw_bits(self._key, slot)

    def uniform_at(self, slot: int) -> float:
        return bits_to_uniform(self.bits_at(slot))

    def positive_uniform_at(self, slot: int) -> float:
        return bits_to_positive_uniform(self.bits_at(slot))

    def open_uniform_at(self, slot: int) -> float:
        return bits_to_open_uniform(self.bits_at(slot))

    def _advance(self) -> int:
        slot = self._next_slot
        self._next_slot += 1
        return slot

    def uniform(self) -> float:
        """Next sequential draw in [0, 1)."""
        return self.uniform_at(self._advance())

    def positive_uniform(self) -> float:
        """Next sequential draw in (0, 1]."""
        return self.positive_uniform_at(self._advance())

    def open_uniform(self) -> float:
        """Next sequential draw in (0, 1)."""
        return self.open_uniform_at(self._advance())


# ---------------------------------------------------------------------------
# Vectorized counterparts used by the numpy kernels (and handy in tests).
# All arithmetic wraps mod 2**64 exactly like the scalar path.
# ---------------------------------------------------------------------------

_G = np.uint64(GOLDEN)
_A = np.uint64(_MIX_A)
_B = np.uint64(_MIX_B)


def mix64_array(values: np.ndarray) -> np.ndarray:
    z = values.astype(np.uint64, copy=True)
    z = (z ^ (z >> np.uint64(30))) * _A
    z = (z ^ (z >> np.uint64(27))) * _B
    return z ^ (z >> np.uint64(31))


def trial_keys(seed: int, start: int, stop: int) -> np.ndarray:
    """Keys for trials start..stop-1 as a uint64 vector."""
    index = np.arange(start + 1, stop + 1, dtype=np.uint64)
    return mix64_array(np.uint64(seed) + index * _G)


def slot_bits(keys: np.ndarray, slots: np.ndarray) -> np.ndarray:
    """Bits for every (trial, slot) pair: shape keys x slots."""
    offsets = (slots.astype(np.uint64) + np.uint64(1)) * _G
    return mix64_array(keys[:, None] + offsets[None, :])


def uniforms(bits: np.ndarray) -> np.ndarray:
    return (bits >> np.uint64(11)).astype(np.float64) * _U53


def positive_uniforms(bits: np.ndarray) -> np.ndarray:
    return ((bits >> np.uint64(11)).astype(np.float64) + 1.0) * _U53


def open_uniforms(bits: np.ndarray) -> np.ndarray:
    return ((bits >> np.uint64(12)).astype(np.float64) + 0.5) * _U52
