"""Vectorized numpy trial kernels, the fallback when the compiled extension
is unavailable.

Each function processes trials [start, stop) of one estimate, accumulates
per-stage failure histograms into `hist` (shape (4, n + 1), int64) and
returns the number of fully successful trials. Draw consumption follows
the slot layout documented in _rng, so results are bit-identical to the
compiled kernel's.
"""

from __future__ import annotations

import numpy as np

from ._rng import open_uniforms, positive_uniforms, slot_bits, trial_keys, uniforms

NAME = "pure"


def _positions(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.uint64)


def _tally(hist: np.ndarray, stage: int, fails: np.ndarray,
           alive: np.ndarray, n: int) -> None:
    hist[stage] += np.bincount(fails[alive], minlength=n + 1)


def run_chunk_iid(seed: int, start: int, stop: int, n: int, f: int,
                  ps: float, hist: np.ndarray) -> int:
    keys = trial_keys(seed, start, stop)
    pos = _positions(n)
    pos_index = np.arange(n)[None, :]
    cumulative = np.zeros(stop - start, dtype=np.int64)
    alive = np.ones(stop - start, dtype=bool)
    for stage in range(4):
        population = (n - 1 - cumulative) if stage < 2 else (n - cumulative)
        u = uniforms(slot_bits(keys, np.uint64(stage * n) + pos))
        fails = ((u >= ps) & (pos_index < population[:, None])).sum(axis=1)
        _tally(hist, stage, fails, alive, n)
        cumulative = cumulative + np.where(alive, fails, 0)
        alive = alive & (cumulative <= f)
    return int(alive.sum())


def run_chunk_geometric(seed: int, start: int, stop: int, n: int, f: int,
                        radius: float, coefficient: float, alpha: float,
                        hist: np.ndarray) -> int:
    keys = trial_keys(seed, start, stop)
    pos = _positions(n)
    pos_index = np.arange(n)[None, :]
    cumulative = np.zeros(stop - start, dtype=np.int64)
    alive = np.ones(stop - start, dtype=bool)
    for stage in range(4):
        population = (n - 1 - cumulative) if stage < 2 else (n - cumulative)
        distance_slots = np.uint64(2) * (np.uint64(stage * n) + pos)
        u_distance = positive_uniforms(slot_bits(keys, distance_slots))
        u_fading = open_uniforms(slot_bits(keys, distance_slots + np.uint64(1)))
        separation = radius * np.sqrt(u_distance)
        delivered = -np.log(u_fading) > coefficient * np.power(separation, alpha)
        fails = (~delivered & (pos_index < population[:, None])).sum(axis=1)
        _tally(hist, stage, fails, alive, n)
        cumulative = cumulative + np.where(alive, fails, 0)
        alive = alive & (cumulative <= f)
    return int(alive.sum())


def run_chunk_fixed_positions(seed: int, start: int, stop: int, n: int, f: int,
                              radius: float, coefficient: float, alpha: float,
                              hist: np.ndarray) -> int:
    """Exploratory variant: node positions drawn once per trial, so stage
    outcomes are correlated through the shared distances."""
    keys = trial_keys(seed, start, stop)
    pos = _positions(n)
    pos_index = np.arange(n)[None, :]
    separation = radius * np.sqrt(positive_uniforms(slot_bits(keys, pos)))
    attenuation = coefficient * np.power(separation, alpha)
    cumulative = np.zeros(stop - start, dtype=np.int64)
    alive = np.ones(stop - start, dtype=bool)
    for stage in range(4):
        population = (n - 1 - cumulative) if stage < 2 else (n - cumulative)
        fading_slots = np.uint64(n + stage * n) + pos
        u_fading = open_uniforms(slot_bits(keys, fading_slots))
        delivered = -np.log(u_fading) > attenuation
        fails = (~delivered & (pos_index < population[:, None])).sum(axis=1)
        _tally(hist, stage, fails, alive, n)
        cumulative = cumulative + np.where(alive, fails, 0)
        alive = alive & (cumulative <= f)
    return int(alive.sum())
