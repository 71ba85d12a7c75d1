"""Compare the pure-numpy and compiled trial kernels.

Run as a script:  python3 benchmarks/bench_kernels.py [trials]

Both kernels draw identical randomness, so the success counts must
match; the table reports wall time per backend and the speedup.
"""

from __future__ import annotations

import sys
import time

import numpy as np

from wpbft.channel import NetworkGeometry, db_to_linear, preset
from wpbft.simulator import _backend, _pure


def _time_chunks(run_chunk, args, trials: int, n: int, chunk: int = 4096):
    hist = np.zeros((4, n + 1), dtype=np.int64)
    successes = 0
    started = time.perf_counter()
    for start in range(0, trials, chunk):
        successes += run_chunk(args[0], start, min(start + chunk, trials),
                               *args[1:], hist)
    elapsed = time.perf_counter() - started
    return successes, elapsed


def main(trials: int = 400_000) -> int:
    n, f = 10, 3
    profile = preset("thz-0.22")
    geometry = NetworkGeometry(node_count=n, density=2.0, snr_threshold_db=6.0)
    coefficient = (geometry.z_linear * profile.noise_power_w
                   / profile.transmit_power_w)

    backends = dict(_backend.available_backends())
    if "compiled" not in backends:
        print("compiled kernel unavailable; only the pure backend will run")

    scenarios = [
        ("iid-link ps=0.9", "run_chunk_iid", (12345, n, f, 0.9)),
        ("geometric 6dB g=2", "run_chunk_geometric",
         (12345, n, f, geometry.radius, coefficient,
          profile.path_loss_exponent)),
    ]

    print(f"{trials} trials, n={n}, f={f}")
    print(f"{'scenario':<20} {'backend':<10} {'successes':>10} {'seconds':>9} {'speedup':>8}")
    for label, func_name, args in scenarios:
        base_time = None
        counts = set()
        for name in ("pure", "compiled"):
            module = backends.get(name)
            if module is None:
                continue
            successes, elapsed = _time_chunks(getattr(module, func_name),
                                              args, trials, n)
            counts.add(successes)
            speedup = "" if base_time is None else f"{base_time / elapsed:7.1f}x"
            if base_time is None:
                base_time = elapsed
            print(f"{label:<20} {name:<10} {successes:>10} {elapsed:>9.3f} {speedup:>8}")
        if len(counts) > 1:
            print(f"MISMATCH: backends disagree on {label}: {sorted(counts)}")
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main(int(sys.argv[1]) if len(sys.argv) > 1 else 400_000))
