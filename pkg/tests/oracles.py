"""Independent reference implementations used only by the tests.

Everything here is deliberately written against different primitives
than the package (power series and continued fractions instead of
math.erfc, big-integer combinatorics instead of lgamma, exact Fraction
arithmetic instead of log-space sums) so agreement is meaningful.
"""

from __future__ import annotations

import math
from fractions import Fraction

_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


def q_reference(x: float) -> float:
    """Gaussian tail probability via series / continued fraction."""
    if x < 0.0:
        return 1.0 - q_reference(-x)
    if x <= 2.5:
        # erf power series; converges quickly for small arguments.
        t = x / math.sqrt(2.0)
        term = t
        total = t
        for k in range(1, 200):
            term *= -t * t / k
            total += term / (2 * k + 1)
            if abs(term) < 1e-18 * abs(total):
                break
        return 0.5 - total / math.sqrt(math.pi)
    # Gauss continued fraction for the Mills ratio: Q(x) = phi(x) / (x + 1/(x + 2/(x + ...)))
    tail = 0.0
    for k in range(200, 0, -1):
        tail = k / (x + tail)
    phi = math.exp(-0.5 * x * x) / _SQRT_TWO_PI
    return phi / (x + tail)


def q_inverse_reference(p: float) -> float:
    """Invert q_reference by bisection."""
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if q_reference(mid) > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def binomial_tail_fraction(population: int, max_failures: int, ps: Fraction) -> Fraction:
    """P{at most max_failures of population independent sends fail}."""
    q = 1 - ps
    stop = min(max_failures, population)
    return sum(
        math.comb(population, x) * ps ** (population - x) * q ** x
        for x in range(stop + 1)
    )


def consensus_fraction(node_count: int, fault_tolerance: int, ps: Fraction) -> Fraction:
    """Exact end-to-end consensus probability by full enumeration."""
    n, f = node_count, fault_tolerance
    q = 1 - ps
    total = Fraction(0)
    for i in range(f + 1):
        ti = math.comb(n - 1, i) * ps ** (n - 1 - i) * q ** i
        for j in range(f - i + 1):
            tj = math.comb(n - 1 - i, j) * ps ** (n - 1 - i - j) * q ** j
            for k in range(f - i - j + 1):
                tk = math.comb(n - i - j, k) * ps ** (n - i - j - k) * q ** k
                total += ti * tj * tk * binomial_tail_fraction(
                    n - i - j - k, f - i - j - k, ps)
    return total


def wilson_reference(successes: int, trials: int, confidence: float) -> tuple[float, float]:
    """Wilson score interval computed straight from the formula."""
    crit = q_inverse_reference((1.0 - confidence) / 2.0)
    p_hat = successes / trials
    denom = 1.0 + crit * crit / trials
    centre = p_hat + crit * crit / (2.0 * trials)
    half = crit * math.sqrt(p_hat * (1.0 - p_hat) / trials
                            + crit * crit / (4.0 * trials * trials))
    return (centre - half) / denom, (centre + half) / denom


def chi2_quantile_wilson_hilferty(df: int, prob: float) -> float:
    """Approximate chi-squared quantile (good to ~1% for df >= 3)."""
    z = q_inverse_reference(1.0 - prob)
    h = 2.0 / (9.0 * df)
    return df * (1.0 - h + z * math.sqrt(h)) ** 3
