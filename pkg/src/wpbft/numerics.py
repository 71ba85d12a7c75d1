"""Scalar numerics shared across the package.

Provides:
    q_function / q_inverse -- standard normal tail probability and its inverse
    integrate              -- adaptive Simpson quadrature with error control
    log_choose             -- log binomial coefficients via lgamma
    Tolerance              -- accuracy contract handed to iterative routines

Everything is pure and stateless: plain floats in, plain floats out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

__all__ = [
    "DEFAULT_TOLERANCE",
    "NumericalError",
    "Tolerance",
    "integrate",
    "log_choose",
    "q_function",
    "q_inverse",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class NumericalError(ArithmeticError):
    """An iterative routine ran out of budget before reaching its tolerance.

    Carries the best available estimate and an error bound so callers can
    decide whether the partial result is still usable.
    """

    def __init__(self, message: str, estimate: float = math.nan,
                 error_bound: float = math.inf):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class Tolerance:
    """Accuracy demanded of an iterative numerical routine."""

    absolute: float = 1e-10
    relative: float = 1e-10
    max_iterations: int = 10_000

    def __post_init__(self):
        if not (isinstance(self.absolute, (int, float)) and self.absolute > 0.0):
            raise ValueError("absolute tolerance must be > 0")
        if self.relative < 0.0:
            raise ValueError("relative tolerance must be >= 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


DEFAULT_TOLERANCE = Tolerance()


def q_function(x: float) -> float:
    """Upper-tail probability P(Z > x) of the standard normal distribution.

    Strictly decreasing with q_function(0) == 0.5; underflows toward 0.0
    for arguments beyond roughly 38.5.
    """
    if not math.isfinite(x):
        raise ValueError(f"q_function requires a finite argument, got {x!r}")
    return 0.5 * math.erfc(x / _SQRT2)


def q_inverse(p: float) -> float:
    """Inverse of q_function on (0, 1): the x with P(Z > x) = p.

    Bracketed bisection pins the root to ~15 digits, then a couple of
    Newton steps polish it. The round trip |q_function(q_inverse(p)) - p|
    stays below 1e-10 everywhere p is representable.
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"q_inverse requires 0 < p < 1, got {p!r}")
    if p == 0.5:
        return 0.0
    lo, hi = -40.0, 40.0  # q(-40) == 1.0 and q(40) == 0.0 in doubles
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if q_function(mid) > p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, abs(hi)):
            break
    x = 0.5 * (lo + hi)
    for _ in range(3):
        pdf = _INV_SQRT_2PI * math.exp(-0.5 * x * x)
        if pdf <= 0.0 or not math.isfinite(pdf):
            break  # tail too deep for a Newton step; bisection result stands
        step = (q_function(x) - p) / pdf  # dq/dx = -pdf
        x += step
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return x


def integrate(f: Callable[[float], float], lower: float, upper: float,
              tol: Tolerance | None = None) -> float:
    """Definite integral of f over [lower, upper] by adaptive Simpson bisection.

    The subdivision keeps the estimated error at or below
    max(tol.absolute, tol.relative * |whole-interval estimate|), splitting
    the allowance between halves. Raises NumericalError (carrying the best
    estimate and a bound) if more than tol.max_iterations subintervals are
    needed.
    """
    if tol is None:
        tol = DEFAULT_TOLERANCE
    if not (math.isfinite(lower) and math.isfinite(upper)):
        raise ValueError("integration bounds must be finite")
    if lower > upper:
        raise ValueError(f"lower bound {lower!r} exceeds upper bound {upper!r}")
    if lower == upper:
        return 0.0

    length = upper - lower
    width_floor = 1e-15 * length

    def simpson(a: float, fa: float, fm: float, fb: float, b: float) -> float:
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    fa = f(lower)
    fm = f(0.5 * (lower + upper))
    fb = f(upper)
    whole = simpson(lower, fa, fm, fb, upper)
    budget = max(tol.absolute, tol.relative * abs(whole))

    # Stack entries: (a, b, fa, fmid, fb, simpson_estimate, local_budget,
    # parent_error_hint). The hint is the last Richardson error seen for the
    # enclosing interval; halving usually shrinks it ~16x, so summing hints
    # over pending intervals overstates the remaining error.
    stack = [(lower, upper, fa, fm, fb, whole, budget, math.inf)]
    accepted: list[float] = []
    processed = 0
    while stack:
        processed += 1
        if processed > tol.max_iterations:
            raise NumericalError(
                f"quadrature did not converge within {tol.max_iterations} subintervals",
                estimate=math.fsum(accepted) + math.fsum(item[5] for item in stack),
                error_bound=math.fsum(item[7] for item in stack),
            )
        a, b, f_a, f_m, f_b, s_whole, eps, _hint = stack.pop()
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        f_lm = f(lm)
        f_rm = f(rm)
        s_left = simpson(a, f_a, f_lm, f_m, m)
        s_right = simpson(m, f_m, f_rm, f_b, b)
        err = (s_left + s_right - s_whole) / 15.0
        if abs(err) <= eps or (b - a) <= width_floor:
            accepted.append(s_left + s_right + err)
        else:
            half = 0.5 * eps
            stack.append((a, m, f_a, f_lm, f_m, s_left, half, abs(err)))
            stack.append((m, b, f_m, f_rm, f_b, s_right, half, abs(err)))
    return math.fsum(accepted)


def log_choose(n: int, k: int) -> float:
    """Natural log of the binomial coefficient C(n, k).

    Exact 0.0 at the edges k == 0 and k == n; elsewhere computed through
    lgamma, which keeps the relative error comfortably below 1e-12 for
    n up to the thousands.
    """
    if n < 0 or k < 0:
        raise ValueError(f"log_choose requires n, k >= 0, got n={n}, k={k}")
    if k > n:
        raise ValueError(f"log_choose requires k <= n, got n={n}, k={k}")
    if k == 0 or k == n:
        return 0.0
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
