"""Scalar building blocks shared by the distribution kernels.

The Hurwitz zeta function is evaluated by direct summation of the leading
terms closed with an Euler-Maclaurin tail; the log-domain helpers keep
differences of cumulative probabilities accurate far into the tail.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

LOG_ZERO = float("-inf")
_LOG_HALF = math.log(0.5)

# B_{2j} / (2j)! for j = 1..10
_EULER_MACLAURIN_COEFFS: tuple[float, ...] = (
    1.0 / 6.0 / math.factorial(2),
    -1.0 / 30.0 / math.factorial(4),
    1.0 / 42.0 / math.factorial(6),
    -1.0 / 30.0 / math.factorial(8),
    5.0 / 66.0 / math.factorial(10),
    -691.0 / 2730.0 / math.factorial(12),
    7.0 / 6.0 / math.factorial(14),
    -3617.0 / 510.0 / math.factorial(16),
    43867.0 / 798.0 / math.factorial(18),
    -174611.0 / 330.0 / math.factorial(20),
)
_ZETA_TOLERANCE = 1e-13
_ZETA_MIN_TERMS = 8
_ZETA_MAX_TERMS = 1 << 22


class DomainError(ValueError):
    """Raised when a kernel is called outside its mathematical domain."""


def hurwitz_zeta(s: float, q: float) -> float:
    """Return sum_{i>=0} (q + i)^{-s} for s > 1, q > 0."""
    s = float(s)
    q = float(q)
    if not (math.isfinite(s) and s > 1.0):
        raise DomainError(f"hurwitz_zeta requires s > 1, got s={s!r}.")
    if not (math.isfinite(q) and q > 0.0):
        raise DomainError(f"hurwitz_zeta requires q > 0, got q={q!r}.")

    n_terms = max(_ZETA_MIN_TERMS, math.ceil(s) - math.floor(q))
    while True:
        a = q + n_terms
        head = math.fsum(np.power(q + np.arange(n_terms, dtype=float), -s))
        tail_terms = [a ** (1.0 - s) / (s - 1.0), 0.5 * a ** (-s)]
        rising = s
        power = a ** (-s - 1.0)
        for j, coeff in enumerate(_EULER_MACLAURIN_COEFFS[:-1], start=1):
            tail_terms.append(coeff * rising * power)
            rising *= (s + 2 * j - 1) * (s + 2 * j)
            power /= a * a
        # first omitted correction bounds the truncation error
        bound = abs(_EULER_MACLAURIN_COEFFS[-1] * rising * power)
        total = head + math.fsum(tail_terms)
        if bound <= _ZETA_TOLERANCE * max(1.0, abs(total)) or n_terms >= _ZETA_MAX_TERMS:
            return total
        n_terms *= 2


def partial_power_sum(alpha: float, u: int) -> float:
    """Return sum_{k=1}^{u} k^{-alpha} as an exact finite sum."""
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha > 1.0):
        raise DomainError(f"partial_power_sum requires alpha > 1, got {alpha!r}.")
    if int(u) != u or u < 1:
        raise DomainError(f"partial_power_sum requires an integer u >= 1, got {u!r}.")
    # smallest terms first
    ks = np.arange(int(u), 0, -1, dtype=float)
    return math.fsum(np.power(ks, -alpha))


def log_diff_exp(log_a: float, log_b: float) -> float:
    """Return log(exp(log_a) - exp(log_b)) for log_a > log_b."""
    if log_b == LOG_ZERO:
        return float(log_a)
    if not log_a > log_b:
        raise DomainError(
            f"log_diff_exp requires log_a > log_b, got {log_a!r} <= {log_b!r}."
        )
    delta = log_b - log_a
    if delta > _LOG_HALF:
        return log_a + math.log(-math.expm1(delta))
    return log_a + math.log1p(-math.exp(delta))


def log1m_exp(x: float) -> float:
    """Return log(1 - exp(x)) for x < 0."""
    if not x < 0.0:
        raise DomainError(f"log1m_exp requires x < 0, got {x!r}.")
    if x > _LOG_HALF:
        return math.log(-math.expm1(x))
    return math.log1p(-math.exp(x))


def log_diff_exp_array(log_a: ArrayLike, log_b: ArrayLike) -> NDArray[np.float64]:
    """Vectorised log_diff_exp; entries with log_a <= log_b map to -inf."""
    a = np.asarray(log_a, dtype=float)
    b = np.asarray(log_b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    out = np.full(a.shape, LOG_ZERO)
    valid = a > b
    if not np.any(valid):
        return out
    delta = b[valid] - a[valid]
    with np.errstate(divide="ignore", invalid="ignore"):
        near = delta > _LOG_HALF
        body = np.where(
            near,
            np.log(-np.expm1(np.where(near, delta, _LOG_HALF))),
            np.log1p(-np.exp(np.where(near, _LOG_HALF, delta))),
        )
    out[valid] = a[valid] + body
    return out
