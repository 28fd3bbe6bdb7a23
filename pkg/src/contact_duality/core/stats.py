"""Interval estimates and two-sample tests used by estimators and verdicts."""

import math
from typing import Sequence, Tuple

import numpy as np
from scipy import stats

Z95 = float(stats.norm.ppf(0.975))


def wilson_interval(successes: int, n: int, level: float = 0.95) -> Tuple[float, float]:
    """
    Wilson score interval for a binomial proportion.

    Args:
        successes: Number of successes
        n: Number of trials
        level: Two-sided confidence level

    Returns:
        (low, high), clipped to [0, 1]; (0, 1) when n == 0
    """
    if n <= 0:
        return 0.0, 1.0
    if not 0 <= successes <= n:
        raise ValueError(f"successes must be in [0, {n}], got {successes}")

    z = float(stats.norm.ppf(0.5 + level / 2.0))
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    low = max(0.0, center - half)
    high = min(1.0, center + half)
    # Rounding can push the bounds a hair past the point estimate at p = 0 or 1
    return min(low, p), max(high, p)


def binomial_se(p: float, n: int) -> float:
    """Standard error of a proportion estimated from n trials."""
    if n <= 0:
        return float("inf")
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def combined_se(*ses: float) -> float:
    """Standard error of a sum or difference of independent estimates."""
    return math.sqrt(sum(se * se for se in ses))


def product_se(a: float, se_a: float, b: float, se_b: float) -> float:
    """Delta-method standard error of a*b for independent a, b."""
    return math.sqrt((b * se_a) ** 2 + (a * se_b) ** 2)


def ks_two_sample(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and p-value."""
    result = stats.ks_2samp(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return float(result.statistic), float(result.pvalue)


def ks_exponential(gaps: Sequence[float], rate: float) -> Tuple[float, float]:
    """One-sample KS test of gaps against Exponential(rate)."""
    result = stats.kstest(np.asarray(gaps, dtype=float), "expon", args=(0.0, 1.0 / rate))
    return float(result.statistic), float(result.pvalue)
