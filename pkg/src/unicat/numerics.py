"""Underflow-safe Poisson tail arithmetic.

All quantities are natural logarithms of probabilities.  The upper-tail
sum is evaluated directly in log space so values like ln P(N >= 256) for
a mean-8 Poisson (about -643) come out accurate instead of -inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

__all__ = ["LogProb", "log_poisson_pmf", "log_poisson_sf"]


@dataclass(frozen=True)
class LogProb:
    """Natural log of a probability (or of a probability bound).

    ``uncertainty`` is an additive slack on the plain-probability scale:
    the true probability lies in [exp(value), exp(value) + uncertainty]
    when the value comes from a truncated computation.
    """

    value: float
    uncertainty: float = 0.0

    def __float__(self) -> float:
        return self.value


def log_poisson_pmf(k: int, mean: float) -> float:
    """ln P(N = k) for N ~ Poisson(mean)."""
    if k < 0:
        return -math.inf
    if mean == 0.0:
        return 0.0 if k == 0 else -math.inf
    return -mean + k * math.log(mean) - math.lgamma(k + 1)


def log_poisson_sf(k: int, mean: float) -> float:
    """ln P(N >= k) for N ~ Poisson(mean), accurate arbitrarily deep.

    Sums the tail term-by-term in log space out to where the remaining
    mass is bounded by a geometric series, then adds that bound (so the
    result errs on the large side by a relative ~1e-16).
    """
    if k <= 0:
        return 0.0
    if mean == 0.0:
        return -math.inf
    hi = int(max(k + 64, math.ceil(mean + 12.0 * math.sqrt(mean + 1.0) + 64)))
    n = np.arange(k, hi + 1, dtype=np.float64)
    terms = -mean + n * math.log(mean) - gammaln(n + 1.0)
    # geometric bound on the mass beyond hi: ratio q = mean/(hi+2) < 1
    q = mean / (hi + 2.0)
    rem = terms[-1] + math.log(mean) - math.log(hi + 1.0) - math.log1p(-q)
    return float(logsumexp(np.append(terms, rem)))
