"""Model parameters for the growth-with-catastrophes process.

The process is driven by three positive rates: a regular-growth weight
``lam``, a catastrophe weight ``mu``, and the event rate ``alpha`` of the
underlying Poisson clock.  Every jump of the clock is an up-move with
probability lam/(lam+mu), otherwise a catastrophe that cuts the current
population to a uniformly chosen lower level (with a reflection 0 -> 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["ModelParams", "validate_params"]


@dataclass(frozen=True)
class ModelParams:
    """The rate triple (lam, mu, alpha) plus derived split rates."""

    lam: float
    mu: float
    alpha: float

    def __post_init__(self):
        _check_positive_finite("lambda", self.lam)
        _check_positive_finite("mu", self.mu)
        _check_positive_finite("alpha", self.alpha)

    @property
    def p_up(self) -> float:
        """Probability that a clock event is an up-move."""
        return self.lam / (self.lam + self.mu)

    @property
    def rate_up(self) -> float:
        """Rate of the regular-growth stream: alpha*lam/(lam+mu)."""
        return self.alpha * self.lam / (self.lam + self.mu)

    @property
    def rate_cat(self) -> float:
        """Rate of the catastrophe stream: alpha*mu/(lam+mu)."""
        return self.alpha * self.mu / (self.lam + self.mu)


def _check_positive_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value!r}")


def validate_params(lam: float, mu: float, alpha: float) -> ModelParams:
    """Build a ModelParams, rejecting nonpositive or non-finite rates.

    The error message names the offending field.
    """
    return ModelParams(float(lam), float(mu), float(alpha))
