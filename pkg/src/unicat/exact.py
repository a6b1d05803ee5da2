"""Exact transient distributions by uniformization.

The process observed at its jump instants is a discrete chain subordinated
to a Poisson clock of constant rate alpha, so the time-t law is the
Poisson-weighted mixture of chain powers

    P(t) = sum_n  e^{-alpha t} (alpha t)^n / n!  *  (chain law after n steps).

This is computed on the truncated state space {0..N} with three certified
error channels, all tracked in log space so they stay meaningful far below
the smallest normal double:

* boundary leak: up-flux out of state N is removed (never reflected), so
  the computed vector is a lower bound of the true law on {0..N};
* series remainder: the Poisson series is cut with a geometric-ratio bound
  on the neglected weight;
* the sum of both is reported as ``truncation_mass``.

For deep-tail queries (the large-deviation experiments) the series is
extended past the usual mass-based cutoff until the neglected weight is
small relative to the accumulated tail mass at ``target_index``, otherwise
a tail of size e^{-700} would drown in an absolute 1e-12 certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams
from .numerics import LogProb, log_poisson_sf

__all__ = [
    "DistributionVector",
    "TruncationError",
    "pushforward_step",
    "transient_distribution",
    "tail_probability",
    "truncation_error_bound",
    "save_distribution_csv",
    "load_distribution_csv",
]

# spec'd renormalization cadence: fold scale out when the peak weight
# leaves [1e-100, 1e100]
_RENORM_SPAN = math.log(1e100)


class TruncationError(RuntimeError):
    """Raised when a solve cannot certify its truncation budget."""

    def __init__(self, message: str, achieved: float = math.nan):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class DistributionVector:
    """Truncated law over states {0..N} in scaled representation.

    True probability of state j is ``weights[j] * exp(log_scale)``.
    ``truncation_mass`` is a certified upper bound on all probability the
    vector does not account for (boundary leak plus series remainder).
    """

    weights: np.ndarray
    log_scale: float
    truncation_mass: float

    def __post_init__(self):
        self.weights.setflags(write=False)

    @property
    def n_states(self) -> int:
        return self.weights.size

    def probability(self, j: int) -> float:
        return float(self.weights[j] * math.exp(self.log_scale))

    def total_mass(self) -> float:
        """Accounted-for mass; with truncation_mass it should reach 1."""
        return float(math.fsum(np.sort(self.weights)) * math.exp(self.log_scale))


def _pushforward_raw(w: np.ndarray, p_up: float):
    """One embedded-chain step applied to a weight vector.

    Returns (new_weights, leak) where leak is the up-flux out of the top
    state.  O(N) via a single suffix-sum pass over w[i]/i.
    """
    n = w.size
    ratios = np.empty(n)
    ratios[0] = 0.0
    np.divide(w[1:], np.arange(1, n, dtype=np.float64), out=ratios[1:])
    # suffix[j] = sum_{i >= j} ratios[i]
    suffix = np.cumsum(ratios[::-1])[::-1]
    new = np.empty(n)
    new[:-1] = (1.0 - p_up) * suffix[1:]
    new[-1] = 0.0
    new[1] += w[0]
    new[2:] += p_up * w[1:-1]
    leak = p_up * float(w[-1])
    return new, leak


def pushforward_step(dist: DistributionVector, params: ModelParams) -> DistributionVector:
    """Advance a DistributionVector by one embedded-chain transition.

    Mass pushed above the top state is added to ``truncation_mass``.
    """
    new, leak = _pushforward_raw(np.asarray(dist.weights, dtype=np.float64), params.p_up)
    return DistributionVector(
        weights=new,
        log_scale=dist.log_scale,
        truncation_mass=dist.truncation_mass + leak * math.exp(dist.log_scale),
    )


def _point_mass(n_states: int, init: int) -> DistributionVector:
    w = np.zeros(n_states)
    w[init] = 1.0
    return DistributionVector(weights=w, log_scale=0.0, truncation_mass=0.0)


def transient_distribution(params: ModelParams, t: float, init: int,
                           n_states: int | None = None, tol: float = 1e-12,
                           target_index: int | None = None,
                           target_rel_tol: float = 1e-6,
                           renorm_span: float = _RENORM_SPAN) -> DistributionVector:
    """Law of the process at time t started from ``init``.

    Args:
        n_states: size of the truncated state space {0..n_states-1}.
            Defaults to ceil(target + init + alpha*t + 8*sqrt(alpha*t)),
            which certifies a negligible leak but grows linearly in t;
            large-horizon callers should size it to their query instead.
        tol: absolute budget for the certified truncation_mass; the solve
            raises TruncationError if it cannot be met.
        target_index: when given, the Poisson series is extended until the
            neglected weight is at most ``target_rel_tol`` times the tail
            mass accumulated at or above this state, making deep-tail
            queries certifiable in relative terms.

    Raises:
        TruncationError: n_states (or the series cap) cannot certify tol.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if init < 0:
        raise ValueError(f"init must be nonnegative, got {init}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    mu = params.alpha * t
    if n_states is None:
        base = target_index if target_index is not None else 0
        n_states = int(math.ceil(base + init + mu + 8.0 * math.sqrt(mu))) + 2
    n_states = max(int(n_states), 2)
    if init >= n_states:
        raise ValueError(f"init={init} must be below n_states={n_states}")
    if target_index is not None and not 0 <= target_index < n_states:
        raise ValueError(f"target_index={target_index} outside [0, {n_states})")
    if t == 0:
        return _point_mass(n_states, init)

    p_up = params.p_up
    log_mu = math.log(mu)
    log_tol_half = math.log(tol) - math.log(2.0)
    log_rel = math.log(target_rel_tol)
    n_floor = int(math.ceil(mu)) + 1
    hard_cap = int(math.ceil(mu + 12.0 * math.sqrt(mu + 1.0))) + 8 * n_states + 256

    u = np.zeros(n_states)
    u[init] = 1.0
    u_scale = 0.0
    acc = np.zeros(n_states)
    log_w = -mu                     # ln of Poisson weight at the current term
    log_leak_cum = -math.inf        # ln of mass leaked from u so far
    log_miss = -math.inf            # ln of sum_k w_k * leak_cum_k
    log_tail = -math.inf            # ln of accumulated mass at/above target
    log_rem = math.inf              # ln bound on neglected series weight

    k = 0
    while True:
        scale = log_w + u_scale
        w_eff = math.exp(scale) if scale > -746.0 else 0.0
        if w_eff > 0.0:
            acc += w_eff * u
        if target_index is not None:
            s = float(u[target_index:].sum())
            if s > 0.0:
                log_tail = np.logaddexp(log_tail, scale + math.log(s))
        if log_leak_cum > -math.inf:
            log_miss = np.logaddexp(log_miss, log_w + log_leak_cum)

        log_w_next = log_w + log_mu - math.log(k + 1)
        if k >= n_floor:
            q = mu / (k + 2.0)
            log_rem = log_w_next - math.log1p(-q)
            abs_ok = log_rem <= log_tol_half
            tgt_ok = target_index is None or log_rem <= log_tail + log_rel
            if abs_ok and tgt_ok:
                break
        if k >= hard_cap:
            break

        u, step_leak = _pushforward_raw(u, p_up)
        if step_leak > 0.0:
            log_leak_cum = np.logaddexp(log_leak_cum, math.log(step_leak) + u_scale)
        peak = float(u.max())
        if peak > 0.0 and abs(math.log(peak)) > renorm_span:
            u /= peak
            u_scale += math.log(peak)
        log_w = log_w_next
        k += 1

    remainder = math.exp(log_rem) if log_rem < 700.0 else math.inf
    miss = math.exp(log_miss) if log_miss > -math.inf else 0.0
    trunc = miss + remainder
    if not trunc <= tol:
        raise TruncationError(
            f"certified truncation {trunc:.3e} exceeds tol {tol:.3e} "
            f"(n_states={n_states}, t={t}); enlarge n_states",
            achieved=trunc,
        )

    peak = float(acc.max())
    if peak <= 0.0:
        raise TruncationError("all probability mass escaped the state space",
                              achieved=trunc)
    return DistributionVector(weights=acc / peak,
                              log_scale=math.log(peak),
                              truncation_mass=trunc)


def tail_probability(dist: DistributionVector, m: int) -> LogProb:
    """ln P(state >= m) under the vector's accounted mass.

    The sum runs from the smallest weights upward for accuracy.  The
    reported uncertainty is the vector's truncation_mass: the true tail
    lies in [exp(value), exp(value) + truncation_mass].
    """
    if not 0 <= m < dist.n_states:
        raise ValueError(f"m={m} outside the state range [0, {dist.n_states - 1}]")
    total = math.fsum(np.sort(dist.weights[m:]))
    if total == 0.0:
        return LogProb(-math.inf, uncertainty=dist.truncation_mass)
    return LogProb(math.log(total) + dist.log_scale,
                   uncertainty=dist.truncation_mass)


def truncation_error_bound(params: ModelParams, t: float, n_states: int,
                           init: int) -> LogProb:
    """Certified log-bound on mass escaping the truncated space.

    The state can rise at most one per clock event, so escaping {0..N}
    requires at least n_states - init events: the bound is the Poisson
    upper tail at that count.
    """
    k = n_states - init
    if k <= 0:
        return LogProb(0.0)
    return LogProb(log_poisson_sf(k, params.alpha * t))


def save_distribution_csv(dist: DistributionVector, path) -> None:
    """Archive a DistributionVector as CSV with scale/truncation headers."""
    with open(path, "w") as fh:
        fh.write("# unicat DistributionVector v1\n")
        fh.write(f"# log_scale={dist.log_scale!r}\n")
        fh.write(f"# truncation_mass={dist.truncation_mass!r}\n")
        fh.write("state,weight\n")
        for j, w in enumerate(dist.weights):
            fh.write(f"{j},{w:.17g}\n")


def load_distribution_csv(path) -> DistributionVector:
    """Inverse of save_distribution_csv."""
    meta = {}
    weights = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = float(val)
            elif line and not line.startswith("state"):
                _, _, w = line.partition(",")
                weights.append(float(w))
    return DistributionVector(weights=np.array(weights),
                              log_scale=meta["log_scale"],
                              truncation_mass=meta["truncation_mass"])
