"""Closed-form embedding-rate limits and the matching codebook parameters.

Everything follows from one scalar: the factor ``a >= 1`` by which the
stego covariance scales the cover covariance when the KL detectability
budget ``2*epsilon^2`` is met with equality.  The maximum transferable
information is then ``(n/2) ln(a)`` nats, bounded above by ``2 eps sqrt(n)``
for any n.  Rates are nats throughout; unit conversion belongs to callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateMessage, DomainError
from .gaussmodel import GaussianModel
from .specfun import DEFAULT_SOLVER, SolverConfig, embedding_factor_from_gamma

__all__ = [
    "CapacityQuery",
    "CapacityResult",
    "DetectionBounds",
    "PeBound",
    "max_embedding_rate",
    "optimal_codebook_params",
    "srl_bound",
    "embedding_factor_bounds_from_pe",
    "detection_bounds",
]

#: Every closed-form output assumes the conservative (equality) reading of
#: the KL budget for quantized covers.
ASSUMPTION_LABEL = "conservative (quantized covers)"


@dataclass(frozen=True)
class CapacityQuery:
    """Either a detectability budget epsilon or an average detector error.

    Exactly one of ``epsilon`` / ``p_e_avg`` must be given.  The P_E form
    works through the detector-blindness substitution eps_eff = 1 - 2*P_E
    and yields a lower bound on the embedding factor rather than its value.
    """

    n: int
    epsilon: float | None = None
    p_e_avg: float | None = None
    units: str = "nats"

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if (self.epsilon is None) == (self.p_e_avg is None):
            raise DomainError("exactly one of epsilon / p_e_avg must be set")
        if self.epsilon is not None and not (0.0 <= self.epsilon <= 1.0):
            raise DomainError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.p_e_avg is not None and not (0.0 <= self.p_e_avg <= 0.5):
            raise DomainError(f"p_e_avg must lie in [0, 0.5], got {self.p_e_avg}")
        if self.units not in ("nats", "bits"):
            raise DomainError(f"units must be 'nats' or 'bits', got {self.units!r}")

    @property
    def mode(self) -> str:
        return "epsilon" if self.epsilon is not None else "pe-lower-bound"

    @property
    def epsilon_effective(self) -> float:
        if self.epsilon is not None:
            return float(self.epsilon)
        return 1.0 - 2.0 * float(self.p_e_avg)


@dataclass(frozen=True)
class DetectionBounds:
    """What the KL budget promises about any detector."""

    kl_budget: float
    p_d_max: float
    p_e_min: float
    p_e_avg_min: float
    clamped: bool


@dataclass(frozen=True)
class CapacityResult:
    """Closed-form outputs for one (epsilon-or-P_E, n) query; rates in nats."""

    n: int
    mode: str
    epsilon_effective: float
    gamma: float
    embedding_factor: float
    rate_total: float
    rate_per_element: float
    srl_bound: float
    achievable_rate: float
    detection: DetectionBounds
    assumption: str = ASSUMPTION_LABEL


def detection_bounds(kl: float) -> DetectionBounds:
    """Detector performance bounds implied by a KL budget.

    p_d_max = min(1, sqrt(kl/2)); the clamp flag marks the vacuous regime
    where the bound says nothing (sqrt(kl/2) > 1).
    """
    if not (math.isfinite(kl) and kl >= 0.0):
        raise DomainError(f"kl must be finite and >= 0, got {kl}")
    raw = math.sqrt(kl / 2.0)
    clamped = raw > 1.0
    p_d_max = min(1.0, raw)
    p_e_min = 1.0 - p_d_max
    return DetectionBounds(kl_budget=kl, p_d_max=p_d_max, p_e_min=p_e_min,
                           p_e_avg_min=0.5 * p_e_min, clamped=clamped)


def max_embedding_rate(q: CapacityQuery,
                       config: SolverConfig = DEFAULT_SOLVER) -> CapacityResult:
    """Maximum total information transfer for the query, in nats.

    gamma = 4*eps^2/n, a = embedding_factor_from_gamma(gamma), and the
    rate is (n/2) ln(a).  In P_E mode the same formulas run on
    eps_eff = 1 - 2*P_E and the result is a lower bound.
    """
    eps = q.epsilon_effective
    gamma = 4.0 * eps * eps / q.n
    a = embedding_factor_from_gamma(gamma, config)
    rate_total = 0.5 * q.n * math.log(a)
    srl = 2.0 * eps * math.sqrt(q.n)
    return CapacityResult(
        n=q.n,
        mode=q.mode,
        epsilon_effective=eps,
        gamma=gamma,
        embedding_factor=a,
        rate_total=rate_total,
        rate_per_element=rate_total / q.n,
        srl_bound=srl,
        achievable_rate=max(0.0, rate_total - 2.0 * eps),
        detection=detection_bounds(2.0 * eps * eps),
    )


def optimal_codebook_params(cover: GaussianModel, q: CapacityQuery,
                            config: SolverConfig = DEFAULT_SOLVER) -> GaussianModel:
    """Message distribution achieving the maximum rate against this cover.

    Zero mean with covariance (a - 1) * Sigma_c, which preserves the
    cover's correlation structure.  At a = 1 (zero budget) the message
    collapses to a point mass and :class:`DegenerateMessage` is raised.
    """
    if cover.dim != q.n:
        raise DomainError(
            f"query n = {q.n} does not match cover dimension {cover.dim}")
    result = max_embedding_rate(q, config)
    a = result.embedding_factor
    if a == 1.0:
        raise DegenerateMessage(
            "optimal message covariance is exactly zero (a* = 1); "
            "nothing can be embedded at this budget")
    return GaussianModel(cover.dim, np.zeros(cover.dim),
                         cover.covariance.scaled(a - 1.0))


def srl_bound(epsilon: float, n: int) -> float:
    """Square-root ceiling 2*eps*sqrt(n) on the total rate, in nats."""
    if not (0.0 < epsilon <= 1.0):
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return 2.0 * epsilon * math.sqrt(n)


class PeBound(NamedTuple):
    a_lower: float
    note: str


def embedding_factor_bounds_from_pe(p_e_avg: float, n: int,
                                    config: SolverConfig = DEFAULT_SOLVER
                                    ) -> PeBound:
    """Lower bound on the embedding factor from an average detector error.

    A detector held to average error P_E admits any budget with
    1 - 2*P_E <= eps, so the factor lies in [a_lower, a*(eps)] where
    a_lower uses eps_eff = 1 - 2*P_E.
    """
    if not (0.0 <= p_e_avg <= 0.5):
        raise DomainError(f"p_e_avg must lie in [0, 0.5], got {p_e_avg}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    eps_eff = 1.0 - 2.0 * p_e_avg
    a_lower = embedding_factor_from_gamma(4.0 * eps_eff * eps_eff / n, config)
    note = ("embedding factor lies in [a_lower, a*(epsilon)]; the lower end "
            f"uses eps_eff = 1 - 2*P_E = {eps_eff:.6g} in place of epsilon")
    return PeBound(a_lower=a_lower, note=note)
