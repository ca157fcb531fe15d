"""Scalar special functions used by the capacity formulas.

Two closely related problems live here:

* the real lower branch ``W_{-1}`` of Lambert's W function on ``[-1/e, 0)``,
* the monotone scalar equation ``a - ln(a) = 1 + gamma`` for ``a >= 1``,
  whose root is the covariance scaling factor of the optimal embedding.

The two are linked by ``a = -W_{-1}(-exp(-(1 + gamma)))``.  Both solvers use
Halley iteration with a bisection fallback inside a maintained bracket, so a
bad step can never escape the root's interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

__all__ = [
    "SolverConfig",
    "DEFAULT_SOLVER",
    "lambert_w_m1",
    "embedding_factor_from_gamma",
    "verify_residual",
]

_NEG_INV_E = -math.exp(-1.0)


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule for the scalar root finders.

    ``relative_tolerance`` bounds the last Halley/Newton step relative to the
    current iterate; ``max_iterations`` is a hard cap after which
    :class:`~stegcap.errors.ConvergenceError` is raised.
    """

    relative_tolerance: float = 1e-12
    max_iterations: int = 100

    def __post_init__(self):
        if not (0.0 < self.relative_tolerance < 1.0):
            raise DomainError(
                f"relative_tolerance must be in (0, 1), got {self.relative_tolerance}")
        if self.max_iterations < 1:
            raise DomainError(
                f"max_iterations must be >= 1, got {self.max_iterations}")


DEFAULT_SOLVER = SolverConfig()


def lambert_w_m1(x: float, config: SolverConfig = DEFAULT_SOLVER) -> float:
    """Real branch ``W_{-1}(x)`` for ``x in [-1/e, 0)``.

    Returns the unique ``w <= -1`` with ``w * exp(w) = x`` satisfied to the
    configured relative tolerance.  Raises
    :class:`~stegcap.errors.DomainError` outside the branch's domain.
    """
    x = float(x)
    if not math.isfinite(x) or x >= 0.0:
        raise DomainError(f"W_-1 requires -1/e <= x < 0, got {x}")
    # q = 1 + e*x measures the distance to the branch point at -1/e.
    q = 1.0 + math.e * x
    if q < -1e-14:
        raise DomainError(f"W_-1 requires x >= -1/e ~ {_NEG_INV_E}, got {x}")
    if q <= 0.0:
        return -1.0
    if q < 0.25:
        return _w_near_branch(x, q, config)
    return _w_log_form(x, config)


def _w_near_branch(x: float, q: float, config: SolverConfig) -> float:
    """Halley on f(w) = w*e^w - x, started from the branch-point series.

    Only used for x within 25% of -1/e, where every quantity is O(1) and
    the direct form is perfectly scaled.
    """
    p = -math.sqrt(2.0 * q)
    w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)))
    # f is decreasing on (-inf, -1]: positive left of the root, negative right.
    lo, hi = -3.0, -1.0
    for _ in range(config.max_iterations):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= 0.5 * config.relative_tolerance * abs(x):
            return w
        if f > 0.0:
            lo = w
        else:
            hi = w
        fp = ew * (w + 1.0)
        fpp = ew * (w + 2.0)
        denom = 2.0 * fp * fp - f * fpp
        w_new = w - 2.0 * f * fp / denom if denom != 0.0 else math.nan
        if not (lo < w_new < hi):
            w_new = 0.5 * (lo + hi)
        w = w_new
    raise ConvergenceError(
        f"W_-1 did not converge for x={x} in {config.max_iterations} iterations")


def _w_log_form(x: float, config: SolverConfig) -> float:
    """Halley on g(w) = w + ln(-w) - ln(-x), the log of |w*e^w| = |x|.

    This form never evaluates exp(), so it cannot underflow even for
    |x| near the smallest representable float (w ~ -745); |g| directly
    approximates the relative residual |w*e^w - x| / |x|.
    """
    log_neg_x = math.log(-x)
    log_log = math.log(-log_neg_x)
    w = log_neg_x - log_log + log_log / log_neg_x
    if w > -1.0:
        w = -1.5

    def g(v: float) -> float:
        return v + math.log(-v) - log_neg_x

    # g is increasing on w <= -1: negative left of the root, positive right.
    hi = -1.0
    lo = w - 2.0
    while g(lo) > 0.0:
        lo -= 2.0
        if lo < -1e6:  # pragma: no cover - cannot trigger for x in domain
            raise ConvergenceError("failed to bracket W_-1")

    for _ in range(config.max_iterations):
        gw = g(w)
        if abs(gw) <= 0.5 * config.relative_tolerance:
            return w
        if gw > 0.0:
            hi = w
        else:
            lo = w
        gp = 1.0 + 1.0 / w
        gpp = -1.0 / (w * w)
        denom = 2.0 * gp * gp - gw * gpp
        w_new = w - 2.0 * gw * gp / denom if denom != 0.0 else math.nan
        if not (lo < w_new < hi):
            w_new = 0.5 * (lo + hi)
        w = w_new
    raise ConvergenceError(
        f"W_-1 did not converge for x={x} in {config.max_iterations} iterations")


def _solve_small_gamma(gamma: float, config: SolverConfig) -> float:
    """Root of t - log1p(t) = gamma, returned as a = 1 + t.

    Formulating in t = a - 1 avoids the cancellation that makes the
    W-identity route lose digits when gamma is tiny.
    """
    s = math.sqrt(2.0 * gamma)
    t = s * (1.0 + s * (1.0 / 3.0 + s / 36.0))
    for _ in range(config.max_iterations):
        g = t - math.log1p(t) - gamma
        # g'(t) = t / (1 + t)
        step = g * (1.0 + t) / t
        t_new = t - step
        if t_new <= 0.0:
            t_new = 0.5 * t
        # tolerance applies to the returned quantity a = 1 + t
        if abs(t_new - t) <= config.relative_tolerance * (1.0 + t_new):
            return 1.0 + t_new
        t = t_new
    raise ConvergenceError(
        f"embedding-factor solve did not converge for gamma={gamma}")


def embedding_factor_from_gamma(gamma: float,
                                config: SolverConfig = DEFAULT_SOLVER) -> float:
    """Solve ``a - ln(a) = 1 + gamma`` for the root ``a >= 1``.

    ``gamma = 0`` returns exactly 1.0.  The left-hand side is strictly
    increasing on ``a >= 1``, so the root is unique; it always lies in
    ``[1, 2 + sqrt(2*gamma) + gamma]``.
    """
    gamma = float(gamma)
    if not math.isfinite(gamma) or gamma < 0.0:
        raise DomainError(f"gamma must be finite and >= 0, got {gamma}")
    if gamma == 0.0:
        return 1.0
    if gamma < 1e-2:
        return _solve_small_gamma(gamma, config)

    c = 1.0 + gamma
    if c <= 700.0:
        a = -lambert_w_m1(-math.exp(-c), config)
    else:
        # exp(-c) underflows long before this matters; start from the
        # asymptotic root of a - ln(a) = c and polish below.
        a = c + math.log(c)

    lo = 1.0
    hi = 2.0 + math.sqrt(2.0 * gamma) + gamma
    for _ in range(config.max_iterations):
        f = a - math.log(a) - c
        if f > 0.0:
            hi = a
        elif f < 0.0:
            lo = a
        else:
            return a
        fp = 1.0 - 1.0 / a
        fpp = 1.0 / (a * a)
        denom = 2.0 * fp * fp - f * fpp
        if denom != 0.0:
            a_new = a - 2.0 * f * fp / denom
        else:
            a_new = math.nan
        if not (lo < a_new < hi):
            a_new = 0.5 * (lo + hi)
        if abs(a_new - a) <= config.relative_tolerance * abs(a_new):
            return a_new
        a = a_new
    raise ConvergenceError(
        f"embedding-factor solve did not converge for gamma={gamma}")


def verify_residual(a: float, gamma: float) -> float:
    """Defining-equation residual ``|a - ln(a) - 1 - gamma|``.

    Small residual certifies that ``a`` solves the embedding-factor
    equation for this ``gamma``; useful as an independent check on any
    solver output.
    """
    a = float(a)
    gamma = float(gamma)
    if not math.isfinite(a) or a < 1.0:
        raise DomainError(f"embedding factor must satisfy a >= 1, got {a}")
    if not math.isfinite(gamma) or gamma < 0.0:
        raise DomainError(f"gamma must be finite and >= 0, got {gamma}")
    return abs(a - math.log(a) - 1.0 - gamma)
