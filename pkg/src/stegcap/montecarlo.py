"""Monte Carlo validation of the detection bound and the achievability claim.

Two desk-scale experiments:

* :func:`run_detection` — the optimal likelihood-ratio test between the
  cover distribution and the covariance-scaled stego distribution, whose
  empirical total error must respect the KL-derived floor 1 - epsilon;
* :func:`run_decoding` — random codebooks at a fraction of the closed-form
  rate, maximum-likelihood decoding, and the block-error trend in n.

Trials are processed in fixed-size chunks with one child seed per chunk
(spawned from the experiment seed), and reduced in chunk order, so reports
are bit-for-bit reproducible regardless of how chunks might be scheduled.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from ._version import TOOL_ID
from .capacity import CapacityQuery, max_embedding_rate
from .errors import BudgetExceeded, DegenerateMessage, DomainError
from .gaussmodel import CovarianceSpec, Dense, GaussianModel, QuantizationGrid
from .specfun import embedding_factor_from_gamma

__all__ = [
    "TRIALS_CAP",
    "CODEBOOK_CAP",
    "DECODING_DIM_CAP",
    "DetectionExperiment",
    "DetectionReport",
    "DecodingExperiment",
    "DecodingEntry",
    "DecodingReport",
    "run_detection",
    "run_decoding",
    "exact_lrt_error_diagonal",
]

TRIALS_CAP = 10 ** 7
CODEBOOK_CAP = 2 ** 16
DECODING_DIM_CAP = 4096

_CHUNK_BUDGET = 1 << 22  # floats per sample chunk


@dataclass(frozen=True, eq=False)
class DetectionExperiment:
    """Equal-prior hypothesis test: cover vs optimally embedded stego."""

    cover: GaussianModel
    epsilon: float
    trials: int
    seed: int
    grid: QuantizationGrid | None = None

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise DomainError(
                f"epsilon must lie in (0, 1) for a detection run, got {self.epsilon}")
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if self.trials > TRIALS_CAP:
            raise BudgetExceeded(
                f"trials {self.trials} exceeds the cap {TRIALS_CAP}")
        if self.trials < 1000:
            warnings.warn(
                "fewer than 1000 trials: reported standard errors are "
                "unreliable", UserWarning, stacklevel=2)


@dataclass(frozen=True)
class DetectionReport:
    """Empirical LRT error rates with their binomial standard errors."""

    n: int
    epsilon: float
    covariance: str
    quantized: bool
    embedding_factor: float
    threshold: float
    trials: int
    seed: int
    cover_trials: int
    stego_trials: int
    alpha_hat: float
    beta_hat: float
    p_e_hat: float
    p_e_bound: float
    std_err: float
    passed: bool
    tool_version: str = TOOL_ID


def _chunk_rows(n: int, width: int = 1) -> int:
    return max(1, min(8192, _CHUNK_BUDGET // max(n * width, 1)))


def run_detection(e: DetectionExperiment) -> DetectionReport:
    """Run the likelihood-ratio detector against optimally embedded stego.

    Each trial draws a fair label, samples the labeled distribution
    (stego = cover scaled by a*), optionally quantizes, and thresholds the
    exact log-likelihood ratio at zero.  With alpha and beta the
    conditional error rates, p_e_hat = alpha_hat + beta_hat estimates the
    total error, floored in expectation by 1 - epsilon.
    """
    cover = e.cover
    n = cover.dim
    gamma = 4.0 * e.epsilon * e.epsilon / n
    a = embedding_factor_from_gamma(gamma)
    # LLR > 0  <=>  mahalanobis > n * a * ln(a) / (a - 1)
    threshold = n * a * math.log(a) / (a - 1.0) if a > 1.0 else math.inf
    sqrt_a = math.sqrt(a)

    rows = _chunk_rows(n)
    n_chunks = -(-e.trials // rows)
    children = np.random.SeedSequence(e.seed).spawn(n_chunks)
    false_alarms = missed = covers = stegos = 0
    done = 0
    for child in children:
        m = min(rows, e.trials - done)
        done += m
        rng = np.random.default_rng(child)
        labels = rng.integers(0, 2, size=m)
        z = rng.standard_normal((m, n))
        z[labels == 1] *= sqrt_a
        x = cover.mean + cover.covariance.sample_transform(z)
        if e.grid is not None:
            x = e.grid.quantize(x)
        d = x - cover.mean
        q = np.einsum("ij,ij->i", d, cover.covariance.solve(d))
        decide_stego = q > threshold
        false_alarms += int(np.sum(decide_stego & (labels == 0)))
        missed += int(np.sum(~decide_stego & (labels == 1)))
        covers += int(np.sum(labels == 0))
        stegos += int(np.sum(labels == 1))

    alpha_hat = false_alarms / covers if covers else 0.0
    beta_hat = missed / stegos if stegos else 0.0
    var = 0.0
    if covers:
        var += alpha_hat * (1.0 - alpha_hat) / covers
    if stegos:
        var += beta_hat * (1.0 - beta_hat) / stegos
    std_err = math.sqrt(var)
    p_e_hat = alpha_hat + beta_hat
    p_e_bound = 1.0 - e.epsilon
    return DetectionReport(
        n=n,
        epsilon=e.epsilon,
        covariance=repr(cover.covariance),
        quantized=e.grid is not None,
        embedding_factor=a,
        threshold=threshold,
        trials=e.trials,
        seed=e.seed,
        cover_trials=covers,
        stego_trials=stegos,
        alpha_hat=alpha_hat,
        beta_hat=beta_hat,
        p_e_hat=p_e_hat,
        p_e_bound=p_e_bound,
        std_err=std_err,
        passed=p_e_hat >= p_e_bound - 3.0 * std_err,
    )


def exact_lrt_error_diagonal(cover: GaussianModel, a: float) -> float:
    """Exact total error of the variance-ratio LRT for diagonal covers.

    For diagonal covariance the whitened statistic is chi-square with n
    degrees of freedom under the cover and a scaled chi-square under the
    stego, so the error integrates in closed form:
    1 - F_n(t) + F_n(t/a) at the LLR-zero threshold t.
    """
    if not (math.isfinite(a) and a >= 1.0):
        raise DomainError(f"scale factor must satisfy a >= 1, got {a}")
    if not cover.covariance.is_diagonal(cover.dim):
        raise DomainError(
            "exact error requires a diagonal cover covariance; use "
            "run_detection for correlated covers")
    if a == 1.0:
        return 1.0
    n = cover.dim
    threshold = n * a * math.log(a) / (a - 1.0)
    return float(1.0 - chi2.cdf(threshold, n) + chi2.cdf(threshold / a, n))


@dataclass(frozen=True, eq=False)
class DecodingExperiment:
    """Random-codebook transmission over additive embedding.

    The covariance spec is structural (dimension-free for the scaled
    identity and AR(1) forms), so one experiment can sweep several n with
    the same cover family.  The codebook size follows from the rate
    fraction: K = round(exp(rate_fraction * I(n))), floored at 2; give
    ``codebook_size_override`` to pin K instead (1 is allowed and trivially
    error-free).
    """

    covariance: CovarianceSpec
    epsilon: float
    rate_fraction: float
    n_list: tuple
    trials: int
    seed: int
    mean_value: float = 0.0
    grid: QuantizationGrid | None = None
    codebook_size_override: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if not (0.0 < self.epsilon < 1.0):
            raise DomainError(
                f"epsilon must lie in (0, 1) for a decoding run, got {self.epsilon}")
        if not (math.isfinite(self.rate_fraction) and self.rate_fraction > 0.0):
            raise DomainError(
                f"rate_fraction must be > 0, got {self.rate_fraction}")
        if not self.n_list:
            raise DomainError("n_list must be nonempty")
        for n in self.n_list:
            if n < 1:
                raise DomainError(f"every n must be >= 1, got {n}")
            if n > DECODING_DIM_CAP:
                raise BudgetExceeded(
                    f"n = {n} exceeds the decoding cap {DECODING_DIM_CAP}")
            if isinstance(self.covariance, Dense) and n != self.covariance.dim:
                raise DomainError(
                    f"dense covariance of dim {self.covariance.dim} cannot "
                    f"serve n = {n}; use a structural covariance to sweep n")
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if self.trials > TRIALS_CAP:
            raise BudgetExceeded(
                f"trials {self.trials} exceeds the cap {TRIALS_CAP}")
        if self.codebook_size_override is not None and self.codebook_size_override < 1:
            raise DomainError("codebook_size_override must be >= 1")


@dataclass(frozen=True)
class DecodingEntry:
    """Per-n outcome of the decoding experiment."""

    n: int
    embedding_factor: float
    capacity_nats: float
    codebook_size: int
    rate_nats: float
    trials: int
    errors: int
    p_b_hat: float
    std_err: float


@dataclass(frozen=True)
class DecodingReport:
    """Block-error estimates per n plus the monotone-trend verdict."""

    epsilon: float
    rate_fraction: float
    covariance: str
    mean_value: float
    quantized: bool
    seed: int
    decoder: str
    entries: tuple
    monotone_trend: bool
    tool_version: str = TOOL_ID


def _codebook_size(e: DecodingExperiment, capacity_nats: float) -> int:
    if e.codebook_size_override is not None:
        k = e.codebook_size_override
    else:
        log_k = e.rate_fraction * capacity_nats
        if log_k > math.log(CODEBOOK_CAP) + 1.0:
            raise BudgetExceeded(
                f"requested codebook of exp({log_k:.1f}) codewords exceeds "
                f"the cap {CODEBOOK_CAP}")
        k = max(2, round(math.exp(log_k)))
    if k > CODEBOOK_CAP:
        raise BudgetExceeded(f"codebook size {k} exceeds the cap {CODEBOOK_CAP}")
    return k


def run_decoding(e: DecodingExperiment) -> DecodingReport:
    """Transmit random codewords additively and decode by maximum likelihood.

    Per n: draw K codewords i.i.d. N(0, (a-1) Sigma_c), per trial add one
    to a fresh cover realization (optionally quantizing the sum), then pick
    the codeword maximizing the cover density of s - m_j.  The monotone
    trend asserts P_B nonincreasing across sorted n within two combined
    standard errors.
    """
    per_n_seeds = np.random.SeedSequence(e.seed).spawn(len(e.n_list))
    entries = []
    for n, seed_n in zip(e.n_list, per_n_seeds):
        cover = GaussianModel(n, np.full(n, e.mean_value), e.covariance)
        result = max_embedding_rate(CapacityQuery(n=n, epsilon=e.epsilon))
        a = result.embedding_factor
        if a <= 1.0:
            raise DegenerateMessage(
                f"embedding factor is 1 at epsilon={e.epsilon}, n={n}; "
                "no message distribution exists")
        k = _codebook_size(e, result.rate_total)

        rows = _chunk_rows(n, width=max(1, k // 8))
        n_chunks = -(-e.trials // rows)
        sub = seed_n.spawn(n_chunks + 1)

        codebook_rng = np.random.default_rng(sub[0])
        codebook = math.sqrt(a - 1.0) * cover.covariance.sample_transform(
            codebook_rng.standard_normal((k, n)))
        white_codebook = cover.covariance.whiten(codebook)
        half_energy = 0.5 * np.einsum("ij,ij->i", white_codebook, white_codebook)

        errors = 0
        done = 0
        for child in sub[1:]:
            m = min(rows, e.trials - done)
            done += m
            rng = np.random.default_rng(child)
            sent = rng.integers(0, k, size=m)
            z = rng.standard_normal((m, n))
            s = cover.mean + cover.covariance.sample_transform(z) + codebook[sent]
            if e.grid is not None:
                s = e.grid.quantize(s)
            white_s = cover.covariance.whiten(s - cover.mean)
            score = white_s @ white_codebook.T - half_energy
            decoded = np.argmax(score, axis=1)
            errors += int(np.sum(decoded != sent))

        p_b = errors / e.trials
        std_err = math.sqrt(p_b * (1.0 - p_b) / e.trials)
        entries.append(DecodingEntry(
            n=n,
            embedding_factor=a,
            capacity_nats=result.rate_total,
            codebook_size=k,
            rate_nats=math.log(k),
            trials=e.trials,
            errors=errors,
            p_b_hat=p_b,
            std_err=std_err,
        ))

    by_n = sorted(entries, key=lambda entry: entry.n)
    trend = all(
        nxt.p_b_hat <= cur.p_b_hat + 2.0 * math.hypot(cur.std_err, nxt.std_err)
        for cur, nxt in zip(by_n, by_n[1:]))
    return DecodingReport(
        epsilon=e.epsilon,
        rate_fraction=e.rate_fraction,
        covariance=repr(e.covariance),
        mean_value=e.mean_value,
        quantized=e.grid is not None,
        seed=e.seed,
        decoder="maximum-likelihood",
        entries=tuple(entries),
        monotone_trend=trend,
    )
