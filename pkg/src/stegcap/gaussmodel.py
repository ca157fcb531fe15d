"""Correlated multivariate Gaussian models for cover/stego/message sources.

Provides mean/covariance containers with three covariance structures, the
closed-form KL divergence in both directions, quantized differential
entropy, deterministic sampling (optionally rounded to a uniform grid), and
a histogram-based KL estimator for low-dimensional checks.

Structured covariances (scaled identity and AR(1) Toeplitz) have closed-form
log-determinants, inverses and sampling transforms, so they stay usable at
dimensions where dense factorizations are hopeless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import (
    DimensionMismatch,
    DomainError,
    EmptySample,
    NotPositiveDefinite,
)

__all__ = [
    "DENSE_DIM_LIMIT",
    "ScaledIdentity",
    "Ar1Toeplitz",
    "Dense",
    "CovarianceSpec",
    "QuantizationGrid",
    "GaussianModel",
    "EmpiricalKl",
    "kl_gaussian",
    "kl_gaussian_reverse",
    "entropy_quantized",
    "sample",
    "empirical_kl_quantized",
]

#: Dense factorizations are cubic; anything larger must use a structured form.
DENSE_DIM_LIMIT = 4096

#: Eigenvalues below this fraction of the largest are treated as degenerate.
RELATIVE_EIG_CUTOFF = 1e-12

_LN_2PI_E = math.log(2.0 * math.pi * math.e)
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ScaledIdentity:
    """Covariance sigma2 * I, any dimension."""

    sigma2: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0.0):
            raise NotPositiveDefinite(f"sigma2 must be > 0, got {self.sigma2}")

    def validate(self, dim: int) -> None:
        pass

    def log_det(self, dim: int) -> float:
        return dim * math.log(self.sigma2)

    def materialize(self, dim: int) -> np.ndarray:
        return self.sigma2 * np.eye(dim)

    def sample_transform(self, z: np.ndarray) -> np.ndarray:
        return math.sqrt(self.sigma2) * z

    def whiten(self, v: np.ndarray) -> np.ndarray:
        return v / math.sqrt(self.sigma2)

    def solve(self, b: np.ndarray) -> np.ndarray:
        return b / self.sigma2

    def trace_solve_product(self, other: "CovarianceSpec", dim: int) -> float:
        """tr(self^{-1} @ other)."""
        if isinstance(other, ScaledIdentity):
            return dim * other.sigma2 / self.sigma2
        if isinstance(other, Ar1Toeplitz):
            return dim * other.sigma2 / self.sigma2
        return float(np.trace(other.materialize(dim))) / self.sigma2

    def scaled(self, factor: float) -> "ScaledIdentity":
        return ScaledIdentity(self.sigma2 * factor)

    def is_diagonal(self, dim: int) -> bool:
        return True


@dataclass(frozen=True)
class Ar1Toeplitz:
    """Covariance with entries sigma2 * rho^{|i-j|} (stationary AR(1))."""

    sigma2: float
    rho: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0.0):
            raise NotPositiveDefinite(f"sigma2 must be > 0, got {self.sigma2}")
        if not (math.isfinite(self.rho) and -1.0 < self.rho < 1.0):
            raise NotPositiveDefinite(
                f"rho must lie in (-1, 1) for positive definiteness, got {self.rho}")

    def validate(self, dim: int) -> None:
        pass

    def log_det(self, dim: int) -> float:
        return dim * math.log(self.sigma2) + (dim - 1) * math.log1p(-self.rho * self.rho)

    def materialize(self, dim: int) -> np.ndarray:
        idx = np.arange(dim)
        return self.sigma2 * self.rho ** np.abs(idx[:, None] - idx[None, :])

    def sample_transform(self, z: np.ndarray) -> np.ndarray:
        # x_0 = sigma z_0;  x_i = rho x_{i-1} + sigma sqrt(1-rho^2) z_i.
        # Rescaling the first column folds the whole recursion into one
        # linear filter.
        sig = math.sqrt(self.sigma2)
        innov = math.sqrt(1.0 - self.rho * self.rho)
        z = np.asarray(z, dtype=float)
        scaled = sig * innov * z
        scaled[..., 0] = sig * z[..., 0]
        return lfilter([1.0], [1.0, -self.rho], scaled, axis=-1)

    def whiten(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        sig = math.sqrt(self.sigma2)
        innov = math.sqrt(1.0 - self.rho * self.rho)
        w = np.empty_like(v, dtype=float)
        w[..., 0] = v[..., 0] / sig
        w[..., 1:] = (v[..., 1:] - self.rho * v[..., :-1]) / (sig * innov)
        return w

    def solve(self, b: np.ndarray) -> np.ndarray:
        # Tridiagonal closed-form inverse of the AR(1) Toeplitz matrix.
        b = np.asarray(b, dtype=float)
        rho = self.rho
        n = b.shape[-1]
        if n == 1:
            return b / self.sigma2
        out = np.empty_like(b, dtype=float)
        out[..., 0] = b[..., 0] - rho * b[..., 1]
        out[..., -1] = b[..., -1] - rho * b[..., -2]
        if n > 2:
            out[..., 1:-1] = ((1.0 + rho * rho) * b[..., 1:-1]
                              - rho * (b[..., :-2] + b[..., 2:]))
        return out / (self.sigma2 * (1.0 - rho * rho))

    def trace_solve_product(self, other: "CovarianceSpec", dim: int) -> float:
        if isinstance(other, ScaledIdentity):
            rho2 = self.rho * self.rho
            tr_inv = (2.0 + (dim - 2) * (1.0 + rho2)) / (self.sigma2 * (1.0 - rho2)) \
                if dim > 1 else 1.0 / self.sigma2
            return other.sigma2 * tr_inv
        if isinstance(other, Ar1Toeplitz):
            # sum over the three inverse diagonals against other's Toeplitz bands
            r, s = self.rho, other.rho
            denom = self.sigma2 * (1.0 - r * r)
            if dim == 1:
                return other.sigma2 / self.sigma2
            diag = (2.0 + (dim - 2) * (1.0 + r * r)) * other.sigma2
            off = -2.0 * r * (dim - 1) * other.sigma2 * s
            return (diag + off) / denom
        return float(np.trace(self.solve(other.materialize(dim).T)))

    def scaled(self, factor: float) -> "Ar1Toeplitz":
        return Ar1Toeplitz(self.sigma2 * factor, self.rho)

    def is_diagonal(self, dim: int) -> bool:
        return dim == 1 or self.rho == 0.0


@dataclass(frozen=True, eq=False)
class Dense:
    """Explicit symmetric positive-definite covariance matrix.

    Definiteness is established at construction via the full spectrum;
    eigenvalues below ``RELATIVE_EIG_CUTOFF`` times the largest raise
    :class:`~stegcap.errors.NotPositiveDefinite` rather than being
    silently regularized.
    """

    matrix: np.ndarray
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise NotPositiveDefinite(f"matrix must be square, got shape {m.shape}")
        n = m.shape[0]
        if n > DENSE_DIM_LIMIT:
            raise NotPositiveDefinite(
                f"dense covariance limited to dim <= {DENSE_DIM_LIMIT}, got {n}; "
                "use ScaledIdentity or Ar1Toeplitz for larger models")
        scale = np.abs(m).max() if m.size else 0.0
        if not np.allclose(m, m.T, atol=1e-12 * max(scale, 1.0)):
            raise NotPositiveDefinite("matrix is not symmetric")
        m = 0.5 * (m + m.T)
        eig = np.linalg.eigvalsh(m)
        if eig[0] <= RELATIVE_EIG_CUTOFF * eig[-1] or eig[-1] <= 0.0:
            raise NotPositiveDefinite(
                f"matrix is numerically singular (eigenvalue range [{eig[0]:.3e}, "
                f"{eig[-1]:.3e}])")
        m.setflags(write=False)
        chol = np.linalg.cholesky(m)
        chol.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self, dim: int) -> None:
        if dim != self.dim:
            raise DimensionMismatch(
                f"model dim {dim} does not match covariance dim {self.dim}")

    def log_det(self, dim: int) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self._chol))))

    def materialize(self, dim: int) -> np.ndarray:
        return self.matrix

    def sample_transform(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float) @ self._chol.T

    def whiten(self, v: np.ndarray) -> np.ndarray:
        from scipy.linalg import solve_triangular
        v = np.asarray(v, dtype=float)
        return solve_triangular(self._chol, v.T, lower=True).T

    def solve(self, b: np.ndarray) -> np.ndarray:
        from scipy.linalg import cho_solve
        b = np.asarray(b, dtype=float)
        return cho_solve((self._chol, True), b.T).T

    def trace_solve_product(self, other: "CovarianceSpec", dim: int) -> float:
        return float(np.trace(self.solve(other.materialize(dim).T)))

    def scaled(self, factor: float) -> "Dense":
        return Dense(factor * self.matrix)

    def is_diagonal(self, dim: int) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return not np.any(off)


CovarianceSpec = ScaledIdentity | Ar1Toeplitz | Dense


@dataclass(frozen=True)
class QuantizationGrid:
    """Uniform scalar grid: points origin + k*step, bit depth for entropy."""

    step: float
    bits: int = 0
    origin: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.step) and self.step > 0.0):
            raise DomainError(f"grid step must be > 0, got {self.step}")
        if self.bits < 0:
            raise DomainError(f"bits must be >= 0, got {self.bits}")

    def quantize(self, x: np.ndarray) -> np.ndarray:
        """Round each entry to the nearest grid point, ties toward +inf."""
        x = np.asarray(x, dtype=float)
        return self.origin + np.floor((x - self.origin) / self.step + 0.5) * self.step

    def indices(self, x: np.ndarray) -> np.ndarray:
        """Integer grid coordinates of already-quantized values."""
        x = np.asarray(x, dtype=float)
        return np.floor((x - self.origin) / self.step + 0.5).astype(np.int64)


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """N(mean, covariance) on R^dim with a structured covariance."""

    dim: int
    mean: np.ndarray
    covariance: CovarianceSpec

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"dim must be >= 1, got {self.dim}")
        mean = np.array(self.mean, dtype=float, copy=True).reshape(-1)
        if mean.size == 1 and self.dim > 1:
            mean = np.full(self.dim, mean[0])
        if mean.shape != (self.dim,):
            raise DimensionMismatch(
                f"mean has length {mean.size}, expected {self.dim}")
        if not np.all(np.isfinite(mean)):
            raise DomainError("mean must be finite")
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        self.covariance.validate(self.dim)

    @classmethod
    def iid(cls, dim: int, sigma2: float = 1.0, mean: float = 0.0) -> "GaussianModel":
        return cls(dim, np.full(dim, float(mean)), ScaledIdentity(sigma2))

    @classmethod
    def ar1(cls, dim: int, sigma2: float, rho: float,
            mean: float = 0.0) -> "GaussianModel":
        return cls(dim, np.full(dim, float(mean)), Ar1Toeplitz(sigma2, rho))

    def log_det(self) -> float:
        return self.covariance.log_det(self.dim)


def _check_dims(p: GaussianModel, q: GaussianModel) -> int:
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimensions differ: {p.dim} vs {q.dim}")
    return p.dim


def _kl(numerator: GaussianModel, denominator: GaussianModel) -> float:
    """D(numerator || denominator) for multivariate Gaussians, in nats."""
    n = _check_dims(numerator, denominator)
    den_cov = denominator.covariance
    trace_term = den_cov.trace_solve_product(numerator.covariance, n)
    delta = denominator.mean - numerator.mean
    maha = float(delta @ den_cov.solve(delta))
    log_det_ratio = den_cov.log_det(n) - numerator.covariance.log_det(n)
    value = 0.5 * (trace_term + maha + log_det_ratio - n)
    # guard against sign noise when both models are (nearly) identical
    tol = 1e-12 * (1.0 + abs(trace_term) + abs(maha) + abs(log_det_ratio))
    if -tol < value < 0.0:
        return 0.0
    return value


def kl_gaussian(p_s: GaussianModel, p_c: GaussianModel) -> float:
    """D(P_s || P_c) in nats: expectation under p_s of the log ratio.

    Closed form 0.5*(tr(S_c^-1 S_s) + dmu' S_c^-1 dmu + ln|S_c|/|S_s| - n).
    """
    return _kl(p_s, p_c)


def kl_gaussian_reverse(p_c: GaussianModel, p_s: GaussianModel) -> float:
    """D(P_c || P_s) in nats — the same form with the roles swapped."""
    return _kl(p_c, p_s)


def entropy_quantized(p: GaussianModel, grid: QuantizationGrid) -> float:
    """Entropy of the b-bit quantized Gaussian in nats.

    Differential entropy (n/2)ln(2 pi e) + ln|Sigma|/2 plus the
    quantization term b*ln(2); the grid's bit depth is the only grid
    property entering the formula.
    """
    return 0.5 * (p.dim * _LN_2PI_E + p.log_det()) + grid.bits * _LN2


def sample(p: GaussianModel, grid: QuantizationGrid | None, count: int,
           seed: int) -> np.ndarray:
    """Draw ``count`` rows from N(mean, Sigma); round to grid if given.

    Deterministic: identical (model, grid, count, seed) give bit-identical
    output.
    """
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, p.dim))
    x = p.mean + p.covariance.sample_transform(z)
    if grid is not None:
        x = grid.quantize(x)
    return x


@dataclass(frozen=True)
class EmpiricalKl:
    """Histogram KL estimate together with what produced it."""

    value: float
    std_err: float
    occupied_bins: int
    smoothing: float
    count_p: int
    count_q: int

    def __float__(self) -> float:
        return self.value


def empirical_kl_quantized(samples_p: np.ndarray, samples_q: np.ndarray,
                           grid: QuantizationGrid) -> EmpiricalKl:
    """Plug-in KL between two on-grid sample sets, with additive smoothing.

    Bins are the union of occupied grid cells; each gets an additive
    pseudo-count of 1/(total samples), keeping the estimate finite even
    for disjoint supports.  Low-dimensional only (n <= 3): histograms of
    higher-dimensional quantized Gaussians are hopelessly sparse.
    """
    sp = np.asarray(samples_p, dtype=float)
    sq = np.asarray(samples_q, dtype=float)
    if sp.ndim == 1:
        sp = sp[:, None]
    if sq.ndim == 1:
        sq = sq[:, None]
    if sp.size == 0 or sq.size == 0:
        raise EmptySample("both sample sets must be nonempty")
    if sp.shape[1] != sq.shape[1]:
        raise DimensionMismatch(
            f"sample dimensions differ: {sp.shape[1]} vs {sq.shape[1]}")
    if sp.shape[1] > 3:
        raise DomainError(
            f"histogram KL supported for n <= 3, got n = {sp.shape[1]}")

    n_p, n_q = sp.shape[0], sq.shape[0]
    idx = np.vstack([grid.indices(sp), grid.indices(sq)])
    uniq, inverse = np.unique(idx, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    bins = uniq.shape[0]
    c_p = np.bincount(inverse[:n_p], minlength=bins).astype(float)
    c_q = np.bincount(inverse[n_p:], minlength=bins).astype(float)

    alpha = 1.0 / (n_p + n_q)
    p_hat = (c_p + alpha) / (n_p + alpha * bins)
    q_hat = (c_q + alpha) / (n_q + alpha * bins)
    log_ratio = np.log(p_hat) - np.log(q_hat)
    value = float(p_hat @ log_ratio)
    second = float(p_hat @ log_ratio ** 2)
    std_err = math.sqrt(max(second - value * value, 0.0) / n_p)
    return EmpiricalKl(value=value, std_err=std_err, occupied_bins=bins,
                       smoothing=alpha, count_p=n_p, count_q=n_q)
