"""Request/response schemas for the HTTP service (and the in-process CLI).

Every schema round-trips through JSON without losing float precision, so
a client talking to a remote server writes byte-identical artifacts to one
calling the handlers in-process.
"""

from __future__ import annotations

import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field

from .. import gaussmodel as gm
from .._version import __version__

_LN2 = math.log(2.0)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ----------------------------------------------------------- model specs


class ScaledIdentityModel(_Strict):
    kind: Literal["scaled_identity"] = "scaled_identity"
    sigma2: float = 1.0

    def to_core(self) -> gm.ScaledIdentity:
        return gm.ScaledIdentity(self.sigma2)


class Ar1Model(_Strict):
    kind: Literal["ar1"] = "ar1"
    sigma2: float = 1.0
    rho: float

    def to_core(self) -> gm.Ar1Toeplitz:
        return gm.Ar1Toeplitz(self.sigma2, self.rho)


class DenseModel(_Strict):
    kind: Literal["dense"] = "dense"
    matrix: list[list[float]]

    def to_core(self) -> gm.Dense:
        return gm.Dense(self.matrix)


CovarianceModel = Annotated[
    Union[ScaledIdentityModel, Ar1Model, DenseModel],
    Field(discriminator="kind"),
]


def covariance_from_core(cov: gm.CovarianceSpec):
    if isinstance(cov, gm.ScaledIdentity):
        return ScaledIdentityModel(sigma2=cov.sigma2)
    if isinstance(cov, gm.Ar1Toeplitz):
        return Ar1Model(sigma2=cov.sigma2, rho=cov.rho)
    return DenseModel(matrix=cov.matrix.tolist())


class GridModel(_Strict):
    step: float
    bits: int = 0
    origin: float = 0.0

    def to_core(self) -> gm.QuantizationGrid:
        return gm.QuantizationGrid(step=self.step, bits=self.bits,
                                   origin=self.origin)


class GaussianModelSpec(_Strict):
    dim: int
    mean: float | list[float] = 0.0
    covariance: CovarianceModel = Field(
        default_factory=ScaledIdentityModel)

    def to_core(self) -> gm.GaussianModel:
        return gm.GaussianModel(self.dim, self.mean, self.covariance.to_core())

    @classmethod
    def from_core(cls, model: gm.GaussianModel) -> "GaussianModelSpec":
        return cls(dim=model.dim, mean=list(model.mean),
                   covariance=covariance_from_core(model.covariance))


# ------------------------------------------------------------- capacity


class CapacityRequest(_Strict):
    n: int
    epsilon: float | None = None
    pe: float | None = None
    units: Literal["nats", "bits"] = "nats"


class DetectionBoundsModel(_Strict):
    kl_budget: float  # always nats
    p_d_max: float
    p_e_min: float
    p_e_avg_min: float
    clamped: bool


class CapacityResponse(_Strict):
    n: int
    mode: str
    epsilon_effective: float
    gamma: float
    embedding_factor: float
    units: str
    rate_total: float
    rate_per_element: float
    srl_bound: float
    achievable_rate: float
    detection: DetectionBoundsModel
    assumption: str


def _in_units(nats: float, units: str) -> float:
    return nats / _LN2 if units == "bits" else nats


def capacity_response(result, units: str) -> CapacityResponse:
    return CapacityResponse(
        n=result.n,
        mode=result.mode,
        epsilon_effective=result.epsilon_effective,
        gamma=result.gamma,
        embedding_factor=result.embedding_factor,
        units=units,
        rate_total=_in_units(result.rate_total, units),
        rate_per_element=_in_units(result.rate_per_element, units),
        srl_bound=_in_units(result.srl_bound, units),
        achievable_rate=_in_units(result.achievable_rate, units),
        detection=DetectionBoundsModel(
            kl_budget=result.detection.kl_budget,
            p_d_max=result.detection.p_d_max,
            p_e_min=result.detection.p_e_min,
            p_e_avg_min=result.detection.p_e_avg_min,
            clamped=result.detection.clamped,
        ),
        assumption=result.assumption,
    )


class CodebookParamsRequest(_Strict):
    cover: GaussianModelSpec
    epsilon: float | None = None
    pe: float | None = None
    units: Literal["nats", "bits"] = "nats"


class CodebookParamsResponse(_Strict):
    n: int
    embedding_factor: float
    units: str
    rate_total: float
    rate_per_element: float
    message: GaussianModelSpec


# --------------------------------------------------------------- curves


class RateVsNRequest(_Strict):
    p_e_values: list[float] = Field(min_length=1)
    n_min: int = 100
    n_max: int = 10 ** 6
    count: int = 81
    n_values: list[int] | None = None


class RateVsNRowModel(_Strict):
    n: int
    p_e: float
    a_lower: float
    rate_nats: float
    rate_bits: float
    srl_bound: float


class RateVsNResponse(_Strict):
    rows: list[RateVsNRowModel]


class PublishedPointModel(_Strict):
    method: str
    steganalyzer: str
    payload_bpp: float = Field(ge=0.0)
    pe: float = Field(ge=0.0, le=0.5)
    source: str


class PayloadVsPeRequest(_Strict):
    n: int = 2 ** 18
    p_e_values: list[float] | None = None
    points: list[PublishedPointModel] = Field(default_factory=list)


class PayloadRowModel(_Strict):
    p_e: float
    n: int
    a_lower: float
    payload_bpp: float


class FlaggedPointModel(_Strict):
    point: PublishedPointModel
    theory_bpp: float
    above_curve: bool


class PayloadVsPeResponse(_Strict):
    n: int
    rows: list[PayloadRowModel]
    flags: list[FlaggedPointModel]
    flagged_count: int


# ---------------------------------------------------------- experiments


class DetectSimRequest(_Strict):
    cover: GaussianModelSpec
    epsilon: float
    trials: int
    seed: int
    grid: GridModel | None = None


class DetectionReportModel(_Strict):
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
    tool_version: str


class DecodeSimRequest(_Strict):
    covariance: CovarianceModel = Field(default_factory=ScaledIdentityModel)
    epsilon: float = 0.5
    rate_fraction: float
    n_list: list[int] = Field(min_length=1)
    trials: int
    seed: int
    mean_value: float = 0.0
    grid: GridModel | None = None
    codebook_size_override: int | None = None


class DecodingEntryModel(_Strict):
    n: int
    embedding_factor: float
    capacity_nats: float
    codebook_size: int
    rate_nats: float
    trials: int
    errors: int
    p_b_hat: float
    std_err: float


class DecodingReportModel(_Strict):
    epsilon: float
    rate_fraction: float
    covariance: str
    mean_value: float
    quantized: bool
    seed: int
    decoder: str
    entries: list[DecodingEntryModel]
    monotone_trend: bool
    tool_version: str


class GibbsCheckRequest(_Strict):
    spec: dict
    tolerance: float = 1e-12


class GibbsCheckResponse(_Strict):
    sites: int
    state_count: int
    max_abs_diff: float
    tolerance: float
    passed: bool


class HealthResponse(_Strict):
    status: str
    version: str


def health_response() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)
