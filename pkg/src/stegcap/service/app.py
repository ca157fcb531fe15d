"""FastAPI application exposing the package over HTTP.

Run with ``stegcap serve`` or ``uvicorn stegcap.service.app:app``.  Domain
errors surface as HTTP 400 with the error text; schema violations are
FastAPI's usual 422.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .._version import __version__
from ..errors import StegcapError
from . import handlers
from . import models as m

app = FastAPI(
    title="stegcap",
    version=__version__,
    description="Closed-form steganographic capacity limits for Gaussian "
                "cover models, with Monte Carlo validation experiments.",
)


@app.exception_handler(StegcapError)
async def _domain_error(_: Request, exc: StegcapError) -> JSONResponse:
    return JSONResponse(status_code=400,
                        content={"detail": str(exc),
                                 "error": type(exc).__name__})


@app.get("/v1/health", response_model=m.HealthResponse)
def health() -> m.HealthResponse:
    return m.health_response()


@app.post("/v1/capacity", response_model=m.CapacityResponse)
def capacity(req: m.CapacityRequest) -> m.CapacityResponse:
    return handlers.handle_capacity(req)


@app.post("/v1/codebook-params", response_model=m.CodebookParamsResponse)
def codebook_params(req: m.CodebookParamsRequest) -> m.CodebookParamsResponse:
    return handlers.handle_codebook_params(req)


@app.post("/v1/rate-vs-n", response_model=m.RateVsNResponse)
def rate_vs_n(req: m.RateVsNRequest) -> m.RateVsNResponse:
    return handlers.handle_rate_vs_n(req)


@app.post("/v1/payload-vs-pe", response_model=m.PayloadVsPeResponse)
def payload_vs_pe(req: m.PayloadVsPeRequest) -> m.PayloadVsPeResponse:
    return handlers.handle_payload_vs_pe(req)


@app.post("/v1/detect-sim", response_model=m.DetectionReportModel)
def detect_sim(req: m.DetectSimRequest) -> m.DetectionReportModel:
    return handlers.handle_detect_sim(req)


@app.post("/v1/decode-sim", response_model=m.DecodingReportModel)
def decode_sim(req: m.DecodeSimRequest) -> m.DecodingReportModel:
    return handlers.handle_decode_sim(req)


@app.post("/v1/gibbs-check", response_model=m.GibbsCheckResponse)
def gibbs_check(req: m.GibbsCheckRequest) -> m.GibbsCheckResponse:
    return handlers.handle_gibbs_check(req)
