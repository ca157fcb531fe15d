"""Pure request-model -> response-model functions behind every endpoint.

The CLI calls these directly in its default in-process mode; the FastAPI
app wraps each in a route.  Core-package errors propagate as
:class:`~stegcap.errors.StegcapError` for the caller to translate (HTTP
400 at the service boundary, exit status 2 at the CLI).
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .. import gibbs as gb
from ..capacity import CapacityQuery, max_embedding_rate, optimal_codebook_params
from ..montecarlo import (
    DecodingExperiment,
    DetectionExperiment,
    run_decoding,
    run_detection,
)
from ..published import PublishedPoint
from ..tables import (
    flag_published_points,
    log_n_grid,
    payload_vs_pe_rows,
    rate_vs_n_rows,
)
from . import models as m

__all__ = [
    "handle_capacity",
    "handle_codebook_params",
    "handle_rate_vs_n",
    "handle_payload_vs_pe",
    "handle_detect_sim",
    "handle_decode_sim",
    "handle_gibbs_check",
]

_LN2 = math.log(2.0)

DEFAULT_PE_GRID = tuple(float(x) for x in np.linspace(0.05, 0.45, 41))


def handle_capacity(req: m.CapacityRequest) -> m.CapacityResponse:
    query = CapacityQuery(n=req.n, epsilon=req.epsilon, p_e_avg=req.pe,
                          units=req.units)
    return m.capacity_response(max_embedding_rate(query), req.units)


def handle_codebook_params(req: m.CodebookParamsRequest
                           ) -> m.CodebookParamsResponse:
    cover = req.cover.to_core()
    query = CapacityQuery(n=cover.dim, epsilon=req.epsilon, p_e_avg=req.pe,
                          units=req.units)
    message = optimal_codebook_params(cover, query)
    result = max_embedding_rate(query)
    scale = 1.0 / _LN2 if req.units == "bits" else 1.0
    return m.CodebookParamsResponse(
        n=cover.dim,
        embedding_factor=result.embedding_factor,
        units=req.units,
        rate_total=result.rate_total * scale,
        rate_per_element=result.rate_per_element * scale,
        message=m.GaussianModelSpec.from_core(message),
    )


def handle_rate_vs_n(req: m.RateVsNRequest) -> m.RateVsNResponse:
    n_values = (tuple(req.n_values) if req.n_values
                else log_n_grid(req.n_min, req.n_max, req.count))
    rows = rate_vs_n_rows(req.p_e_values, n_values)
    return m.RateVsNResponse(
        rows=[m.RateVsNRowModel(**dataclasses.asdict(r)) for r in rows])


def handle_payload_vs_pe(req: m.PayloadVsPeRequest) -> m.PayloadVsPeResponse:
    p_e_values = (tuple(req.p_e_values) if req.p_e_values is not None
                  else DEFAULT_PE_GRID)
    rows = payload_vs_pe_rows(req.n, p_e_values)
    points = [PublishedPoint(method=p.method, steganalyzer=p.steganalyzer,
                             payload_bpp=p.payload_bpp, p_e_avg=p.pe,
                             source=p.source)
              for p in req.points]
    flags = flag_published_points(points, req.n)
    flag_models = [
        m.FlaggedPointModel(
            point=m.PublishedPointModel(
                method=f.point.method, steganalyzer=f.point.steganalyzer,
                payload_bpp=f.point.payload_bpp, pe=f.point.p_e_avg,
                source=f.point.source),
            theory_bpp=f.theory_bpp,
            above_curve=f.above_curve)
        for f in flags
    ]
    return m.PayloadVsPeResponse(
        n=req.n,
        rows=[m.PayloadRowModel(**dataclasses.asdict(r)) for r in rows],
        flags=flag_models,
        flagged_count=sum(1 for f in flags if f.above_curve),
    )


def handle_detect_sim(req: m.DetectSimRequest) -> m.DetectionReportModel:
    report = run_detection(DetectionExperiment(
        cover=req.cover.to_core(),
        epsilon=req.epsilon,
        trials=req.trials,
        seed=req.seed,
        grid=req.grid.to_core() if req.grid else None,
    ))
    return m.DetectionReportModel(**dataclasses.asdict(report))


def handle_decode_sim(req: m.DecodeSimRequest) -> m.DecodingReportModel:
    report = run_decoding(DecodingExperiment(
        covariance=req.covariance.to_core(),
        epsilon=req.epsilon,
        rate_fraction=req.rate_fraction,
        n_list=tuple(req.n_list),
        trials=req.trials,
        seed=req.seed,
        mean_value=req.mean_value,
        grid=req.grid.to_core() if req.grid else None,
        codebook_size_override=req.codebook_size_override,
    ))
    data = dataclasses.asdict(report)
    data["entries"] = [m.DecodingEntryModel(**e) for e in data["entries"]]
    return m.DecodingReportModel(**data)


def handle_gibbs_check(req: m.GibbsCheckRequest) -> m.GibbsCheckResponse:
    spec, pot = gb.spec_from_dict(req.spec)
    model = gb.model_from_potentials(spec, pot)
    diff = gb.equivalence_report(spec, pot, model, tolerance=req.tolerance)
    return m.GibbsCheckResponse(
        sites=len(spec.sites),
        state_count=spec.state_count,
        max_abs_diff=diff,
        tolerance=req.tolerance,
        passed=diff <= req.tolerance,
    )
