"""Plot-ready tables: rate vs cover size and payload vs error rate.

Rows are plain frozen dataclasses so written CSV files round-trip to the
exact in-memory table (floats are serialized with ``repr`` and parsed back
with ``float``, which is lossless for IEEE doubles).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .capacity import CapacityQuery, max_embedding_rate
from .errors import DomainError, SchemaError
from .published import PublishedPoint
from .specfun import DEFAULT_SOLVER, SolverConfig

__all__ = [
    "RateVsNRow",
    "PayloadTheoryRow",
    "FlaggedPoint",
    "ComparisonRow",
    "log_n_grid",
    "rate_vs_n_rows",
    "payload_vs_pe_rows",
    "flag_published_points",
    "write_rate_vs_n_csv",
    "read_rate_vs_n_csv",
    "write_payload_vs_pe_csv",
    "read_payload_vs_pe_csv",
    "write_comparison_csv",
    "read_comparison_csv",
]

_LN2 = math.log(2.0)

RATE_VS_N_HEADER = ("n", "p_e", "a_lower", "rate_nats", "rate_bits",
                    "srl_bound")
PAYLOAD_HEADER = ("p_e", "n", "a_lower", "payload_bpp")


@dataclass(frozen=True)
class RateVsNRow:
    """One grid point of the capacity-lower-bound curve."""

    n: int
    p_e: float
    a_lower: float
    rate_nats: float
    rate_bits: float
    srl_bound: float


@dataclass(frozen=True)
class PayloadTheoryRow:
    """Theoretical per-element payload (bits) at one blind-error level."""

    p_e: float
    n: int
    a_lower: float
    payload_bpp: float


@dataclass(frozen=True)
class FlaggedPoint:
    """A published operating point compared against the theory curve."""

    point: PublishedPoint
    theory_bpp: float
    above_curve: bool


@dataclass(frozen=True)
class ComparisonRow:
    """One line of the combined theory-curve / published-points file.

    ``series`` is ``"theory"`` (method, steganalyzer, source empty and
    ``above_curve`` None) or ``"published"``.
    """

    series: str
    method: str
    steganalyzer: str
    p_e: float
    payload_bpp: float
    theory_bpp: float
    above_curve: bool | None
    source: str


def log_n_grid(n_min: int = 100, n_max: int = 10 ** 6,
               count: int = 81) -> tuple:
    """Strictly increasing integer grid, log-spaced between the endpoints."""
    if n_min < 1 or n_max < n_min:
        raise DomainError(
            f"need 1 <= n_min <= n_max, got [{n_min}, {n_max}]")
    if count < 2 and n_min != n_max:
        raise DomainError(f"count must be >= 2, got {count}")
    grid = np.unique(np.round(np.geomspace(n_min, n_max, count)).astype(np.int64))
    return tuple(int(n) for n in grid)


def rate_vs_n_rows(p_e_values, n_values,
                   config: SolverConfig = DEFAULT_SOLVER) -> list:
    """Capacity lower bound against cover size, one row per (P_E, n).

    Rows are emitted grouped by P_E in the given order, each group sweeping
    the n grid in the given order.
    """
    rows = []
    for p_e in p_e_values:
        for n in n_values:
            result = max_embedding_rate(
                CapacityQuery(n=int(n), p_e_avg=float(p_e)), config)
            rows.append(RateVsNRow(
                n=int(n),
                p_e=float(p_e),
                a_lower=result.embedding_factor,
                rate_nats=result.rate_total,
                rate_bits=result.rate_total / _LN2,
                srl_bound=result.srl_bound,
            ))
    return rows


def payload_vs_pe_rows(n: int, p_e_values,
                       config: SolverConfig = DEFAULT_SOLVER) -> list:
    """Theoretical payload (bits per cover element) across P_E levels."""
    rows = []
    for p_e in p_e_values:
        result = max_embedding_rate(
            CapacityQuery(n=int(n), p_e_avg=float(p_e)), config)
        rows.append(PayloadTheoryRow(
            p_e=float(p_e),
            n=int(n),
            a_lower=result.embedding_factor,
            payload_bpp=result.rate_total / (int(n) * _LN2),
        ))
    return rows


def flag_published_points(points, n: int,
                          config: SolverConfig = DEFAULT_SOLVER) -> list:
    """Evaluate the theory curve at each published point's error rate.

    The comparison is exact (no interpolation): the theoretical payload is
    recomputed at the point's own P_E.  ``above_curve`` marks payloads
    exceeding the theoretical limit at that error level.
    """
    flags = []
    for point in points:
        result = max_embedding_rate(
            CapacityQuery(n=int(n), p_e_avg=point.p_e_avg), config)
        theory = result.rate_total / (int(n) * _LN2)
        flags.append(FlaggedPoint(
            point=point,
            theory_bpp=theory,
            above_curve=point.payload_bpp > theory,
        ))
    return flags


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read_csv(path, header):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header "
                              f"{','.join(header)}", line=1) from None
        if tuple(got) != tuple(header):
            raise SchemaError(
                f"{path}: header {','.join(got)} does not match expected "
                f"{','.join(header)}", line=1)
        return list(reader)


def write_rate_vs_n_csv(path, rows) -> None:
    _write_csv(path, RATE_VS_N_HEADER,
               ((r.n, repr(r.p_e), repr(r.a_lower), repr(r.rate_nats),
                 repr(r.rate_bits), repr(r.srl_bound)) for r in rows))


def read_rate_vs_n_csv(path) -> list:
    rows = []
    for i, rec in enumerate(_read_csv(path, RATE_VS_N_HEADER), start=2):
        if len(rec) != len(RATE_VS_N_HEADER):
            raise SchemaError(f"{path}: expected {len(RATE_VS_N_HEADER)} "
                              f"fields, got {len(rec)}", line=i)
        try:
            rows.append(RateVsNRow(int(rec[0]), float(rec[1]), float(rec[2]),
                                   float(rec[3]), float(rec[4]), float(rec[5])))
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}", line=i) from None
    return rows


def write_payload_vs_pe_csv(path, rows) -> None:
    _write_csv(path, PAYLOAD_HEADER,
               ((repr(r.p_e), r.n, repr(r.a_lower), repr(r.payload_bpp))
                for r in rows))


def read_payload_vs_pe_csv(path) -> list:
    rows = []
    for i, rec in enumerate(_read_csv(path, PAYLOAD_HEADER), start=2):
        if len(rec) != len(PAYLOAD_HEADER):
            raise SchemaError(f"{path}: expected {len(PAYLOAD_HEADER)} "
                              f"fields, got {len(rec)}", line=i)
        try:
            rows.append(PayloadTheoryRow(float(rec[0]), int(rec[1]),
                                         float(rec[2]), float(rec[3])))
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}", line=i) from None
    return rows


COMPARISON_HEADER = ("series", "method", "steganalyzer", "p_e",
                     "payload_bpp", "theory_bpp", "above_curve", "source")


def write_comparison_csv(path, rows) -> None:
    def flag(v):
        return "" if v is None else ("true" if v else "false")

    _write_csv(path, COMPARISON_HEADER,
               ((r.series, r.method, r.steganalyzer, repr(r.p_e),
                 repr(r.payload_bpp), repr(r.theory_bpp),
                 flag(r.above_curve), r.source) for r in rows))


def read_comparison_csv(path) -> list:
    rows = []
    for i, rec in enumerate(_read_csv(path, COMPARISON_HEADER), start=2):
        if len(rec) != len(COMPARISON_HEADER):
            raise SchemaError(f"{path}: expected {len(COMPARISON_HEADER)} "
                              f"fields, got {len(rec)}", line=i)
        if rec[6] not in ("", "true", "false"):
            raise SchemaError(f"{path}: above_curve must be empty, 'true' "
                              f"or 'false', got {rec[6]!r}",
                              line=i, column="above_curve")
        try:
            rows.append(ComparisonRow(
                series=rec[0], method=rec[1], steganalyzer=rec[2],
                p_e=float(rec[3]), payload_bpp=float(rec[4]),
                theory_bpp=float(rec[5]),
                above_curve=None if rec[6] == "" else rec[6] == "true",
                source=rec[7]))
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}", line=i) from None
    return rows
