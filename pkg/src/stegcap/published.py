"""Ingest of externally reported (payload, blind-error) operating points.

These points come from the steganography literature as digitized figure
data, so they live in user-editable CSV files with a fixed header
``method,steganalyzer,payload_bpp,pe,source`` — never hardcoded.  Parsing
errors carry the one-based line number and the offending column name.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .errors import SchemaError

__all__ = [
    "PublishedPoint",
    "PUBLISHED_HEADER",
    "read_published_csv",
    "write_published_csv",
]

PUBLISHED_HEADER = ("method", "steganalyzer", "payload_bpp", "pe", "source")


@dataclass(frozen=True)
class PublishedPoint:
    """One reported embedding-method / steganalyzer operating point."""

    method: str
    steganalyzer: str
    payload_bpp: float
    p_e_avg: float
    source: str

    def __post_init__(self):
        if not (math.isfinite(self.payload_bpp) and self.payload_bpp >= 0.0):
            raise SchemaError(
                f"payload_bpp must be finite and >= 0, got {self.payload_bpp}",
                column="payload_bpp")
        if not (math.isfinite(self.p_e_avg) and 0.0 <= self.p_e_avg <= 0.5):
            raise SchemaError(
                f"pe must lie in [0, 0.5], got {self.p_e_avg}", column="pe")


def _parse_field(raw: str, name: str, line: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise SchemaError(f"cannot parse {raw!r} as a number",
                          line=line, column=name) from None


def read_published_csv(path) -> list:
    """Parse a published-points CSV; header row is mandatory."""
    points = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(
                f"{path}: empty file, expected header "
                f"{','.join(PUBLISHED_HEADER)}", line=1) from None
        if tuple(header) != PUBLISHED_HEADER:
            raise SchemaError(
                f"{path}: header {','.join(header)!r} does not match "
                f"required {','.join(PUBLISHED_HEADER)!r}", line=1)
        for i, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(PUBLISHED_HEADER):
                raise SchemaError(
                    f"{path}: expected {len(PUBLISHED_HEADER)} fields, "
                    f"got {len(rec)}", line=i)
            payload = _parse_field(rec[2], "payload_bpp", i)
            pe = _parse_field(rec[3], "pe", i)
            if not (math.isfinite(payload) and payload >= 0.0):
                raise SchemaError(
                    f"{path}: payload_bpp must be finite and >= 0, "
                    f"got {payload}", line=i, column="payload_bpp")
            if not (math.isfinite(pe) and 0.0 <= pe <= 0.5):
                raise SchemaError(f"{path}: pe must lie in [0, 0.5], got {pe}",
                                  line=i, column="pe")
            points.append(PublishedPoint(
                method=rec[0], steganalyzer=rec[1],
                payload_bpp=payload, p_e_avg=pe, source=rec[4]))
    return points


def write_published_csv(path, points) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PUBLISHED_HEADER)
        for p in points:
            writer.writerow((p.method, p.steganalyzer, repr(p.payload_bpp),
                             repr(p.p_e_avg), p.source))
