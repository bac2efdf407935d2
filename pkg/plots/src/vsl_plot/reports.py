"""Readers for the lab's on-disk artifacts.

These deliberately re-implement the two documented formats rather than
importing the simulation package: report JSON (schema version 1) and the
VSF1 binary field format (24-byte header: magic "VSF1", u32 n, u32 reserved,
4 pad bytes, f64 L; then n*n little-endian f64 values, row-major, y-outer).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

SUPPORTED_SCHEMA = 1

_VSF_HEADER = struct.Struct("<4sII4xd")


class SchemaMismatchError(ValueError):
    pass


def load_report(path: str | Path) -> dict:
    """Load a stability report, failing loudly on schema mismatch."""
    with open(path) as fh:
        report = json.load(fh)
    version = report.get("schema_version")
    if version != SUPPORTED_SCHEMA:
        raise SchemaMismatchError(
            f"{path}: report schema version {version!r}, supported {SUPPORTED_SCHEMA}"
        )
    return report


def read_field_vsf(path: str | Path) -> tuple[np.ndarray, float]:
    """Read a VSF1 snapshot; returns (values[y, x], L)."""
    with open(path, "rb") as fh:
        header = fh.read(_VSF_HEADER.size)
        if len(header) != _VSF_HEADER.size:
            raise ValueError(f"{path}: truncated VSF1 header")
        magic, n, _reserved, L = _VSF_HEADER.unpack(header)
        if magic != b"VSF1":
            raise ValueError(f"{path}: bad magic {magic!r}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * n:
        raise ValueError(f"{path}: expected {n * n} values, found {data.size}")
    return data.reshape(n, n), float(L)


def deviation_series(report: dict) -> dict:
    """Extract t plus every deviation series from a report's records."""
    records = report["records"]
    t = np.array([rec["t"] for rec in records])
    series = {
        "l1": np.array([rec["l1_dev"] for rec in records]),
        "l2": np.array([rec["l2_dev"] for rec in records]),
        "j": np.array([rec["j_dev"] for rec in records]),
    }
    p_keys = sorted(records[0]["jp_dev"]) if records else []
    for p in p_keys:
        series[f"jp[{p}]"] = np.array([rec["jp_dev"][p] for rec in records])
    return {"t": t, "series": series, "p_keys": p_keys}
