"""Flat-file formats: point clouds as CSV, results and reports as JSON.

Output is deterministic. Floats are written with 17 significant digits so a
write/read cycle reproduces every value bit for bit, JSON keys are sorted and
nothing time-dependent is recorded. A CSV may start with ``#`` comment lines
(used for the ``config_echo`` block); readers skip them.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from .errors import DimensionMismatch, ParseError
from .model import LABELS, Dataset, EstimationResult

ECHO_PREFIX = "# config_echo: "

# diagnostics that are per-point or matrix-valued and so stay out of JSON
_SKIP_DIAGNOSTICS = {"filter_mask", "covariances"}


def fmt_float(v) -> str:
    v = float(v)
    if not math.isfinite(v):
        return "" if math.isnan(v) else repr(v)
    return format(v, ".17g")


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy values; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj: Any) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from exc


def _echo_line(echo: Optional[dict]) -> str:
    if echo is None:
        return ""
    return ECHO_PREFIX + json.dumps(to_jsonable(echo), sort_keys=True, allow_nan=False) + "\n"


def write_dataset(path, ds: Dataset, echo: Optional[dict] = None) -> None:
    n = ds.dim
    header = [f"x{j + 1}" for j in range(n)]
    if ds.labels is not None:
        header.append("label")
    lines = [_echo_line(echo), ",".join(header) + "\n"]
    for i, row in enumerate(ds.points):
        fields = [format(float(v), ".17g") for v in row]
        if ds.labels is not None:
            fields.append(str(ds.labels[i]))
        lines.append(",".join(fields) + "\n")
    Path(path).write_text("".join(lines))


def read_dataset(path) -> Dataset:
    """Parse a dataset CSV; line numbers in errors are 1-based physical lines."""
    text = Path(path).read_text()
    header = None
    rows, labels = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if header is None:
            header = fields
            has_label = header[-1] == "label"
            names = header[:-1] if has_label else header
            if not names or names != [f"x{j + 1}" for j in range(len(names))]:
                raise ParseError("header must be x1,...,xn with an optional trailing label", lineno)
            continue
        if len(fields) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(fields)}", lineno)
        coords = fields[:-1] if has_label else fields
        try:
            values = [float(f) for f in coords]
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from exc
        rows.append(values)
        if has_label:
            if fields[-1] not in LABELS:
                raise ParseError(f"unknown label {fields[-1]!r}", lineno)
            labels.append(fields[-1])
    if header is None:
        raise ParseError("missing header", 1)
    if not rows:
        raise DimensionMismatch("dataset has no rows")
    pts = np.array(rows, dtype=float)
    return Dataset(pts, np.array(labels, dtype=object) if has_label else None)


def scalar_diagnostics(diag: dict) -> dict:
    """Keep the JSON-friendly part of a diagnostics dict."""
    out = {}
    for k, v in diag.items():
        if k in _SKIP_DIAGNOSTICS:
            continue
        if isinstance(v, np.ndarray):
            if v.ndim > 1:
                continue
            v = v.tolist()
        out[k] = v
    return out


def result_dict(res: EstimationResult, echo: dict) -> dict:
    return {
        "mu1_hat": res.mu1_hat,
        "mu2_hat": res.mu2_hat,
        "sigma_hat": None if res.sigma_hat is None else res.sigma_hat,
        "diagnostics": scalar_diagnostics(res.diagnostics),
        "config_echo": echo,
    }


def write_result(path, obj, echo: Optional[dict] = None) -> None:
    """Write an :class:`EstimationResult` or any object with ``to_dict``."""
    if isinstance(obj, EstimationResult):
        payload = result_dict(obj, echo or {})
    elif hasattr(obj, "to_dict"):
        payload = obj.to_dict()
        if echo is not None:
            payload["config_echo"] = echo
    else:
        payload = dict(obj)
    write_json(path, payload)


def write_table(path, columns: list[str], rows: Iterable[dict], echo: Optional[dict] = None) -> None:
    """CSV with a fixed column order; floats at 17 significant digits, NaN as empty."""
    with open(path, "w", newline="") as fh:
        fh.write(_echo_line(echo))
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt_float(r[c]) if isinstance(r[c], (float, np.floating)) else r[c] for c in columns])


def read_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
