"""Deterministic artifact writers: CSV with 17 significant digits and JSON reports."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

REPORT_SCHEMA_VERSION = "1.0"


def fmt(value) -> str:
    """Render a number for CSV output (integers verbatim, floats with ``%.17g``)."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return "%.17g" % float(value)


def write_csv(path, columns, rows):
    """Write a header and rows; every cell goes through ``fmt``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(columns))
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path.name


def jsonable(obj):
    """Convert numpy scalars/arrays and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_report(path, report: dict):
    """Write ``report`` as sorted, indented JSON (no timestamps, stable bytes)."""
    body = dict(report)
    body["schema_version"] = REPORT_SCHEMA_VERSION
    text = json.dumps(jsonable(body), sort_keys=True, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n")
