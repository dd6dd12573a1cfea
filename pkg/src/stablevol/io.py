"""CSV and plot-data output with exact float round-tripping."""

from __future__ import annotations

import csv
import math
import os

import numpy as np

__all__ = ["emit_csv", "format_value", "write_text"]


def format_value(v) -> str:
    """Shortest text that parses back to the identical value."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def emit_csv(records, schema, path) -> None:
    """Write ``records`` (sequences or mappings) under header ``schema`` as UTF-8 CSV with LF endings."""
    schema = list(schema)
    if not schema:
        raise ValueError("CSV schema must name at least one column")
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(schema)
            for rec in records:
                if isinstance(rec, dict):
                    rec = [rec[c] for c in schema]
                elif len(rec) != len(schema):
                    raise ValueError(f"record {rec!r} does not match schema {schema}")
                w.writerow([format_value(v) for v in rec])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {os.fspath(path)}: {exc.strerror or exc}") from exc


def write_text(text: str, path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {os.fspath(path)}: {exc.strerror or exc}") from exc


def loglog_rows(deltas, errors, target_slope: float):
    """Rows of log10(delta), log10(error) and a reference line of the target slope through the last point."""
    d0, e0 = deltas[-1], errors[-1]
    rows = []
    for d, e in zip(deltas, errors):
        ref = e0 * (d / d0) ** target_slope if e0 > 0 else math.nan
        rows.append((
            math.log10(d),
            math.log10(e) if e > 0 else math.nan,
            math.log10(ref) if ref > 0 else math.nan,
        ))
    return rows
