"""Deterministic CSV / JSON report emission for the command-line front end.

Reports are long-format: one row per (sample, feature set, class, kind).
CSV files start with ``# key=value`` header lines carrying the seed and the
model-call total; JSON reports carry the same metadata under ``meta``. No
timestamps or other run-dependent values are written, so a repeated run with
the same seed produces a byte-identical report.
"""

from __future__ import annotations

import csv
import io
import json
import sys

__all__ = ["FIELDS", "render_report", "write_report"]

FIELDS = (
    "sample", "set", "kind", "class", "estimate", "ci_low", "ci_high",
    "n_imputations", "model_calls",
)


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_report(meta: dict, rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"meta": meta, "rows": rows}, indent=2,
                          sort_keys=False) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format: {fmt!r}")
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}={_format_value(value)}\n")
    fields = [f for f in FIELDS if any(f in row for row in rows)] or list(FIELDS)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_format_value(row.get(f)) for f in fields])
    return buf.getvalue()


def write_report(meta: dict, rows: list[dict], fmt: str, out: str | None) -> None:
    text = render_report(meta, rows, fmt)
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
