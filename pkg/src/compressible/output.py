"""Delimited and JSON output with an embedded provenance header.

CSV files start with one ``# {...}`` line holding the tool name, version,
command and fully resolved configuration, then a column header and data
rows.  JSON files carry the same header under ``"meta"``.  Payloads never
contain timestamps, so identical configurations give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__

TOOL = "compressible"
SCHEMA_VERSION = 1


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    extra: dict = field(default_factory=dict)  # command-specific summary

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]


def make_meta(command, config, extra=None) -> dict:
    meta = {
        "tool": TOOL,
        "version": __version__,
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": config,
    }
    if extra:
        meta["result"] = extra
    return meta


def plain(v):
    """Convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(v, dict):
        return {str(k): plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [plain(x) for x in v.tolist()]
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)  # 'nan', 'inf'
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render(table: Table, meta: dict, fmt: str) -> str:
    if fmt == "json":
        doc = {"meta": plain(meta), "columns": table.columns, "rows": plain(table.records())}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    buf.write("# " + json.dumps(plain(meta), sort_keys=False, separators=(",", ":")) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _parse_cell(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def parse(text: str):
    """Inverse of :func:`render`; returns ``(meta, columns, rows)``."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        cols = doc["columns"]
        return doc["meta"], cols, [[r.get(c) for c in cols] for r in doc["rows"]]
    first, _, body = text.partition("\n")
    if not first.startswith("# "):
        raise ValueError("missing provenance header line")
    meta = json.loads(first[2:])
    reader = csv.reader(io.StringIO(body))
    cols = next(reader)
    rows = [[_parse_cell(c) for c in r] for r in reader]
    return meta, cols, rows


def values_match(a, b, rtol=1e-9, atol=1e-12) -> bool:
    if isinstance(a, str) and a in ("nan", "inf", "-inf"):
        a = float(a)
    if isinstance(b, str) and b in ("nan", "inf", "-inf"):
        b = float(b)
    if isinstance(a, bool) or isinstance(b, bool) or a is None or b is None:
        return a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        if math.isnan(a) or math.isnan(b):
            return math.isnan(a) and math.isnan(b)
        return math.isclose(a, b, rel_tol=rtol, abs_tol=atol)
    return a == b
