"""Run configuration and the JSON/CSV reports written by the command line."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

SCHEMA = "qwcat.report/1"
TOOL_VERSION = "0.1.0"


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    grid: int = 4096
    window: int | None = None
    t: int = 100
    seed: int = 0
    out: str | None = None
    format: str = "json"
    component: int = 0
    state: str | None = None
    kgrid: str | None = None
    build: bool = False
    verify: bool = False
    states: int = 20

    def check(self) -> None:
        g = self.grid
        if g < 512 or g & (g - 1):
            raise ValueError(f"--grid must be a power of two >= 512, got {g}")
        if self.t < 0:
            raise ValueError("--t must be non-negative")
        if self.window is not None and self.window < 8:
            raise ValueError("--window must be at least 8 sites")
        if self.format not in ("json", "csv"):
            raise ValueError("--format is json or csv")


def _clean(x):
    """Make a result JSON-ready: complex -> [re, im], numpy scalars and arrays -> Python."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "tolist"):
        return _clean(x.tolist())
    if isinstance(x, complex):
        return [_clean(x.real), _clean(x.imag)]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, bool) or x is None or isinstance(x, (int, float, str)):
        return x
    raise TypeError(f"cannot serialize {type(x).__name__}")


def build_report(config: RunConfig, results: dict, provenance: dict, timestamp: str | None = None) -> dict:
    return {
        "schema": SCHEMA,
        "tool": {"name": "qwcat", "version": TOOL_VERSION},
        "config": _clean(asdict(config)),
        "results": _clean(results),
        "provenance": _clean(provenance),
        "timestamp": timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def emit_report(report: dict) -> str:
    """Deterministic JSON text: sorted keys, fixed separators."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def parse_report(text: str) -> dict:
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unknown report schema {doc.get('schema')!r}")
    return doc


def rows_to_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for r in rows:
        wr.writerow([repr(float(v)) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def write_output(text: str, out: str | None) -> None:
    if out is None:
        print(text, end="")
    else:
        Path(out).write_text(text)
