"""Run results and their on-disk formats."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, is_dataclass
from enum import Enum
from typing import Any, Optional

SCHEMA_VERSION = "1.0"

TIMESERIES_COLUMNS = (
    "t", "phi", "velocity_diameter", "participation_ratio",
    "mean_degree_fraction", "phase", "peeled_count",
)
SWEEP_COLUMNS = ("param", "value", "seed", "final_phase", "mean_phi_window")
EVENT_COLUMNS = ("t_seconds", "event", "edge_id", "vehicle_id", "detail")


@dataclass
class RunResult:
    records: list = field(default_factory=list)
    final_state: Any = None
    summary: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config": self.config,
            "summary": self.summary,
            "records": [plain(r) for r in self.records],
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


def plain(obj):
    """Recursively convert dataclasses, enums and numpy scalars to JSON-ready values."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return {k: plain(v) for k, v in asdict(obj).items()}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(plain(v) for v in obj)
    if hasattr(obj, "tolist"):
        return obj.tolist()
    return obj


def dumps(obj) -> str:
    return json.dumps(plain(obj), indent=2, sort_keys=True) + "\n"


def fmt(value) -> str:
    """Stable text form for CSV cells; floats use repr for exact round trip."""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_csv(path, columns, rows, header_comment: Optional[str] = None) -> None:
    """Write rows (mappings) to ``path``.

    ``header_comment`` lines are emitted first, each prefixed by ``# `` so
    the resolved config travels with the data.
    """
    buf = io.StringIO()
    if header_comment:
        for line in header_comment.splitlines():
            buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path) -> list:
    """Read a CSV written by :func:`write_csv`, skipping ``#`` header lines."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
