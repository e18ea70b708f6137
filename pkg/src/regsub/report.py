"""StatReport and its CSV / JSON serializations.

Column names, types and provenance live in ``schemas/report_v1.json``;
every numeric column is tagged oracle-exact, formula or monte-carlo (or
``mixed`` when a per-row ``source`` column says which).  Floats are written
with ``repr`` so identical runs give identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import MalformedInputError, RegsubError

SCHEMA_VERSION = 1
FORMATS = ("csv", "json")


@lru_cache(maxsize=None)
def load_schema() -> dict:
    text = resources.files("regsub").joinpath("schemas/report_v1.json").read_text()
    return json.loads(text)


def column_specs(kind: str) -> list[dict]:
    schema = load_schema()["experiments"]
    if kind not in schema:
        raise MalformedInputError(f"unknown experiment kind {kind!r}")
    return schema[kind]["columns"]


def _clean(value):
    """Plain JSON-able scalar; NaN becomes None."""
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    x = float(value)
    return None if math.isnan(x) else x


@dataclass
class StatReport:
    kind: str
    rows: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        specs = {c["name"]: c for c in column_specs(self.kind)}
        for row in self.rows:
            unknown = set(row) - set(specs)
            if unknown:
                raise MalformedInputError(f"columns {sorted(unknown)} not in schema for {self.kind}")
        # missing and None mean the same thing; keep only filled cells
        cleaned = []
        for row in self.rows:
            vals = {k: _clean(v) for k, v in row.items()}
            cleaned.append({k: v for k, v in vals.items() if v is not None})
        self.rows = cleaned

    @property
    def columns(self) -> list[str]:
        """Required columns plus any optional one that some row fills."""
        present = set().union(*self.rows) if self.rows else set()
        return [c["name"] for c in column_specs(self.kind) if not c.get("optional") or c["name"] in present]

    def provenance(self) -> dict[str, str]:
        return {c["name"]: c["provenance"] for c in column_specs(self.kind) if c["name"] in self.columns}

    @property
    def passed(self) -> bool:
        return bool(self.metadata.get("passed", True))

    def column(self, name: str) -> list:
        return [row.get(name) for row in self.rows]

    def to_json(self) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "metadata": self.metadata,
            "columns": [{"name": c, "provenance": p} for c, p in self.provenance().items()],
            "rows": [{c: row.get(c) for c in self.columns} for row in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_csv_cell(row.get(c)) for c in self.columns])
        return buf.getvalue()


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_value(text: str, typ: str):
    if text == "":
        return None
    if typ == "bool":
        return text == "true"
    if typ == "int":
        return int(text)
    if typ == "float":
        return float(text)
    return text


def write_report(report: StatReport, fmt: str, path) -> Path:
    if fmt not in FORMATS:
        raise MalformedInputError(f"format must be one of {FORMATS}")
    path = Path(path)
    text = report.to_csv() if fmt == "csv" else report.to_json()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise RegsubError(f"cannot write report to {path}: {exc}") from exc
    return path


def read_report(path, fmt: str | None = None, kind: str | None = None) -> StatReport:
    """Inverse of write_report.  CSV carries no metadata, so ``kind`` is required for it."""
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    try:
        text = path.read_text()
    except OSError as exc:
        raise RegsubError(f"cannot read report {path}: {exc}") from exc
    if fmt == "json":
        doc = json.loads(text)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise MalformedInputError(f"unsupported schema version {doc.get('schema_version')}")
        return StatReport(doc["kind"], doc["rows"], doc["metadata"])
    if kind is None:
        raise MalformedInputError("reading CSV needs the experiment kind")
    types = {c["name"]: c["type"] for c in column_specs(kind)}
    reader = csv.reader(io.StringIO(text))
    header = next(reader, [])
    rows = []
    for rec in reader:
        rows.append({h: _csv_value(x, types[h]) for h, x in zip(header, rec)})
    return StatReport(kind, rows, {})
