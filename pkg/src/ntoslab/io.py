"""Schema-stable CSV/JSON tables.

Floats are written with 17 significant digits so a table read back is
bit-identical to the one written.  CSV files start with ``# key: value``
metadata lines (values JSON-encoded, keys sorted), then a header row.  JSON
files hold ``schema_id``, ``metadata``, ``column_types`` and one array per
column.  Non-finite floats are written as the strings "nan", "inf", "-inf".
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__

COLUMN_KINDS = ("int", "float", "str")


@dataclass
class TableArtifact:
    schema_id: str
    columns: list  # [(name, kind)], kind in COLUMN_KINDS
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def names(self):
        return [name for name, _ in self.columns]

    def column(self, name):
        k = self.names.index(name)
        return [row[k] for row in self.rows]

    def add_row(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, schema {self.schema_id} has {len(self.columns)}")
        self.rows.append(tuple(values))


def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _cell(value, kind):
    if kind == "float":
        return fmt_float(value)
    if kind == "int":
        return str(int(value))
    text = str(value)
    if "\n" in text or "\r" in text:
        raise ValueError(f"string cell {text!r} contains a line break")
    return text


def _parse(text, kind):
    if kind == "float":
        return float(text)
    if kind == "int":
        return int(text)
    return text


def _json_value(v) -> str:
    """Deterministic JSON text with 17-digit floats."""
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt_float(v) if math.isfinite(v) else json.dumps(fmt_float(v))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        items = (f"{json.dumps(str(k))}: {_json_value(v[k])}" for k in sorted(v))
        return "{" + ", ".join(items) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if hasattr(v, "item"):  # numpy scalar
        return _json_value(v.item())
    raise TypeError(f"cannot serialize {type(v).__name__}")


def full_metadata(artifact: TableArtifact) -> dict:
    meta = {"tool": "ntoslab", "version": __version__}
    meta.update(artifact.metadata)
    return meta


def to_csv_text(artifact: TableArtifact) -> str:
    lines = [f"# schema_id: {json.dumps(artifact.schema_id)}"]
    meta = full_metadata(artifact)
    lines += [f"# {key}: {_json_value(meta[key])}" for key in sorted(meta)]
    lines.append(f"# column_types: {_json_value([kind for _, kind in artifact.columns])}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(artifact.names)
    for row in artifact.rows:
        writer.writerow([_cell(v, kind) for v, (_, kind) in zip(row, artifact.columns)])
    return "\n".join(lines) + "\n" + buf.getvalue()


def to_json_text(artifact: TableArtifact) -> str:
    cols = {}
    for k, (name, kind) in enumerate(artifact.columns):
        vals = [row[k] for row in artifact.rows]
        if kind == "float":
            vals = [float(v) for v in vals]
        elif kind == "int":
            vals = [int(v) for v in vals]
        else:
            vals = [str(v) for v in vals]
        cols[name] = vals
    body = [
        f'"schema_id": {json.dumps(artifact.schema_id)}',
        f'"metadata": {_json_value(full_metadata(artifact))}',
        f'"column_order": {_json_value(artifact.names)}',
        f'"column_types": {_json_value({n: kind for n, kind in artifact.columns})}',
        '"columns": {' + ", ".join(f"{json.dumps(n)}: {_json_value(cols[n])}" for n in artifact.names) + "}",
    ]
    return "{\n  " + ",\n  ".join(body) + "\n}\n"


def write_table(artifact: TableArtifact, fmt: str, path) -> None:
    if fmt == "csv":
        text = to_csv_text(artifact)
    elif fmt == "json":
        text = to_json_text(artifact)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _strip_defaults(meta):
    meta = dict(meta)
    for key in ("tool", "version"):
        meta.pop(key, None)
    return meta


def read_table(path) -> TableArtifact:
    """Read a table written by :func:`write_table` (format from the content)."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        names = data["column_order"]
        kinds = data["column_types"]
        columns = [(n, kinds[n]) for n in names]
        cols = [[_parse(v, kinds[n]) if isinstance(v, str) and kinds[n] == "float" else v
                 for v in data["columns"][n]] for n in names]
        rows = [tuple(vals) for vals in zip(*cols)] if cols else []
        return TableArtifact(data["schema_id"], columns, rows, _strip_defaults(data["metadata"]))
    meta, schema_id, kinds = {}, None, None
    lines = text.splitlines()
    k = 0
    while k < len(lines) and lines[k].startswith("# "):
        key, _, value = lines[k][2:].partition(": ")
        value = json.loads(value)
        if key == "schema_id":
            schema_id = value
        elif key == "column_types":
            kinds = value
        else:
            meta[key] = value
        k += 1
    reader = csv.reader(lines[k:])
    header = next(reader)
    rows = [tuple(_parse(c, kind) for c, kind in zip(cells, kinds)) for cells in reader]
    return TableArtifact(schema_id, list(zip(header, kinds)), rows, _strip_defaults(meta))
