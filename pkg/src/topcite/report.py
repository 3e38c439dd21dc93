"""Report documents and their CSV / JSON renderings.

A :class:`ReportDocument` holds run metadata, named tables and named plot
series.  Both renderings keep full float precision (``repr``); only the
human-readable console tables round to 6 significant digits.

CSV layout: metadata lines ``# key: <json>``, then one block per table
introduced by ``# table: <name>``, blocks separated by a blank line.  Plot
series are written as two-column tables named ``plot:<name>``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import __version__

INF_TOKEN = "inf"


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)

    def add(self, *cells):
        if len(cells) != len(self.columns):
            raise ValueError(f"row has {len(cells)} cells, table has {len(self.columns)} columns")
        self.rows.append(list(cells))


@dataclass
class ReportDocument:
    command: str
    metadata: dict = field(default_factory=dict)
    tables: dict[str, Table] = field(default_factory=dict)
    plots: dict[str, list[tuple[float, float]]] = field(default_factory=dict)

    def __post_init__(self):
        self.metadata = {"command": self.command, "tool_version": __version__, **self.metadata}

    def table(self, name: str, columns: Sequence[str]) -> Table:
        self.tables[name] = Table(list(columns))
        return self.tables[name]


def _plain(value):
    if isinstance(value, float):
        if math.isinf(value):
            return INF_TOKEN if value > 0 else "-" + INF_TOKEN
        if math.isnan(value):
            return "nan"
        return value
    if hasattr(value, "item"):  # numpy scalars
        return _plain(value.item())
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


def _csv_cell(value) -> str:
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return " ".join(_csv_cell(v) for v in value)
    return str(value)


def _all_tables(doc: ReportDocument) -> dict[str, Table]:
    out = dict(doc.tables)
    for name, points in doc.plots.items():
        out[f"plot:{name}"] = Table(["x", "y"], [[x, y] for x, y in points])
    return out


def render_csv(doc: ReportDocument) -> str:
    buf = io.StringIO()
    for key, value in doc.metadata.items():
        buf.write(f"# {key}: {json.dumps(_plain(value), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    for name, table in _all_tables(doc).items():
        buf.write(f"\n# table: {name}\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_csv_cell(c) for c in row])
    return buf.getvalue()


def render_json(doc: ReportDocument) -> str:
    payload = {
        "metadata": _plain(doc.metadata),
        "tables": {
            name: {"columns": t.columns, "rows": _plain(t.rows)} for name, t in doc.tables.items()
        },
        "plots": {name: _plain([list(p) for p in pts]) for name, pts in doc.plots.items()},
    }
    return json.dumps(payload, indent=2, sort_keys=False, allow_nan=False) + "\n"


def render(doc: ReportDocument, fmt: str) -> str:
    if fmt == "csv":
        return render_csv(doc)
    if fmt == "json":
        return render_json(doc)
    raise ValueError(f"unknown format {fmt!r}")


def parse_csv_report(text: str) -> tuple[dict, dict[str, Table]]:
    """Read back :func:`render_csv` output; table cells stay strings."""
    metadata: dict = {}
    tables: dict[str, Table] = {}
    head, _, body = text.partition("\n\n")
    for line in head.splitlines():
        key, _, value = line[2:].partition(": ")
        metadata[key] = json.loads(value)
    for block in body.split("\n\n"):
        lines = block.strip("\n").splitlines()
        if not lines or not lines[0].startswith("# table: "):
            continue
        records = list(csv.reader(lines[1:]))
        tables[lines[0][len("# table: "):]] = Table(records[0], records[1:])
    return metadata, tables


def format_sig(value, digits: int = 6) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return INF_TOKEN if value > 0 else "-" + INF_TOKEN
        return f"{value:.{digits}g}"
    return str(value)


def human_table(table: Table, digits: int = 6) -> str:
    cells = [table.columns] + [[format_sig(_plain(c), digits) if not isinstance(c, (list, tuple))
                                else " ".join(map(str, c)) for c in row] for row in table.rows]
    widths = [max(len(str(r[i])) for r in cells) for i in range(len(table.columns))]
    return "\n".join("  ".join(str(c).rjust(w) for c, w in zip(r, widths)) for r in cells)
