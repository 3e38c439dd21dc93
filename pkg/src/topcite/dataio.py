"""CSV ingestion of per-unit counts and the bundled ranking fixtures.

Schema (UTF-8, comma separated, decimal point)::

    unit_id,label,country,p,p_top10

``p`` and ``p_top10`` may be fractional (fractional counting).  Errors
carry 1-based line numbers, the header being line 1.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import BinaryIO, Optional, TextIO, Union

from .errors import FormatError, ValidationError
from .indicators import ResearchUnit

HEADER = ("unit_id", "label", "country", "p", "p_top10")

FIXTURES = {
    "table1_excerpt": {
        "file": "table1_excerpt.csv",
        "source": "Leiden Ranking 2022, Physical sciences and engineering, 2016-2019, "
        "fractional counting: 15 first and 10 last US universities",
        "notes": [
            "excerpt of 25 out of 200 US universities; does not add up to the USA totals",
            "period printed as 2016-2019 in the table footnote; running text elsewhere says 2011-2014",
        ],
    },
    "table2_totals": {
        "file": "table2_totals.csv",
        "source": "Leiden Ranking 2022, Physical sciences and engineering, 2016-2019: "
        "country totals, one pseudo-unit per country",
        "notes": [],
    },
    "table4": {
        "file": "table4.csv",
        "source": "Leiden Ranking, Physical sciences and engineering, fractional counting: "
        "five Japanese and five US universities",
        "notes": ["p_top10 reconstructed as printed ratio x P; only P and the ratio are published"],
    },
}


@dataclass
class UnitsTable:
    rows: list[ResearchUnit]
    source: str = ""
    warnings: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def _number(text: str) -> float:
    value = float(text.strip())
    if not math.isfinite(value):
        raise ValueError(text)
    return value


def parse_units_csv(
    source: Union[bytes, str, BinaryIO, TextIO], label: str = "<input>"
) -> UnitsTable:
    """Parse the units CSV.  Row problems are collected and raised together."""
    if isinstance(source, bytes):
        text = source.decode("utf-8-sig")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip().lower() for h in header) != HEADER:
        got = ",".join(header) if header else "<empty file>"
        raise FormatError(f"{label}: line 1: expected header {','.join(HEADER)!r}, got {got!r}")

    rows: list[ResearchUnit] = []
    errors: list[str] = []
    seen: dict[str, int] = {}
    for record in reader:
        line = reader.line_num
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) != len(HEADER):
            errors.append(f"line {line}: expected {len(HEADER)} fields, got {len(record)}")
            continue
        unit_id, name, country, p_text, t_text = (cell.strip() for cell in record)
        if not unit_id:
            errors.append(f"line {line}: empty unit_id")
            continue
        if unit_id in seen:
            errors.append(f"line {line}: duplicate unit_id {unit_id!r} (first on line {seen[unit_id]})")
            continue
        try:
            p, t = _number(p_text), _number(t_text)
        except ValueError:
            errors.append(f"line {line}: p={p_text!r}, p_top10={t_text!r} are not decimal numbers")
            continue
        if p < 0 or t < 0:
            errors.append(f"line {line}: negative count (p={p_text}, p_top10={t_text})")
            continue
        if t > p:
            errors.append(f"line {line}: p_top10={t_text} exceeds p={p_text} for {unit_id!r}")
            continue
        seen[unit_id] = line
        rows.append(ResearchUnit(unit_id, p, t, label=name or unit_id, country=country or None))
    if errors:
        raise ValidationError(f"{label}: {len(errors)} invalid row(s)\n  " + "\n  ".join(errors))

    table = UnitsTable(rows, source=label)
    if not rows:
        table.warnings.append("no data rows")
    zero = [u.id for u in rows if u.p_total == 0]
    if zero:
        table.warnings.append(f"{len(zero)} unit(s) with p=0 will be skipped: {', '.join(zero)}")
    return table


def read_units_csv(path: Union[str, os.PathLike]) -> UnitsTable:
    with open(path, "rb") as fh:
        return parse_units_csv(fh, label=os.fspath(path))


def _cell(value: float) -> str:
    return str(int(value)) if value.is_integer() else repr(value)


def serialize_units_csv(table: UnitsTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for u in table.rows:
        writer.writerow([u.id, u.label, u.country or "", _cell(u.p_total), _cell(u.p_top10)])
    return buf.getvalue()


def group_units(table: UnitsTable) -> dict[str, list[ResearchUnit]]:
    """Partition rows by country, keeping input order inside each group."""
    groups: dict[str, list[ResearchUnit]] = {}
    for line, u in enumerate(table.rows, start=2):
        country = (u.country or "").strip()
        if not country:
            raise ValidationError(f"row {line} ({u.id!r}) has an empty country field")
        groups.setdefault(country, []).append(u)
    return groups


def find_group(groups: dict[str, list[ResearchUnit]], name: str) -> Optional[str]:
    """Key of ``groups`` matching ``name`` case-insensitively after trimming."""
    wanted = name.strip().casefold()
    for key in groups:
        if key.strip().casefold() == wanted:
            return key
    return None


def bundled_fixture(name: str) -> UnitsTable:
    if name not in FIXTURES:
        raise ValidationError(f"unknown fixture {name!r}; available: {', '.join(sorted(FIXTURES))}")
    meta = FIXTURES[name]
    data = resources.files("topcite.data").joinpath(meta["file"]).read_bytes()
    table = parse_units_csv(data, label=f"fixture:{name}")
    table.source = meta["source"]
    table.notes = list(meta["notes"])
    return table
