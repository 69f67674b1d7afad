"""Self-describing result envelopes and their on-disk forms.

A record is written as ``result.json`` (authoritative, lossless) plus one CSV
per table. Floats go through ``repr`` so the CSVs round-trip too.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from . import __version__


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple[Any, ...]] = field(default_factory=list)

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def where(self, **match) -> list[dict[str, Any]]:
        out = []
        for r in self.rows:
            d = dict(zip(self.columns, r))
            if all(d[k] == v for k, v in match.items()):
                out.append(d)
        return out

    def to_dict(self) -> dict[str, Any]:
        return {"columns": list(self.columns), "rows": [list(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Table":
        return cls(tuple(d["columns"]), [tuple(r) for r in d["rows"]])


@dataclass
class ResultRecord:
    experiment: str
    config: dict[str, Any]
    summary: dict[str, Any]
    tables: dict[str, Table]
    library_version: str = __version__
    created_utc: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def payload(self) -> dict[str, Any]:
        """Everything except the timestamp; identical for identical config + seed."""
        return {
            "experiment": self.experiment,
            "library_version": self.library_version,
            "config": self.config,
            "summary": self.summary,
            "tables": {k: t.to_dict() for k, t in sorted(self.tables.items())},
        }

    def payload_bytes(self) -> bytes:
        return json.dumps(self.payload(), sort_keys=True, allow_nan=False).encode()

    def to_json(self) -> str:
        doc = {"created_utc": self.created_utc, **self.payload()}
        return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        d = json.loads(text)
        return cls(
            experiment=d["experiment"],
            config=d["config"],
            summary=d["summary"],
            tables={k: Table.from_dict(v) for k, v in d["tables"].items()},
            library_version=d["library_version"],
            created_utc=d["created_utc"],
        )


def _cell(v: Any) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def write_table_csv(table: Table, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(table.columns)
        for r in table.rows:
            w.writerow([_cell(v) for v in r])


def read_table_csv(path: str | Path) -> Table:
    def parse(s: str):
        for conv in (int, float):
            try:
                return conv(s)
            except ValueError:
                pass
        return s

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        cols = tuple(next(reader))
        return Table(cols, [tuple(parse(v) for v in row) for row in reader])


def write_gnuplot(path: str | Path, blocks: Sequence[tuple[str, Table]]) -> None:
    """Whitespace-separated blocks split by two blank lines (addressable with ``index``)."""
    with open(path, "w") as fh:
        for i, (title, table) in enumerate(blocks):
            if i:
                fh.write("\n\n")
            fh.write(f"# {title}\n# {' '.join(table.columns)}\n")
            for r in table.rows:
                fh.write(" ".join(_cell(v) for v in r) + "\n")


def save_record(record: ResultRecord, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "result.json").write_text(record.to_json() + "\n")
    for name, table in record.tables.items():
        write_table_csv(table, out / f"{name}.csv")
    return out / "result.json"


def load_record(path: str | Path) -> ResultRecord:
    p = Path(path)
    if p.is_dir():
        p = p / "result.json"
    return ResultRecord.from_json(p.read_text())
