"""Per-table CSV loading.

Dialect: comma separator, double-quote quoting, UTF-8, mandatory header.  A
fully empty *unquoted* cell is null; ``""`` is the empty string.  The stdlib
reader cannot tell the two apart, hence the small splitter below.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Mapping

from ..errors import HeaderMismatch, SyntaxError
from ..model import RelationalSchema

log = logging.getLogger(__name__)


def parse_csv(text: str, where: str = "<csv>") -> list:
    """Split CSV text into records; unquoted empty cells become ``None``."""
    records, row, cell = [], [], []
    quoted = False      # the current cell started with a quote
    in_quotes = False
    line = 1
    i, n = 0, len(text)
    at_cell_start = True
    while i < n:
        ch = text[i]
        if in_quotes:
            if ch == '"':
                if i + 1 < n and text[i + 1] == '"':
                    cell.append('"')
                    i += 2
                    continue
                in_quotes = False
            else:
                if ch == "\n":
                    line += 1
                cell.append(ch)
            i += 1
            continue
        if ch == '"' and at_cell_start:
            in_quotes = quoted = True
            at_cell_start = False
        elif ch == '"':
            raise SyntaxError(f"{where}:{line}", "stray quote inside an unquoted cell")
        elif ch == ",":
            row.append("".join(cell) if (cell or quoted) else None)
            cell, quoted, at_cell_start = [], False, True
        elif ch in "\r\n":
            if ch == "\r" and i + 1 < n and text[i + 1] == "\n":
                i += 1
            row.append("".join(cell) if (cell or quoted) else None)
            records.append(row)
            row, cell, quoted, at_cell_start = [], [], False, True
            line += 1
        else:
            if quoted:
                raise SyntaxError(f"{where}:{line}", "text after closing quote")
            cell.append(ch)
            at_cell_start = False
        i += 1
    if in_quotes:
        raise SyntaxError(f"{where}:{line}", "unterminated quoted cell")
    if cell or quoted or row:
        row.append("".join(cell) if (cell or quoted) else None)
        records.append(row)
    return records


def format_csv(header, rows) -> str:
    def cell(v):
        if v is None:
            return ""
        v = str(v)
        if v == "" or any(c in v for c in ',"\r\n') or v != v.strip():
            return '"' + v.replace('"', '""') + '"'
        return v

    lines = [",".join(cell(h) for h in header)]
    lines.extend(",".join(cell(v) for v in r) for r in rows)
    return "\n".join(lines) + "\n"


@dataclass
class DataInstance:
    """Rows per relation, aligned with the schema attribute order."""

    per_table: dict = field(default_factory=dict)
    columns: dict = field(default_factory=dict)

    @property
    def row_counts(self) -> dict:
        return {t: len(r) for t, r in self.per_table.items()}

    def has(self, table: str) -> bool:
        return table in self.per_table

    def rows(self, table: str) -> list:
        return self.per_table[table]

    def eval_tables(self) -> dict:
        """The ``name -> (columns, rows)`` shape the query evaluator takes."""
        return {t: (self.columns[t], rows) for t, rows in self.per_table.items()}

    def with_relation(self, name, cols, rows) -> "DataInstance":
        pt = dict(self.per_table)
        cs = dict(self.columns)
        pt[name] = [tuple(r) for r in rows]
        cs[name] = tuple(cols)
        return DataInstance(pt, cs)

    @classmethod
    def from_rows(cls, schema: RelationalSchema, data: Mapping) -> "DataInstance":
        """Build from ``table -> list of dicts or tuples`` (tuples in attribute order)."""
        inst = cls()
        for name, rows in data.items():
            cols = schema.columns_of(name)
            out = []
            for r in rows:
                if isinstance(r, Mapping):
                    out.append(tuple(r.get(c) for c in cols))
                else:
                    if len(r) != len(cols):
                        raise ValueError(f"{name}: row {r!r} has wrong arity")
                    out.append(tuple(r))
            inst.per_table[name] = out
            inst.columns[name] = tuple(cols)
        return inst


def load_csv_text(table, cols, text, where="<csv>"):
    records = parse_csv(text, where)
    if not records:
        raise SyntaxError(where, "missing header row")
    header = records[0]
    if any(h is None for h in header):
        raise SyntaxError(f"{where}:1", "empty header cell")
    header = [h.strip() for h in header]
    missing = [c for c in cols if c not in header]
    extra = [h for h in header if h not in cols]
    if missing or extra or len(set(header)) != len(header):
        raise HeaderMismatch(table, missing, extra)
    pos = [header.index(c) for c in cols]
    rows = []
    for lineno, rec in enumerate(records[1:], start=2):
        if rec == [None]:
            continue  # blank line
        if len(rec) != len(header):
            raise SyntaxError(f"{where}:{lineno}", f"expected {len(header)} cells, found {len(rec)}")
        rows.append(tuple(rec[p] for p in pos))
    return rows


def load_csv_dir(path: str, schema: RelationalSchema) -> DataInstance:
    """Load ``<table>.csv`` for every base table; absent files are logged and skipped."""
    inst = DataInstance()
    for t in schema.tables:
        fn = os.path.join(path, f"{t.name}.csv")
        if not os.path.exists(fn):
            log.warning("no data file for table %s; data-driven patterns disabled for it", t.name)
            continue
        with open(fn, encoding="utf-8", newline="") as fh:
            text = fh.read()
        if text.startswith("﻿"):
            text = text[1:]
        inst.per_table[t.name] = load_csv_text(t.name, t.attribute_names, text, fn)
        inst.columns[t.name] = t.attribute_names
    return inst
