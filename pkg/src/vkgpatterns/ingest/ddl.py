"""``CREATE TABLE`` subset: column definitions, NOT NULL, PRIMARY KEY, UNIQUE,
FOREIGN KEY ... REFERENCES, plus ``--`` and ``/* */`` comments.

Column types are accepted and discarded (values are text throughout).
"""

from __future__ import annotations

import re

from ..errors import DanglingReference, ModelError, SyntaxError
from ..model import Attribute, ForeignKey, RelationalSchema, Table

_TOKEN = re.compile(r"""
    (?P<nl>\n)
  | (?P<ws>[ \t\r\f]+)
  | (?P<line_comment>--[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<qid>"(?:[^"]|"")*"|`[^`]*`|\[[^\]]*\])
  | (?P<str>'(?:[^']|'')*')
  | (?P<num>-?\d+(?:\.\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<op>[(),;.])
""", re.X | re.S)

_CONSTRAINT_WORDS = {"NOT", "NULL", "PRIMARY", "UNIQUE", "REFERENCES", "DEFAULT", "CONSTRAINT",
                     "CHECK", "FOREIGN"}


def _tokenize(text):
    toks, pos, line = [], 0, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SyntaxError(line, text[pos])
        kind, val = m.lastgroup, m.group()
        pos = m.end()
        if kind == "nl":
            line += 1
            continue
        if kind in ("ws", "line_comment"):
            continue
        if kind == "block_comment":
            line += val.count("\n")
            continue
        if kind == "qid":
            inner = val[1:-1]
            toks.append(("qid", inner.replace('""', '"') if val[0] == '"' else inner, line))
        else:
            toks.append((kind, val, line))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, off=0):
        j = self.i + off
        if j < len(self.toks):
            return self.toks[j]
        last = self.toks[-1][2] if self.toks else 1
        return ("eof", "<end of input>", last)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def is_kw(self, word, off=0):
        t = self.peek(off)
        return t[0] == "id" and t[1].upper() == word

    def accept_kw(self, *words):
        if all(self.is_kw(w, k) for k, w in enumerate(words)):
            self.i += len(words)
            return True
        return False

    def expect_kw(self, *words):
        for w in words:
            t = self.take()
            if not (t[0] == "id" and t[1].upper() == w):
                raise SyntaxError(t[2], t[1])

    def expect_op(self, op):
        t = self.take()
        if t != ("op", op, t[2]):
            raise SyntaxError(t[2], t[1])

    def accept_op(self, op):
        if self.peek()[:2] == ("op", op):
            self.i += 1
            return True
        return False

    def ident(self):
        t = self.take()
        if t[0] not in ("id", "qid"):
            raise SyntaxError(t[2], t[1])
        return t[1]

    def qualified_name(self):
        name = self.ident()
        while self.accept_op("."):
            name = self.ident()  # schema-qualified names keep the last part
        return name

    def name_list(self):
        self.expect_op("(")
        names = [self.ident()]
        while self.accept_op(","):
            names.append(self.ident())
        self.expect_op(")")
        return names

    # statements ---------------------------------------------------------

    def script(self):
        tables = []
        while self.peek()[0] != "eof":
            if self.accept_op(";"):
                continue
            tables.append(self.create_table())
        return tables

    def create_table(self):
        self.expect_kw("CREATE")
        self.accept_kw("TEMPORARY") or self.accept_kw("TEMP")
        self.expect_kw("TABLE")
        self.accept_kw("IF", "NOT", "EXISTS")
        name_tok = self.peek()
        name = self.qualified_name()
        self.expect_op("(")
        cols, pk, uniques, fks = [], None, [], []
        while True:
            if self.is_kw("CONSTRAINT") or self.is_kw("PRIMARY") or self.is_kw("UNIQUE") \
                    or self.is_kw("FOREIGN") or self.is_kw("CHECK"):
                kind, data = self.table_constraint()
                if kind == "pk":
                    if pk is not None:
                        raise SyntaxError(name_tok[2], "PRIMARY KEY")
                    pk = data
                elif kind == "unique":
                    uniques.append(data)
                else:
                    fks.append(data)
            else:
                col, col_pk, col_unique, col_fk, not_null = self.column_def()
                cols.append([col, not_null])
                if col_pk:
                    if pk is not None:
                        raise SyntaxError(name_tok[2], "PRIMARY KEY")
                    pk = [col]
                if col_unique:
                    uniques.append([col])
                if col_fk:
                    fks.append(([col],) + col_fk)
            if self.accept_op(","):
                continue
            self.expect_op(")")
            break
        self.accept_op(";")
        return name, name_tok[2], cols, pk or [], uniques, fks

    def column_def(self):
        col = self.ident()
        # type: identifiers until a constraint keyword, ',' or ')'
        while self.peek()[0] == "id" and self.peek()[1].upper() not in _CONSTRAINT_WORDS:
            self.take()
            if self.accept_op("("):
                while not self.accept_op(")"):
                    t = self.take()
                    if t[0] == "eof":
                        raise SyntaxError(t[2], t[1])
        pk = unique = False
        fk = None
        not_null = False
        while True:
            if self.accept_kw("NOT", "NULL"):
                not_null = True
            elif self.accept_kw("NULL"):
                pass
            elif self.accept_kw("PRIMARY", "KEY"):
                pk = True
            elif self.accept_kw("UNIQUE"):
                unique = True
            elif self.accept_kw("CONSTRAINT"):
                self.ident()
            elif self.accept_kw("DEFAULT"):
                t = self.take()
                if t[0] not in ("str", "num", "id"):
                    raise SyntaxError(t[2], t[1])
            elif self.is_kw("REFERENCES"):
                fk = self.references()
            elif self.is_kw("CHECK"):
                t = self.peek()
                raise SyntaxError(t[2], t[1])
            else:
                break
        return col, pk, unique, fk, not_null

    def references(self):
        t = self.peek()
        self.expect_kw("REFERENCES")
        target = self.qualified_name()
        cols = self.name_list() if self.peek()[:2] == ("op", "(") else None
        return target, cols, t[2]

    def table_constraint(self):
        if self.accept_kw("CONSTRAINT"):
            self.ident()
        t = self.peek()
        if self.accept_kw("PRIMARY", "KEY"):
            return "pk", self.name_list()
        if self.accept_kw("UNIQUE"):
            return "unique", self.name_list()
        if self.accept_kw("FOREIGN", "KEY"):
            src = self.name_list()
            return "fk", (src,) + self.references()
        raise SyntaxError(t[2], t[1])


def parse_ddl(text: str, name: str = "schema") -> RelationalSchema:
    """Parse ``CREATE TABLE`` statements into a :class:`RelationalSchema`."""
    raw = _Parser(text).script()
    pks = {r[0]: r[3] for r in raw}
    cols_of = {r[0]: [c for c, _ in r[2]] for r in raw}
    tables = []
    for tname, line, cols, pk, uniques, fks in raw:
        if len({c for c, _ in cols}) != len(cols):
            raise SyntaxError(line, f"duplicate column in {tname}")
        for key in [pk] + uniques:
            missing = [k for k in key if k not in cols_of[tname]]
            if missing:
                raise SyntaxError(line, missing[0])
        attrs = tuple(Attribute(c, nullable=not (nn or c in pk)) for c, nn in cols)
        fk_objs = []
        for src, target, tcols, fline in fks:
            if target not in pks:
                raise DanglingReference(f"{tname}{src} references unknown table {target}")
            if tcols is None:
                tcols = pks[target]
                if not tcols:
                    raise DanglingReference(f"{tname}{src} references {target}, which has no primary key")
            if len(tcols) != len(src) or not set(tcols) <= set(cols_of[target]):
                raise DanglingReference(f"{tname}{src} -> {target}{tcols}: bad attribute list")
            for s in src:
                if s not in cols_of[tname]:
                    raise SyntaxError(fline, s)
            fk_objs.append(ForeignKey(tname, tuple(src), target, tuple(tcols)))
        uniq = []
        for u in uniques:
            if set(u) != set(pk) and tuple(u) not in uniq:
                uniq.append(tuple(u))
        try:
            tables.append(Table(tname, attrs, tuple(pk), tuple(uniq), tuple(fk_objs)))
        except ModelError as e:
            raise SyntaxError(line, str(e)) from None
    try:
        return RelationalSchema(tuple(tables), (), name)
    except ModelError as e:
        raise SyntaxError(1, str(e)) from None


def _q(name: str) -> str:
    if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) and name.upper() not in _CONSTRAINT_WORDS \
            and name.upper() not in {"KEY", "TABLE", "CREATE", "FOREIGN"}:
        return name
    return '"' + name.replace('"', '""') + '"'


def emit_ddl(schema: RelationalSchema) -> str:
    """Print the base tables of ``schema`` as DDL accepted by :func:`parse_ddl`."""
    out = []
    for t in schema.tables:
        lines = []
        for a in t.attributes:
            nn = " NOT NULL" if not a.nullable and a.name not in t.primary_key else ""
            lines.append(f"  {_q(a.name)} TEXT{nn}")
        if t.primary_key:
            lines.append(f"  PRIMARY KEY ({', '.join(map(_q, t.primary_key))})")
        for u in t.unique_keys:
            lines.append(f"  UNIQUE ({', '.join(map(_q, u))})")
        for fk in t.foreign_keys:
            lines.append(f"  FOREIGN KEY ({', '.join(map(_q, fk.source))}) REFERENCES "
                         f"{_q(fk.target_table)} ({', '.join(map(_q, fk.target))})")
        out.append(f"CREATE TABLE {_q(t.name)} (\n" + ",\n".join(lines) + "\n);\n")
    return "\n".join(out)
