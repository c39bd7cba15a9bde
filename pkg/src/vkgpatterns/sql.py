"""Parse and print the conjunctive SQL subset used in mapping sources.

Supported::

    SELECT [DISTINCT] item, ... FROM rel [[AS] alias], ... | rel JOIN rel ON cond [AND cond]...
    [WHERE cond AND cond ...]

where an item is ``*``, ``rel.*`` or a column/string/number with an optional
alias, and each condition is an equality between columns or between a column
and a constant.  Anything else raises :class:`UnsupportedSql`.
"""

from __future__ import annotations

import re
from typing import Callable, Optional

from .errors import UnsupportedSql
from .query import (AttrEq, ColRef, ConstEq, Constant, Join, ProjItem, Project, Relation,
                    Select, SourceQuery, Star, conditions_of, output_items, relations)

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<str>'(?:[^']|'')*')
  | (?P<qid>"(?:[^"]|"")*"|`[^`]*`|\[[^\]]*\])
  | (?P<num>-?\d+(?:\.\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<op><>|!=|<=|>=|\|\||[(),.=*;<>+\-/])
""", re.X)

_KEYWORDS = {"SELECT", "DISTINCT", "FROM", "WHERE", "AND", "AS", "JOIN", "INNER", "ON"}
_FORBIDDEN = {"OR", "NOT", "UNION", "EXCEPT", "INTERSECT", "GROUP", "ORDER", "HAVING", "LIMIT",
              "LEFT", "RIGHT", "FULL", "OUTER", "CROSS", "NATURAL", "CASE", "IN", "LIKE", "IS",
              "EXISTS", "BETWEEN", "OFFSET", "WITH", "NULL", "USING"}


def _tokenize(text: str) -> list:
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise UnsupportedSql(f"unexpected character {text[pos]!r}")
        pos = m.end()
        kind = m.lastgroup
        val = m.group()
        if kind == "ws":
            continue
        if kind == "qid":
            inner = val[1:-1]
            toks.append(("id", inner.replace('""', '"') if val[0] == '"' else inner))
        elif kind == "id":
            up = val.upper()
            if up in _KEYWORDS or up in _FORBIDDEN:
                toks.append(("kw", up))
            else:
                toks.append(("id", val))
        elif kind == "str":
            toks.append(("str", val[1:-1].replace("''", "'")))
        else:
            toks.append((kind, val))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, off=0):
        j = self.i + off
        return self.toks[j] if j < len(self.toks) else ("eof", "")

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def accept(self, kind, val=None):
        t = self.peek()
        if t[0] == kind and (val is None or t[1] == val):
            self.i += 1
            return True
        return False

    def expect(self, kind, val=None):
        t = self.take()
        if t[0] != kind or (val is not None and t[1] != val):
            self.fail(t, f"expected {val or kind}")
        return t[1]

    def fail(self, tok, why="unsupported construct"):
        if tok[0] == "kw" and tok[1] in _FORBIDDEN:
            raise UnsupportedSql(f"{tok[1]} is outside the supported SQL subset")
        raise UnsupportedSql(f"{why} near {tok[1]!r}" if tok[1] else f"{why} at end of query")

    # grammar ---------------------------------------------------------

    def query(self):
        self.expect("kw", "SELECT")
        self.accept("kw", "DISTINCT")
        items = [self.item()]
        while self.accept("op", ","):
            items.append(self.item())
        self.expect("kw", "FROM")
        tables, conds = self.from_list()
        if self.accept("kw", "WHERE"):
            conds.extend(self.conjunction())
        self.accept("op", ";")
        if self.peek()[0] != "eof":
            self.fail(self.peek())
        return items, tables, conds

    def item(self):
        if self.accept("op", "*"):
            return ("star", None, None)
        if self.peek()[0] == "id" and self.peek(1) == ("op", ".") and self.peek(2) == ("op", "*"):
            rel = self.take()[1]
            self.i += 2
            return ("star", rel, None)
        expr = self.expr()
        alias = None
        if self.accept("kw", "AS"):
            alias = self.expect("id")
        elif self.peek()[0] == "id":
            alias = self.take()[1]
        return ("expr", expr, alias)

    def expr(self):
        t = self.take()
        if t[0] == "str":
            return Constant(t[1])
        if t[0] == "num":
            return Constant(t[1])
        if t[0] == "id":
            if self.accept("op", "."):
                return ColRef(t[1], self.expect("id"))
            return ColRef(None, t[1])
        self.fail(t)

    def table_ref(self):
        name = self.expect("id")
        alias = name
        if self.accept("kw", "AS"):
            alias = self.expect("id")
        elif self.peek()[0] == "id":
            alias = self.take()[1]
        return name, alias

    def from_list(self):
        tables = [self.table_ref()]
        conds = []
        while True:
            if self.accept("op", ","):
                tables.append(self.table_ref())
            elif self.peek() in (("kw", "JOIN"), ("kw", "INNER")):
                self.accept("kw", "INNER")
                self.expect("kw", "JOIN")
                tables.append(self.table_ref())
                self.expect("kw", "ON")
                conds.extend(self.conjunction())
            else:
                break
        return tables, conds

    def conjunction(self):
        conds = [self.condition()]
        while self.accept("kw", "AND"):
            conds.append(self.condition())
        return conds

    def condition(self):
        if self.accept("op", "("):
            inner = self.conjunction()
            self.expect("op", ")")
            return ("and", inner)
        left = self.expr()
        op = self.take()
        if op != ("op", "="):
            self.fail(op, "only equality comparisons are supported")
        right = self.expr()
        return ("eq", left, right)


def parse_sql(text: str, columns_of: Optional[Callable] = None) -> SourceQuery:
    """Parse ``text`` into a :class:`SourceQuery`.

    Table aliases are resolved to table names.  Unqualified columns are bound
    to the single table of the query, or, when ``columns_of`` is given, to the
    unique table owning the column.
    """
    items, tables, raw_conds = _Parser(text).query()
    alias_of = {}
    for name, alias in tables:
        if alias in alias_of:
            raise UnsupportedSql(f"relation alias {alias!r} used twice")
        alias_of[alias] = name
    names = [n for n, _ in tables]
    if len(set(names)) != len(names):
        raise UnsupportedSql("self-joins are not supported")

    def ref(c: ColRef) -> ColRef:
        if c.relation is not None:
            if c.relation not in alias_of:
                raise UnsupportedSql(f"unknown relation qualifier {c.relation!r}")
            return ColRef(alias_of[c.relation], c.attr)
        if len(names) == 1:
            return ColRef(names[0], c.attr)
        if columns_of is not None:
            owners = [n for n in names if c.attr in columns_of(n)]
            if len(owners) == 1:
                return ColRef(owners[0], c.attr)
            raise UnsupportedSql(f"column {c.attr!r} is {'ambiguous' if owners else 'unknown'}")
        return c

    flat = []

    def flatten(cs):
        for c in cs:
            if c[0] == "and":
                flatten(c[1])
            else:
                flat.append(c)

    flatten(raw_conds)
    conds = []
    for _, left, right in flat:
        if isinstance(left, Constant) and isinstance(right, Constant):
            raise UnsupportedSql("comparison between two constants")
        if isinstance(left, Constant):
            left, right = right, left
        if isinstance(right, Constant):
            conds.append(ConstEq(ref(left), right))
        else:
            conds.append(AttrEq(ref(left), ref(right)))

    tree: SourceQuery = Relation(names[0])
    for n in names[1:]:
        tree = Join(tree, Relation(n))
    if conds:
        tree = Select(tree, tuple(conds))

    proj = []
    for kind, expr, alias in items:
        if kind == "star":
            if expr is None:
                proj.extend(ProjItem(Star(n)) for n in names)
            else:
                if expr not in alias_of:
                    raise UnsupportedSql(f"unknown relation qualifier {expr!r}")
                proj.append(ProjItem(Star(alias_of[expr])))
        elif isinstance(expr, Constant):
            if alias is None:
                raise UnsupportedSql("constant select item needs an alias")
            proj.append(ProjItem(expr, alias))
        else:
            c = ref(expr)
            proj.append(ProjItem(c, alias if alias not in (None, c.attr) else None))
    if all(isinstance(p.expr, Star) for p in proj) and [p.expr.relation for p in proj] == names:
        return tree
    return Project(tree, tuple(proj))


# -- printing -------------------------------------------------------------

def quote(name: str) -> str:
    return '"' + name.replace('"', '""') + '"'


def _lit(c: Constant) -> str:
    return "'" + c.value.replace("'", "''") + "'"


def emit_sql(q: SourceQuery) -> str:
    """Print a conjunctive query as a single-line ``SELECT`` statement.

    Columns are qualified only when the query mentions several relations;
    joins print as ``JOIN ... ON`` with the equalities that connect each new
    relation, remaining conditions go to ``WHERE``.
    """
    rels = relations(q)
    multi = len(rels) > 1

    def colsql(c: ColRef) -> str:
        if multi and c.relation is not None:
            return f"{quote(c.relation)}.{quote(c.attr)}"
        return quote(c.attr)

    def condsql(c) -> str:
        if isinstance(c, AttrEq):
            return f"{colsql(c.left)} = {colsql(c.right)}"
        return f"{colsql(c.col)} = {_lit(c.value)}"

    items = []
    for it in output_items(q):
        if isinstance(it.expr, Star):
            items.append(f"{quote(it.expr.relation)}.*" if multi else "*")
        elif isinstance(it.expr, Constant):
            items.append(f"{_lit(it.expr)} AS {quote(it.alias)}")
        else:
            s = colsql(it.expr)
            if it.alias is not None and it.alias != it.expr.attr:
                s += f" AS {quote(it.alias)}"
            items.append(s)

    join_conds, where = _split_conditions(q)
    from_parts = [quote(rels[0])]
    seen = {rels[0]}
    for r in rels[1:]:
        seen.add(r)
        on = [c for c in join_conds if _attaches(c, r, seen)]
        for c in on:
            join_conds.remove(c)
        if on:
            from_parts.append(f"JOIN {quote(r)} ON " + " AND ".join(condsql(c) for c in on))
        else:
            from_parts.append(f", {quote(r)}")
    where.extend(join_conds)
    sql = f"SELECT {', '.join(items)} FROM " + " ".join(from_parts).replace(" , ", ", ")
    if where:
        sql += " WHERE " + " AND ".join(condsql(c) for c in where)
    return sql


def _attaches(c, r, seen) -> bool:
    return (isinstance(c, AttrEq) and r in (c.left.relation, c.right.relation)
            and c.left.relation in seen and c.right.relation in seen)


def _split_conditions(q):
    joins, where = [], []
    for c in conditions_of(q):
        if isinstance(c, AttrEq) and c.left.relation != c.right.relation:
            joins.append(c)
        else:
            where.append(c)
    return joins, where
