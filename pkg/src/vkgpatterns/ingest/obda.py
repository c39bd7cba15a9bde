"""Ontop-style ``.obda`` mapping files.

::

    [PrefixDeclaration]
    :       http://example.org/
    npd:    http://example.org/npd#

    [MappingDeclaration] @collection [[
    mappingId   mPerson
    target      :person/{ssn} a :Person ; :name {name} .
    source      SELECT "ssn", "name" FROM "person_info"
    ]]

A field value may continue on following lines until a blank line or the next
field keyword.  Target triples use ``{x}`` placeholders; ``{x}@it`` and
``"..."@it`` carry language tags, ``^^datatype`` suffixes are dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..errors import ModelError, SyntaxError, UnsupportedSql
from ..model import (CLASS, DATA, OBJECT, IRITemplate, LiteralTemplate, MappingAssertion,
                     TargetAtom, parse_segments)
from ..query import iter_colrefs, normalize_query
from ..sql import parse_sql


@dataclass(frozen=True)
class ObdaDocument:
    prefixes: tuple
    assertions: tuple

    @property
    def prefix_map(self) -> dict:
        return dict(self.prefixes)

    def assertion(self, mid: str) -> MappingAssertion:
        for a in self.assertions:
            if a.id == mid:
                return a
        raise KeyError(mid)


_FIELDS = ("mappingId", "target", "source")


def _scan_terms(text: str, where: str) -> list:
    """Tokenize a target into terms and the punctuation ``; , .``."""
    toks, i, n = [], 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in ";,":
            toks.append(ch)
            i += 1
            continue
        if ch == "." and (i + 1 == n or text[i + 1].isspace()):
            toks.append(".")
            i += 1
            continue
        start = i
        if ch == "<":
            j = text.find(">", i)
            if j < 0:
                raise SyntaxError(where, "unterminated <IRI>")
            i = j + 1
        elif ch == '"':
            i += 1
            while i < n and text[i] != '"':
                i += 2 if text[i] == "\\" else 1
            if i >= n:
                raise SyntaxError(where, "unterminated string literal")
            i += 1
        while i < n and not text[i].isspace() and text[i] not in ";,":
            if text[i] == "." and (i + 1 == n or text[i + 1].isspace()):
                break
            if text[i] == "{":
                j = text.find("}", i)
                if j < 0:
                    raise SyntaxError(where, "unterminated placeholder")
                i = j + 1
                continue
            if text[i] == '"' and i == start:
                break
            i += 1
        toks.append(text[start:i])
    return toks


_LANG = re.compile(r"@([A-Za-z]+(?:-[A-Za-z0-9]+)*)$")


def _split_suffix(term: str):
    """Separate ``^^type`` / ``@lang`` from a literal term."""
    lang = None
    if "^^" in term and not term.endswith("}"):
        idx = term.rfind("^^")
        if term[:idx].endswith(("}", '"')):
            term = term[:idx]
    m = _LANG.search(term)
    if m and term[:m.start()].endswith(("}", '"')):
        lang = m.group(1)
        term = term[:m.start()]
    return term, lang


def _unescape(s: str) -> str:
    return re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t"}.get(m.group(1), m.group(1)), s)


def _prefix_of(term: str) -> Optional[str]:
    if term.startswith("<"):
        return None
    m = re.match(r"^([A-Za-z_][\w.-]*)?:", term)
    return m.group(0) if m else None


def parse_target(text: str, where: str, prefixes: dict) -> list:
    toks = _scan_terms(text, where)
    atoms, i = [], 0

    def need_prefix(term):
        p = _prefix_of(term)
        if p is None and not term.startswith("<"):
            raise SyntaxError(where, f"cannot read term {term!r}")
        if p is not None and p[:-1] not in prefixes and p not in prefixes:
            raise SyntaxError(where, f"undeclared prefix {p!r}")

    while i < len(toks):
        subj_txt = toks[i]
        if subj_txt in ";,.":
            raise SyntaxError(where, f"unexpected {subj_txt!r}")
        need_prefix(subj_txt)
        try:
            subject = IRITemplate.parse(subj_txt)
        except ModelError as e:
            raise SyntaxError(where, str(e)) from None
        i += 1
        while True:
            if i >= len(toks):
                raise SyntaxError(where, "incomplete triple")
            pred = toks[i]
            i += 1
            while True:
                if i >= len(toks):
                    raise SyntaxError(where, "missing object")
                obj = toks[i]
                i += 1
                atoms.append(_atom(subject, pred, obj, where, need_prefix))
                if i < len(toks) and toks[i] == ",":
                    i += 1
                    continue
                break
            if i < len(toks) and toks[i] == ";":
                i += 1
                if i < len(toks) and toks[i] == ".":
                    i += 1
                    break
                continue
            if i < len(toks) and toks[i] == ".":
                i += 1
                break
            if i >= len(toks):
                break
            raise SyntaxError(where, f"unexpected {toks[i]!r}")
    if not atoms:
        raise SyntaxError(where, "empty target")
    return atoms


def _atom(subject, pred, obj, where, need_prefix):
    if pred == "a":
        need_prefix(obj)
        if "{" in obj:
            raise SyntaxError(where, "templated class names are not supported")
        return TargetAtom(CLASS, obj, subject)
    need_prefix(pred)
    term, lang = _split_suffix(obj)
    if term.startswith('"'):
        lit = LiteralTemplate(parse_segments(_unescape(term[1:-1])), lang)
        return TargetAtom(DATA, pred, subject, lit)
    if term.startswith("{") and term.endswith("}") and term.count("{") == 1:
        name = term[1:-1].strip().strip('"')
        if lang:
            return TargetAtom(DATA, pred, subject, LiteralTemplate(parse_segments(f"{{{name}}}"), lang))
        return TargetAtom(DATA, pred, subject, name)
    need_prefix(term)
    try:
        return TargetAtom(OBJECT, pred, subject, IRITemplate.parse(term))
    except ModelError as e:
        raise SyntaxError(where, f"object {obj!r}: {e}") from None


def _blocks(lines, start_line):
    """Yield ``(line number, {field: text})`` per mapping block."""
    cur, key, lineno, first = {}, None, start_line, start_line
    for off, raw in enumerate(lines):
        ln = start_line + off
        line = raw.strip()
        if not line:
            key = None
            continue
        if line.startswith("#"):
            continue
        m = re.match(r"^(mappingId|target|source)\b\s*(.*)$", line)
        if m:
            k, v = m.group(1), m.group(2)
            if k == "mappingId" and cur:
                yield first, cur
                cur = {}
            if not cur:
                first = ln
            if k in cur:
                raise SyntaxError(cur.get("mappingId", f"line {ln}"), f"duplicate {k} field")
            cur[k] = v
            key = k
        elif key is not None:
            cur[key] += "\n" + line
        else:
            raise SyntaxError(f"line {ln}", f"unexpected text {line[:40]!r}")
    if cur:
        yield first, cur


def parse_obda(text: str) -> ObdaDocument:
    lines = text.splitlines()
    prefixes = {}
    i = 0
    section = None
    mapping_lines, mapping_start = None, 0
    while i < len(lines):
        line = lines[i].strip()
        if line.startswith("[PrefixDeclaration]"):
            section = "prefix"
        elif line.startswith("[MappingDeclaration]"):
            j = i + 1
            while j < len(lines) and lines[j].strip() != "]]":
                j += 1
            if j >= len(lines):
                raise SyntaxError(f"line {i + 1}", "unterminated mapping collection")
            mapping_lines, mapping_start = lines[i + 1:j], i + 2
            i = j
            section = None
        elif line.startswith("[") and line.endswith("]"):
            section = "other"
        elif line and not line.startswith("#") and section == "prefix":
            parts = line.split(None, 1)
            if len(parts) != 2 or not parts[0].endswith(":"):
                raise SyntaxError(f"line {i + 1}", "malformed prefix declaration")
            prefixes[parts[0][:-1]] = parts[1].strip().strip("<>")
        i += 1

    assertions, seen = [], set()
    for ln, block in _blocks(mapping_lines or [], mapping_start):
        mid = block.get("mappingId", "").strip()
        where = mid or f"line {ln}"
        for f in _FIELDS:
            if not block.get(f, "").strip():
                raise SyntaxError(where, f"missing {f}")
        if mid in seen:
            raise SyntaxError(where, "duplicate mappingId")
        seen.add(mid)
        atoms = parse_target(block["target"], where, prefixes)
        sql = " ".join(block["source"].split())
        try:
            src = parse_sql(sql)
            if all(c.relation is not None for c in iter_colrefs(src)):
                src = normalize_query(src)
            a = MappingAssertion(mid, src, tuple(atoms), sql)
        except UnsupportedSql as e:
            a = MappingAssertion(mid, None, tuple(atoms), sql, str(e))
        except ModelError as e:
            a = MappingAssertion(mid, None, tuple(atoms), sql, f"malformed source: {e}")
        assertions.append(a)
    return ObdaDocument(tuple(sorted(prefixes.items())), tuple(assertions))


# -- printing -------------------------------------------------------------

def format_term(obj) -> str:
    if isinstance(obj, IRITemplate):
        return f"<{obj.text}>" if not obj.base else obj.text
    if isinstance(obj, str):
        return "{" + obj + "}"
    text = obj.text
    lang = f"@{obj.language}" if obj.language else ""
    if len(obj.segments) == 1 and not isinstance(obj.segments[0], str) and lang:
        return text + lang
    esc = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{esc}"{lang}'


def format_target(atoms) -> str:
    """Turtle-like target text; consecutive atoms on one subject share a statement."""
    stmts, cur_subj, parts = [], None, []
    for a in atoms:
        if a.subject != cur_subj:
            if parts:
                stmts.append(f"{format_term(cur_subj)} " + " ; ".join(parts) + " .")
            cur_subj, parts = a.subject, []
        if a.kind == CLASS:
            parts.append(f"a {a.predicate}")
        else:
            parts.append(f"{a.predicate} {format_term(a.object)}")
    if parts:
        stmts.append(f"{format_term(cur_subj)} " + " ; ".join(parts) + " .")
    return " ".join(stmts)
