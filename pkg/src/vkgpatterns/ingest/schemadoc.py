"""The canonical JSON schema document.

::

    {"name": "...",
     "tables": [{"name": "T",
                 "attributes": [{"name": "a", "nullable": false}, ...],
                 "primaryKey": ["a"],
                 "uniqueKeys": [["b", "c"]],
                 "foreignKeys": [{"source": ["x"], "targetTable": "U", "target": ["y"]}],
                 "inclusionDeps": [{"sourceProjection": [{"const": "c"}, "k"],
                                    "targetTable": "U", "target": ["t", "k"]}]}],
     "views": [{"name": "V", "sql": "SELECT ...", "keys": [["k"]],
                "foreignKeys": [...]}]}
"""

from __future__ import annotations

import json

from ..errors import DanglingReference, ModelError, SchemaDocError, UnsupportedSql
from ..model import (Attribute, ForeignKey, InclusionDependency, RelationalSchema, Table,
                     ViewDef)
from ..query import Constant, normalize_query
from ..sql import emit_sql, parse_sql


def _expect(cond, path, reason):
    if not cond:
        raise SchemaDocError(path, reason)


def _names(value, path):
    _expect(isinstance(value, list) and all(isinstance(x, str) and x for x in value), path,
            "expected a list of attribute names")
    return tuple(value)


def _fk(doc, table, path, known_tables):
    _expect(isinstance(doc, dict), path, "expected an object")
    for k in ("source", "targetTable", "target"):
        _expect(k in doc, path, f"missing {k!r}")
    src = _names(doc["source"], f"{path}.source")
    tgt = _names(doc["target"], f"{path}.target")
    if len(src) != len(tgt):
        raise DanglingReference(f"{path}: source {list(src)} and target {list(tgt)} differ in arity")
    if doc["targetTable"] not in known_tables:
        raise DanglingReference(f"{path}: unknown target table {doc['targetTable']!r}")
    return ForeignKey(table, src, doc["targetTable"], tgt, bool(doc.get("declared", True)))


def parse_schema_doc(text: str) -> RelationalSchema:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaDocError("$", f"invalid JSON: {e}") from None
    _expect(isinstance(doc, dict), "$", "expected an object")
    tables_doc = doc.get("tables", [])
    views_doc = doc.get("views", [])
    _expect(isinstance(tables_doc, list), "$.tables", "expected a list")
    _expect(isinstance(views_doc, list), "$.views", "expected a list")
    known = set()
    for i, t in enumerate(tables_doc):
        _expect(isinstance(t, dict) and isinstance(t.get("name"), str), f"$.tables[{i}]",
                "table needs a name")
        known.add(t["name"])
    known_all = known | {v.get("name") for v in views_doc if isinstance(v, dict)}

    tables = []
    for i, t in enumerate(tables_doc):
        path = f"$.tables[{i}]"
        attrs = []
        _expect(isinstance(t.get("attributes"), list), f"{path}.attributes", "expected a list")
        for j, a in enumerate(t["attributes"]):
            if isinstance(a, str):
                attrs.append(Attribute(a))
                continue
            _expect(isinstance(a, dict) and isinstance(a.get("name"), str), f"{path}.attributes[{j}]",
                    "attribute needs a name")
            attrs.append(Attribute(a["name"], bool(a.get("nullable", True))))
        pk = _names(t.get("primaryKey", []), f"{path}.primaryKey")
        uks = tuple(_names(u, f"{path}.uniqueKeys[{j}]") for j, u in enumerate(t.get("uniqueKeys", [])))
        fks = tuple(_fk(f, t["name"], f"{path}.foreignKeys[{j}]", known_all)
                    for j, f in enumerate(t.get("foreignKeys", [])))
        inds = []
        for j, d in enumerate(t.get("inclusionDeps", [])):
            p = f"{path}.inclusionDeps[{j}]"
            _expect(isinstance(d, dict) and "sourceProjection" in d, p, "missing 'sourceProjection'")
            proj = []
            for x in d["sourceProjection"]:
                if isinstance(x, dict) and "const" in x:
                    proj.append(Constant(str(x["const"])))
                elif isinstance(x, str):
                    proj.append(x)
                else:
                    raise SchemaDocError(p, "projection items are names or {\"const\": value}")
            tgt = _names(d.get("target", []), f"{p}.target")
            if len(tgt) != len(proj):
                raise DanglingReference(f"{p}: arity mismatch")
            if d.get("targetTable") not in known_all:
                raise DanglingReference(f"{p}: unknown target table {d.get('targetTable')!r}")
            try:
                inds.append(InclusionDependency(t["name"], tuple(proj), d["targetTable"], tgt,
                                                bool(d.get("declared", True))))
            except ModelError as e:
                raise SchemaDocError(p, str(e)) from None
        try:
            tables.append(Table(t["name"], tuple(attrs), pk, uks, fks, tuple(inds)))
        except ModelError as e:
            raise SchemaDocError(path, str(e)) from None

    schema = RelationalSchema(tuple(tables), (), doc.get("name", "schema"))
    for i, v in enumerate(views_doc):
        path = f"$.views[{i}]"
        _expect(isinstance(v, dict) and isinstance(v.get("name"), str) and isinstance(v.get("sql"), str),
                path, "view needs 'name' and 'sql'")
        try:
            expr = normalize_query(parse_sql(v["sql"], schema.columns_of))
        except (UnsupportedSql, ModelError, KeyError) as e:
            raise SchemaDocError(f"{path}.sql", str(e)) from None
        keys = tuple(_names(k, f"{path}.keys[{j}]") for j, k in enumerate(v.get("keys", [])))
        fks = tuple(_fk(f, v["name"], f"{path}.foreignKeys[{j}]", known_all)
                    for j, f in enumerate(v.get("foreignKeys", [])))
        try:
            view = ViewDef(v["name"], expr, keys, fks, v.get("origin", ""))
            schema = schema.with_views([view])
        except (ModelError, DanglingReference) as e:
            if isinstance(e, DanglingReference):
                raise
            raise SchemaDocError(path, str(e)) from None
    return schema


def schema_to_dict(schema: RelationalSchema) -> dict:
    def fk(f):
        d = {"source": list(f.source), "targetTable": f.target_table, "target": list(f.target)}
        if not f.declared:
            d["declared"] = False
        return d

    tables = []
    for t in schema.tables:
        td = {"name": t.name,
              "attributes": [{"name": a.name, "nullable": a.nullable} for a in t.attributes],
              "primaryKey": list(t.primary_key),
              "uniqueKeys": [list(u) for u in t.unique_keys],
              "foreignKeys": [fk(f) for f in t.foreign_keys]}
        if t.inclusion_deps:
            td["inclusionDeps"] = [
                {"sourceProjection": [{"const": x.value} if isinstance(x, Constant) else x
                                      for x in d.source_projection],
                 "targetTable": d.target_table, "target": list(d.target),
                 **({} if d.declared else {"declared": False})}
                for d in t.inclusion_deps]
        tables.append(td)
    out = {"name": schema.name, "tables": tables}
    if schema.views:
        out["views"] = []
        for v in schema.views:
            vd = {"name": v.name, "sql": emit_sql(v.expr), "keys": [list(k) for k in v.declared_keys],
                  "foreignKeys": [fk(f) for f in v.foreign_keys]}
            if v.origin:
                vd["origin"] = v.origin
            out["views"].append(vd)
    return out


def emit_schema_doc(schema: RelationalSchema) -> str:
    return json.dumps(schema_to_dict(schema), indent=2, ensure_ascii=False) + "\n"


def load_schema(text: str) -> RelationalSchema:
    """Auto-detect a schema document (JSON) or DDL text."""
    from .ddl import parse_ddl

    if text.lstrip().startswith("{"):
        return parse_schema_doc(text)
    return parse_ddl(text)
