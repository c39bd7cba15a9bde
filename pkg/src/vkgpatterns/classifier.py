"""Classification of existing mapping assertions against the pattern catalog.

Candidates are the instances detection finds on the schema (plus a few
variants a hand-written mapping may use).  Each candidate is generated, and
an assertion matches a candidate assertion when both select the same rows
(equal normalized cores) and every target atom of the assertion has the shape
of a candidate atom.  A shape keeps the atom kind and, per placeholder, the
source expression feeding it; predicate names and template text are ignored,
so renaming vocabulary or prefixes does not change the outcome.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Optional

from .errors import MalformedQuery, SchemaMismatch
from .generator import generate
from .hints import EMPTY_HINTS, ClusterCandidate, HintsDocument
from .model import (CATALOG, CLASS, DATA, DATA_COUNTERPARTS, DATA_ONLY_KINDS, DECLARED, DISCOVERED,
                    SCHEMA_KINDS, IRITemplate, PartitionSpec, PatternInstance, RelationalSchema,
                    sort_instances)
from .naming import Naming
from .patterns import Analysis, detect_all
from .profiler import DiscoveredConstraints, ProfilerConfig
from .query import (ColRef, Constant, Star, constants_selected, core, normalize_query, output_items,
                    qualify, relations, render_algebra, unfold_views)

log = logging.getLogger(__name__)

PRECEDENCE = {"DH01": 9, "DR1Nm": 8, "DR11m": 8, "CE2C": 8, "CE2D": 8, "CE2O": 8, "CR2O": 8,
              "SHaa": 7, "DHaa": 7, "SHa": 6, "DHa": 6, "SH": 5, "DH": 5, "SRR": 4, "DRR": 4,
              "SRa": 3, "DRa": 3, "SR": 2, "DR": 2, "SRm": 1, "DRm": 1, "SE": 0, "DE": 0}


@dataclass(frozen=True)
class Unknown:
    """An assertion matching no candidate; ``group`` decides which unknowns form one application."""

    group: str
    reason: str = ""


@dataclass(frozen=True)
class Application:
    """A classified application as read back from an assignments document."""

    kind: str
    key: str


def application_of(value, assertion_id: str = "") -> tuple:
    """``(kind, grouping key)`` with kind ``UNKNOWN`` for unmatched assertions."""
    if isinstance(value, PatternInstance):
        return value.kind, value.label
    if isinstance(value, Application):
        return value.kind, value.key
    if isinstance(value, Unknown):
        return "UNKNOWN", value.group
    return "UNKNOWN", assertion_id


# -- shapes --------------------------------------------------------------------

def _outputs(q, schema) -> dict:
    out = {}
    for it in output_items(q):
        if isinstance(it.expr, Star):
            for c in schema.columns_of(it.expr.relation):
                out.setdefault(c, ColRef(it.expr.relation, c))
        else:
            out[it.name] = it.expr
    return out


def _exprs(term, outs) -> tuple:
    if term is None:
        return ()
    if isinstance(term, str):
        names = (term,)
    else:
        names = term.placeholders
    got = tuple(outs.get(n, Constant("?" + n)) for n in names)
    # placeholder order inside an IRI is a naming choice, not a structural one
    return tuple(sorted(got, key=repr)) if isinstance(term, IRITemplate) else got


@dataclass(frozen=True)
class Signature:
    core: object
    shapes: frozenset
    projection: frozenset


def _prepare(source, schema: RelationalSchema, aid: str = ""):
    for r in relations(source):
        if not schema.has(r):
            raise SchemaMismatch(aid, r)
    q = qualify(source, schema.columns_of)
    views = schema.view_exprs()
    if any(r in views for r in relations(q)):
        q = unfold_views(q, views)
    return normalize_query(q)


def signature(assertion, schema: RelationalSchema) -> Signature:
    q = _prepare(assertion.source, schema, assertion.id)
    outs = _outputs(q, schema)
    shapes = set()
    for a in assertion.targets:
        kind = a.kind
        obj = a.object
        if kind == DATA and not isinstance(obj, str) and not obj.placeholders:
            oshape = ("constant",)
        elif kind == CLASS:
            oshape = ()
        else:
            oshape = _exprs(obj, outs)
        shapes.add((kind, _exprs(a.subject, outs), oshape))
    return Signature(core(q), frozenset(shapes), frozenset(outs.values()))


# -- candidates -------------------------------------------------------------------

def _selection_hints(doc, schema) -> list:
    """Cluster candidates for every ``attr = constant`` selection over a single relation."""
    found = {}
    for a in doc.assertions:
        if a.source is None:
            continue
        rels = relations(a.source)
        if len(set(rels)) != 1 or not schema.has(rels[0]):
            continue
        try:
            q = normalize_query(qualify(a.source, schema.columns_of))
        except MalformedQuery:
            continue
        consts = constants_selected(q)
        if not consts:
            continue
        cols = schema.columns_of(rels[0])
        attrs = tuple(sorted((c.attr for c in consts), key=cols.index))
        value = tuple(consts[ColRef(rels[0], x)].value for x in attrs)
        found.setdefault((rels[0], attrs), [])
        if value not in found[(rels[0], attrs)]:
            found[(rels[0], attrs)].append(value)
    return sorted(found.items())


def _augment(hints, doc, schema, constraints):
    sel = _selection_hints(doc, schema)
    have = {(c.table, tuple(c.attrs)) for c in hints.cluster_candidates}
    extra = tuple(ClusterCandidate(t, a) for (t, a), _ in sel if (t, a) not in have)
    hints = hints.merged(HintsDocument(cluster_candidates=extra))
    parts = []
    for (t, a), values in sel:
        if t in constraints.profiled:
            continue
        parts.append(PartitionSpec(t, a, tuple(sorted(values))))
    if parts:
        constraints = constraints.merge(DiscoveredConstraints(partitions=tuple(parts)))
    return hints, constraints


def _variants(result) -> list:
    """Extra candidates: an entity pattern for every keyed relation, other clustering flavors."""
    a = Analysis(result.derived_schema, result.constraints, result.hints, result.data)
    out = []
    have = {(i.main_table, i.kind) for i in result.instances}
    for rel in result.derived_schema.relations():
        if (rel.name, "SE") in have or (rel.name, "DE") in have:
            continue
        key, declared = a.ident(rel.name)
        if not key:
            continue
        kind = "SE" if declared else "DE"
        out.append(PatternInstance(kind, rel.name, {"K": key, "A": tuple(c for c in rel.attribute_names
                                                                          if c not in key)},
                                   DECLARED if declared else DISCOVERED))
    for i in result.instances:
        if i.kind != "CE2C":
            continue
        p = i.p
        vals = p["values"]
        out.append(PatternInstance("CE2D", i.main_table, i.bindings, DISCOVERED, i.refs, i.views,
                                   {"valueInvention"},
                                   {"values": vals, "property": p.get("property"),
                                    "invention": [(v, "|".join(v)) for v in vals]}))
        out.append(PatternInstance("CE2O", i.main_table, i.bindings, DISCOVERED, i.refs, i.views,
                                   (), {"values": vals, "property": p.get("property"), "template": None}))
    return out


@dataclass
class Candidate:
    instance: PatternInstance
    signatures: list


@dataclass
class Classification:
    assignments: dict
    report: "CoverageReport"
    log: list = field(default_factory=list)
    candidates: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.assignments, self.report))


def _rank(inst: PatternInstance, order: dict):
    return (-PRECEDENCE[inst.kind], 0 if inst.kind in SCHEMA_KINDS else 1, order[inst])


def classify(doc, schema: RelationalSchema, instance=None, hints: Optional[HintsDocument] = None,
             config: ProfilerConfig = ProfilerConfig(), constraints=None) -> Classification:
    """Assign every assertion of ``doc`` to a pattern instance or to :class:`Unknown`."""
    hints = hints or EMPTY_HINTS
    for a in doc.assertions:
        if a.source is not None:
            for r in relations(a.source):
                if not schema.has(r):
                    raise SchemaMismatch(a.id, r)
    if constraints is None and instance is not None:
        from .patterns import _partition_candidates
        from .profiler import profile
        constraints = profile(schema, instance, config, _partition_candidates(hints))
    constraints = constraints or DiscoveredConstraints()
    hints, constraints = _augment(hints, doc, schema, constraints)
    result = detect_all(schema, instance, hints, config, constraints=constraints)
    insts = list(result.instances) + _variants(result)
    naming = Naming(insts, result.derived_schema, hints)
    order = {i: n for n, i in enumerate(sort_instances(insts))}
    cands = []
    for i in insts:
        got, _ = generate(i, result.derived_schema, naming)
        cands.append(Candidate(i, [signature(g, result.derived_schema) for g in got]))
    lines = []
    assignments = {}
    for a in doc.assertions:
        if a.source is None:
            assignments[a.id] = Unknown(a.id, a.opaque_reason or "unsupported source")
            lines.append(f"{a.id}: UNKNOWN ({assignments[a.id].reason})")
            continue
        sig = signature(a, result.derived_schema)
        exact, partial = [], []
        for c in cands:
            for s in c.signatures:
                if s.core != sig.core or not sig.shapes <= s.shapes:
                    continue
                if s.shapes == sig.shapes and s.projection == sig.projection:
                    exact.append(c.instance)
                else:
                    partial.append(c.instance)
        pool = exact or partial
        if not pool:
            assignments[a.id] = Unknown(render_algebra(sig.core), "no catalog shape matches")
            lines.append(f"{a.id}: UNKNOWN (no catalog shape matches)")
            continue
        pool = sorted(set(pool), key=lambda i: _rank(i, order))
        best = pool[0]
        assignments[a.id] = best
        lines.append(f"{a.id}: {best.label}")
        others = sorted({i.kind for i in set(exact) | set(partial)} - {best.kind}, key=CATALOG.index)
        if others:
            lines.append(f"{a.id}: also matches {', '.join(others)}")
    return Classification(assignments, build_report(assignments), lines, insts)


# -- reports -----------------------------------------------------------------------

@dataclass(frozen=True)
class CoverageReport:
    rows: tuple  # ((kind, applications, mappings), ...) in catalog order
    unknown: tuple  # (applications, mappings)
    totals: tuple
    shares: tuple  # (schema-driven %, data-driven %, unknown %)

    def row(self, kind: str) -> tuple:
        for k, a, m in self.rows:
            if k == kind:
                return a, m
        return 0, 0


def largest_remainder(counts, total_units: int = 1000) -> list:
    """Integer shares of ``total_units`` proportional to ``counts``, summing exactly."""
    total = sum(counts)
    if total == 0:
        return [0] * len(counts)
    raw = [c * total_units / total for c in counts]
    out = [int(x) for x in raw]
    rest = total_units - sum(out)
    order = sorted(range(len(counts)), key=lambda i: (-(raw[i] - out[i]), i))
    for i in order[:rest]:
        out[i] += 1
    return out


def build_report(assignments: dict) -> CoverageReport:
    apps, maps = {}, {}
    for aid in sorted(assignments):
        kind, key = application_of(assignments[aid], aid)
        apps.setdefault(kind, set()).add(key)
        maps[kind] = maps.get(kind, 0) + 1
    rows = tuple((k, len(apps.get(k, ())), maps.get(k, 0)) for k in CATALOG)
    unknown = (len(apps.get("UNKNOWN", ())), maps.get("UNKNOWN", 0))
    totals = (sum(r[1] for r in rows) + unknown[0], sum(r[2] for r in rows) + unknown[1])
    s = sum(a for k, a, _ in rows if k in SCHEMA_KINDS)
    d = sum(a for k, a, _ in rows if k in DATA_COUNTERPARTS or k in DATA_ONLY_KINDS)
    tenths = largest_remainder([s, d, unknown[0]])
    return CoverageReport(rows, unknown, totals, tuple(t / 10 for t in tenths))


def format_report(report: CoverageReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pattern", "applications", "mappings"])
        for k, a, m in report.rows:
            w.writerow([k, a, m])
        w.writerow(["UNKNOWN", *report.unknown])
        w.writerow(["TOTAL", *report.totals])
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [f"{'Pattern':<10}{'Apps':>6}{'Maps':>6}"]
    for k, a, m in report.rows + (("UNKNOWN",) + report.unknown,):
        cell = (f"{a:>6}{m:>6}") if a or m else f"{'--':>6}{'--':>6}"
        lines.append(f"{k:<10}{cell}")
    lines.append(f"{'Total':<10}{report.totals[0]:>6}{report.totals[1]:>6}")
    sc, da, un = report.shares
    lines.append(f"schema-driven {sc:.1f}%  data-driven {da:.1f}%  unknown {un:.1f}%")
    return "\n".join(lines) + "\n"


def report_to_dict(report: CoverageReport) -> dict:
    return {"rows": [{"pattern": k, "applications": a, "mappings": m} for k, a, m in report.rows],
            "unknown": {"applications": report.unknown[0], "mappings": report.unknown[1]},
            "totals": {"applications": report.totals[0], "mappings": report.totals[1]},
            "shares": {"schema": report.shares[0], "data": report.shares[1], "unknown": report.shares[2]}}


def assignments_to_dict(assignments: dict) -> dict:
    out = {}
    for aid in sorted(assignments):
        v = assignments[aid]
        kind, key = application_of(v, aid)
        entry = {"kind": kind, "application": key}
        if isinstance(v, PatternInstance):
            entry["table"] = v.main_table
            entry["bindings"] = {k: list(x) for k, x in v.bindings}
        elif isinstance(v, Unknown):
            entry["reason"] = v.reason
        out[aid] = entry
    return out


def assignments_from_dict(doc: dict) -> dict:
    out = {}
    for aid, e in doc.items():
        if not isinstance(e, dict) or "kind" not in e:
            raise ValueError(f"assignment {aid!r} lacks a kind")
        if e["kind"] == "UNKNOWN":
            out[aid] = Unknown(e.get("application", aid), e.get("reason", ""))
        elif e["kind"] in CATALOG:
            out[aid] = Application(e["kind"], e.get("application", aid))
        else:
            raise ValueError(f"assignment {aid!r} has unknown kind {e['kind']!r}")
    return out
