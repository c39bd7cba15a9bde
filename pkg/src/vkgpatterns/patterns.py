"""Pattern detection over a schema, its discovered constraints and hints.

Each relation is examined once per round, in this order of specificity:
relationship shapes (SR, SRa, SRR and DH01), hierarchy shapes (SH, SHa,
SHaa), then the entity pattern.  Entity tables and hierarchy children are also
checked for merged references (SRm) and, with data, for merged entities
(DR1Nm, DR11m).  Clustering applies on top of the base pattern when a hint
names a partition that holds in the data.

DR1Nm and DR11m emit a view ``V_F`` holding the merged entity.  The next round
profiles those views and detects on them, until no new ``V_F`` appears.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Optional

from .errors import FixpointOverflow
from .hints import EMPTY_HINTS, HintsDocument, validate_hints
from .ingest.csvdata import DataInstance
from .model import (DECLARED, DISCOVERED, SCHEMA_KINDS, ForeignKey, InclusionDependency,
                    PatternInstance, RelationalSchema, ViewDef, data_counterpart, sort_instances)
from .naming import entity_name_from_key
from .profiler import DiscoveredConstraints, ProfilerConfig, profile
from .query import (ColRef, ConstEq, Constant, Join, Relation, Select, evaluate, normalize_query,
                    project, unfold_views)

log = logging.getLogger(__name__)

EMPTY_CONSTRAINTS = DiscoveredConstraints()


@dataclass(frozen=True)
class DetectionResult:
    instances: tuple
    derived_schema: RelationalSchema
    log: tuple = ()
    constraints: DiscoveredConstraints = EMPTY_CONSTRAINTS
    hints: HintsDocument = EMPTY_HINTS
    data: Optional[DataInstance] = None
    rounds: int = 1

    def of_kind(self, kind: str) -> list:
        return [i for i in self.instances if i.kind == kind]

    def kinds(self) -> list:
        return sorted({i.kind for i in self.instances})

    def log_text(self) -> str:
        return "".join(line + "\n" for line in self.log)


def _kind(schema_kind: str, declared: bool) -> str:
    return schema_kind if declared else data_counterpart(schema_kind)


def _prov(kind: str) -> str:
    return DECLARED if kind in SCHEMA_KINDS else DISCOVERED


def _view_name(taken, base: str) -> str:
    name = re.sub(r"[^A-Za-z0-9_]+", "_", base)
    out, n = name, 2
    while out in taken:
        out = f"{name}_{n}"
        n += 1
    taken.add(out)
    return out


def _origin_base(view: Optional[ViewDef]) -> Optional[str]:
    if view is None or ":" not in view.origin:
        return None
    return view.origin.split(":", 1)[1]


class Analysis:
    """Per-round state: working schema, constraints, hints, data and the log."""

    def __init__(self, schema: RelationalSchema, constraints: DiscoveredConstraints = EMPTY_CONSTRAINTS,
                 hints: HintsDocument = EMPTY_HINTS, data: Optional[DataInstance] = None):
        self.schema = schema
        self.dc = constraints
        self.hints = hints
        self.data = data
        self.lines = []
        self.taken = {r.name for r in schema.relations()}

    def note(self, table: str, text: str):
        self.lines.append(f"{table}: {text}")

    # -- identifiers and references ---------------------------------------

    def ident(self, table: str):
        """``(key, declared)`` or ``(None, False)``."""
        rel = self.schema.relation(table)
        view = self.schema.view(table)
        if rel.primary_key:
            declared = view is None or view.origin.split(":", 1)[0] in SCHEMA_KINDS
            return tuple(rel.primary_key), declared
        keys = self.dc.keys_of(table)
        if keys:
            best = sorted(keys, key=lambda k: (len(k), tuple(k)))[0]
            return tuple(best), False
        return None, False

    def non_pk_keys(self, table: str) -> list:
        """``(key, declared)`` for unique keys besides the identifier."""
        rel = self.schema.relation(table)
        ident, _ = self.ident(table)
        view = self.schema.view(table)
        decl = view is None or view.origin.split(":", 1)[0] in SCHEMA_KINDS
        out = [(tuple(u), decl) for u in rel.unique_keys]
        seen = {frozenset(k) for k, _ in out}
        if ident:
            seen.add(frozenset(ident))
        for k in self.dc.keys_of(table):
            if frozenset(k) not in seen:
                seen.add(frozenset(k))
                out.append((tuple(k), False))
        return out

    def target_type(self, fk) -> Optional[str]:
        """``pk`` when ``fk`` targets the identifier, ``uk`` for another key, else ``None``."""
        if not self.schema.has(fk.target_table):
            return None
        ident, _ = self.ident(fk.target_table)
        if ident and set(fk.target) == set(ident):
            return "pk"
        if any(set(fk.target) == set(k) for k, _ in self.non_pk_keys(fk.target_table)):
            return "uk"
        return None

    def _lineage(self, a: str, b: str) -> bool:
        va, vb = self.schema.view(a), self.schema.view(b)
        ba, bb = _origin_base(va), _origin_base(vb)
        return ba == b or bb == a or (ba is not None and ba == bb)

    def refs(self, table: str) -> list:
        """Declared references followed by usable discovered ones."""
        rel = self.schema.relation(table)
        out = list(rel.foreign_keys)
        have = {(f.source, f.target_table, frozenset(f.target)) for f in out}
        have |= {(tuple(sorted(f.source)), f.target_table, frozenset(f.target)) for f in out}
        declared_uks = lambda t: {frozenset(u) for u in self.schema.relation(t).unique_keys}
        ident, _ = self.ident(table)
        for d in self.dc.inds_from(table):
            if not isinstance(d, ForeignKey) or not self.schema.has(d.target_table):
                continue
            if d.target_table == table and ident and set(d.source) == set(ident):
                continue
            if (d.source, d.target_table, frozenset(d.target)) in have:
                continue
            if (tuple(sorted(d.source)), d.target_table, frozenset(d.target)) in have:
                continue
            if self._lineage(table, d.target_table):
                continue
            tident, _ = self.ident(d.target_table)
            if not ((tident and set(d.target) == set(tident)) or frozenset(d.target) in declared_uks(d.target_table)):
                continue
            # equal value sets between two identifiers: direction unknown
            if ident and set(d.source) == set(ident) and any(
                    isinstance(r, ForeignKey) and r.target_table == table and set(r.source) == set(d.target)
                    and set(r.target) == set(d.source) for r in self.dc.inds_from(d.target_table)):
                self.note(table, f"mutual inclusion with {d.target_table}{list(d.target)}; not used")
                continue
            have.add((d.source, d.target_table, frozenset(d.target)))
            out.append(d)
        return out

    def has_data(self, table: str) -> bool:
        return table in self.dc.profiled

    def _rows(self, table):
        if self.data is None or not self.data.has(table):
            return None
        return self.data.columns[table], self.data.rows(table)

    # -- relationships -------------------------------------------------------

    def _covers(self, key, refs):
        """Exact covers of ``key`` by disjoint reference sources."""
        inside = [r for r in refs if set(r.source) <= set(key)]
        out = []

        def rec(rest, chosen, used):
            if used == set(key):
                out.append(list(chosen))
                return
            first = min((a for a in key if a not in used), key=list(key).index)
            for r in inside:
                if first in r.source and not (set(r.source) & used) and r not in chosen:
                    rec(rest, chosen + [r], used | set(r.source))

        rec(None, [], set())
        cols = list(self.schema.relation(inside[0].table).attribute_names) if inside else []

        def rank(c):
            return (sum(not r.declared for r in c), -len(c),
                    [(min(cols.index(a) for a in r.source), r.target_table) for r in c])

        return sorted(out, key=rank)

    def _order_roles(self, table, roles):
        cols = list(self.schema.relation(table).attribute_names)
        return sorted(roles, key=lambda r: (min(cols.index(a) for a in r.source), r.target_table))

    def detect_relationship(self, table: str):
        """SR/DR, SRa/DRa, SRR/DRR and DH01 on ``table``; ``(instances, used refs)`` or ``None``."""
        rel = self.schema.relation(table)
        key, kdecl = self.ident(table)
        if not key:
            return None
        refs = [r for r in self.refs(table) if self.target_type(r)]
        attrs = list(rel.attribute_names)
        covers = [c for c in self._covers(key, refs) if len(c) >= 2]
        if not covers:
            return self._one_sided(table, key, kdecl, refs, attrs)
        cover = self._order_roles(table, covers[0])
        outer, used = [], set(key)
        for r in refs:
            if not (set(r.source) & used) and r not in cover:
                outer.append(r)
                used |= set(r.source)
        outer = self._order_roles(table, outer)
        a_r = tuple(a for a in attrs if a not in used)
        roles = cover + outer
        declared = kdecl and all(r.declared for r in roles)
        aligned = [r for r in roles if self.target_type(r) == "uk"]
        if len(roles) == 2 and not a_r:
            if len(aligned) == 2:
                self.note(table, "both roles reference non-primary keys; unsupported")
                return None
            e, f = roles
            if aligned:
                f = aligned[0]
                e = roles[0] if roles[1] is f else roles[1]
                kind = _kind("SRa", declared)
                inst = PatternInstance(kind, table, {"K_RE": e.source, "K_RF": f.source, "U_F": f.target},
                                       _prov(kind), {"E": e.target_table, "F": f.target_table},
                                       modifiers={"identifierAlignment"},
                                       params={"targets": {"E": e.target, "F": f.target},
                                               "identifying": "both"})
                return [inst], roles
            return self._binary(table, e, f, declared, "both"), roles
        letters = "EFGHIJKLMNOPQSTUVWXYZ"
        binds = {"K_R": key, "A_R": a_r}
        refmap, targets, al = {}, {}, []
        for i, r in enumerate(roles):
            c = letters[i]
            binds[f"K_R{c}"] = r.source
            refmap[c] = r.target_table
            targets[c] = r.target
            if r in aligned:
                al.append(c)
        kind = _kind("SRR", declared)
        inst = PatternInstance(kind, table, binds, _prov(kind), refmap,
                               modifiers={"identifierAlignment"} if al else (),
                               params={"targets": targets, "aligned": al,
                                       "identifying": [letters[i] for i in range(len(cover))]})
        return [inst], roles

    def _one_sided(self, table, key, kdecl, refs, attrs):
        """PK equal to one reference plus exactly one other reference: SR with (_,1) on role E."""
        whole = [r for r in refs if set(r.source) == set(key) and self.target_type(r) == "pk"]
        if not whole:
            return None
        e = whole[0]
        others = [r for r in refs if not (set(r.source) & set(key))]
        rest = [a for a in attrs if a not in key]
        if len(others) != 1 or set(rest) != set(others[0].source):
            return None
        f = others[0]
        declared = kdecl and e.declared and f.declared
        if self.target_type(f) == "uk":
            kind = _kind("SRa", declared)
            inst = PatternInstance(kind, table, {"K_RE": e.source, "K_RF": f.source, "U_F": f.target},
                                   _prov(kind), {"E": e.target_table, "F": f.target_table},
                                   modifiers={"identifierAlignment"},
                                   params={"targets": {"E": e.target, "F": f.target}, "identifying": "E"})
            return [inst], [e, f]
        return self._binary(table, e, f, declared, "E"), [e, f]

    def _binary(self, table, e, f, declared, identifying):
        part = self._participation(table, e)
        if part is not None:
            kind = "DH01"
            ekey, _ = self.ident(e.target_table)
            erel = self.schema.relation(e.target_table)
            a_e = tuple(a for a in erel.attribute_names if a not in ekey)
            name = _view_name(self.taken, f"{e.target_table}__{table}")
            q = project(Join(Relation(table), Relation(e.target_table),
                             tuple((ColRef(table, s), ColRef(e.target_table, t)) for s, t in zip(e.source, e.target))),
                        [ColRef(e.target_table, a) for a in ekey + a_e])
            view = ViewDef(name, self._base_expr(q), (ekey,), (), f"DH01:{table}")
            return [PatternInstance(kind, table, {"K_RE": e.source, "K_RF": f.source, "K_E": ekey, "A_E": a_e},
                                    DISCOVERED, {"E": e.target_table, "F": f.target_table}, (view,),
                                    params={"targets": {"E": e.target, "F": f.target},
                                            "coverage": f"{part.covered}/{part.total}", "view": name})]
        kind = _kind("SR", declared)
        return [PatternInstance(kind, table, {"K_RE": e.source, "K_RF": f.source}, _prov(kind),
                                {"E": e.target_table, "F": f.target_table},
                                params={"targets": {"E": e.target, "F": f.target}, "identifying": identifying})]

    def _participation(self, table, e):
        for p in self.dc.optional_participations:
            if p.rel_table == table and p.target_table == e.target_table and set(p.source) == set(e.source):
                self.note(table, f"role {list(e.source)} covers {p.covered}/{p.total} of {e.target_table}")
                return p
        return None

    # -- hierarchies -----------------------------------------------------------

    def detect_hierarchy(self, table: str):
        """SH/DH, SHa/DHa (three sub-cases) or SHaa/DHaa; ``(instances, used refs)`` or ``None``."""
        rel = self.schema.relation(table)
        key, kdecl = self.ident(table)
        if not key:
            return None
        attrs = list(rel.attribute_names)
        refs = self.refs(table)
        whole = [r for r in refs if set(r.source) == set(key) and r.target_table != table]
        for r in whole:
            if self.target_type(r) == "pk":
                kind = _kind("SH", kdecl and r.declared)
                inst = PatternInstance(kind, table, {"K_FE": r.source,
                                                     "A_F": tuple(a for a in attrs if a not in r.source)},
                                       _prov(kind), {"E": r.target_table}, params={"target": r.target})
                return [inst], [r]
        for r in whole:
            if self.target_type(r) == "uk":
                kind = _kind("SHa", kdecl and r.declared and self._uk_declared(r.target_table, r.target))
                inst = PatternInstance(kind, table, {"K_F": key, "U_F": r.source,
                                                     "A_F": tuple(a for a in attrs if a not in key)},
                                       _prov(kind), {"E": r.target_table}, modifiers={"identifierAlignment"},
                                       params={"subcase": "a", "target": r.target})
                return [inst], [r]
        for u, udecl in self.non_pk_keys(table):
            for r in refs:
                if set(r.source) != set(u) or r.target_table == table:
                    continue
                tt = self.target_type(r)
                if tt is None:
                    continue
                a_f = tuple(a for a in attrs if a not in key and a not in r.source)
                if tt == "pk":
                    declared = kdecl and udecl and r.declared
                    kind = _kind("SHa", declared)
                    name = _view_name(self.taken, f"{table}__by_{'_'.join(r.source)}")
                    q = project(Relation(table), [ColRef(table, a) for a in attrs])
                    fk = ForeignKey(name, r.source, r.target_table, r.target, r.declared)
                    view = ViewDef(name, self._base_expr(q), (tuple(r.source), key), (fk,), f"{kind}:{table}")
                    inst = PatternInstance(kind, table, {"K_F": key, "U_F": r.source, "A_F": a_f}, _prov(kind),
                                           {"E": r.target_table}, (view,), {"identifierAlignment"},
                                           {"subcase": "depicted", "target": r.target, "view": name})
                else:
                    declared = kdecl and udecl and r.declared and self._uk_declared(r.target_table, r.target)
                    kind = _kind("SHa", declared)
                    inst = PatternInstance(kind, table, {"K_F": key, "U_F": r.source, "A_F": a_f}, _prov(kind),
                                           {"E": r.target_table}, modifiers={"identifierAlignment"},
                                           params={"subcase": "b", "target": r.target})
                return [inst], [r]
        inds = [(d, True) for d in rel.inclusion_deps]
        inds += [(d, False) for d in self.dc.inds_from(table) if isinstance(d, InclusionDependency)]
        for d, declared_ind in inds:
            if set(d.attrs) != set(key) or d.target_table == table or not self.schema.has(d.target_table):
                continue
            tkey, _ = self.ident(d.target_table)
            if not tkey or set(tkey) != set(d.target) or self._lineage(table, d.target_table):
                continue
            kind = _kind("SHaa", kdecl and declared_ind and d.declared)
            k_ef = tuple(t for x, t in zip(d.source_projection, d.target) if not isinstance(x, Constant))
            inst = PatternInstance(kind, table, {"K_F": d.attrs, "K_EF": k_ef,
                                                 "A_F": tuple(a for a in attrs if a not in key)},
                                   _prov(kind), {"E": d.target_table}, modifiers={"constantAlignment"},
                                   params={"projection": d.source_projection, "target": d.target,
                                           "constants": [(t, c.value) for t, c in d.constants]})
            return [inst], []
        return None

    def _uk_declared(self, table, attrs) -> bool:
        return any(set(u) == set(attrs) and d for u, d in self.non_pk_keys(table))

    # -- merged references -----------------------------------------------------

    def detect_merged_relationship(self, table: str, used=()) -> list:
        """One SRm/DRm per reference disjoint from the identifier and not used elsewhere."""
        key, kdecl = self.ident(table)
        if not key:
            return []
        out = []
        for r in self.refs(table):
            if r in used or set(r.source) & set(key):
                continue
            tt = self.target_type(r)
            if tt != "pk":
                self.note(table, f"reference {list(r.source)} -> {r.target_table} "
                                 f"{'targets a non-primary key' if tt else 'has no identifier target'}; no SRm")
                continue
            kind = _kind("SRm", kdecl and r.declared)
            out.append(PatternInstance(kind, table, {"K_E": key, "K_EF": r.source}, _prov(kind),
                                       {"F": r.target_table}, params={"target": r.target}))
        return out

    # -- merged entities -------------------------------------------------------

    def _closure(self, table, attrs) -> set:
        cl = set(attrs)
        fds = self.dc.fds_of(table)
        changed = True
        while changed:
            changed = False
            for f in fds:
                if set(f.determinant) <= cl and not set(f.dependent) <= cl:
                    cl |= set(f.dependent)
                    changed = True
        return cl

    def _null_free(self, table, attrs) -> bool:
        got = self._rows(table)
        if got is None:
            return False
        cols, rows = got
        idx = [cols.index(a) for a in attrs]
        return all(r[i] is not None for r in rows for i in idx)

    def _view_label(self, table, kf) -> Optional[str]:
        labels = self.hints.labels
        return labels.get(f"{table}.{','.join(kf)}")

    def detect_denormalized_1N(self, table: str) -> list:
        """DR1Nm for each top-level non-key determinant with dependents."""
        if not self.has_data(table):
            return []
        key, _ = self.ident(table)
        if not key:
            return []
        rel = self.schema.relation(table)
        cols = list(rel.attribute_names)
        cands = []
        for f in self.dc.fds_of(table):
            x = tuple(f.determinant)
            if not x or set(x) & set(key) or x in cands:
                continue
            if not self._null_free(table, x):
                self.note(table, f"determinant {list(x)} has nulls; no DR1Nm")
                continue
            cands.append(x)
        if not cands:
            return []
        cl = {x: self._closure(table, x) for x in cands}
        # collapse mutually equivalent determinants
        canon = {}
        for x in sorted(cands, key=lambda k: (len(k), [cols.index(a) for a in k])):
            rep = next((y for y in canon.values() if set(x) <= cl[y] and set(y) <= cl[x]), None)
            canon[x] = rep if rep is not None else x
        reps = sorted(set(canon.values()), key=lambda k: (len(k), [cols.index(a) for a in k]))
        top = [x for x in reps if not any(y != x and set(x) <= cl[y] for y in reps)]
        labels = {x: self._view_label(table, x) or entity_name_from_key(x) for x in top}
        claims = {}
        for x in top:
            for a in cl[x] - set(key) - set(x):
                claims.setdefault(a, []).append(x)
        af = {x: [] for x in top}
        for a in cols:
            owners = claims.get(a, [])
            if not owners:
                continue
            hinted = self.hints.owner(table, a)
            if hinted is not None:
                chosen = [x for x in owners if labels[x] == hinted]
                if chosen:
                    af[chosen[0]].append(a)
                else:
                    self.note(table, f"{a} hinted to {hinted}; stays with the entity")
                continue
            if len(owners) == 1:
                af[owners[0]].append(a)
            else:
                self.note(table, f"{a} is determined by several candidates; stays with the entity")
        out = []
        for x in top:
            if not af[x]:
                self.note(table, f"determinant {list(x)} leaves no attributes for a merged entity")
                continue
            out.append(self._merged_instance("DR1Nm", table, key, x, tuple(af[x]), labels[x]))
        return out

    def detect_merged_11(self, table: str, used_keys=()) -> list:
        """DR11m for hinted additional keys (see the ledger for the gating rule)."""
        if not self.has_data(table):
            return []
        key, _ = self.ident(table)
        if not key:
            return []
        rel = self.schema.relation(table)
        cols = list(rel.attribute_names)
        excluded = {frozenset(key)} | {frozenset(u) for u in rel.unique_keys}
        excluded |= {frozenset(r.source) for r in self.refs(table)}
        excluded |= {frozenset(k) for k in used_keys}
        for other in self.schema.relations():
            for r in list(other.foreign_keys) + [d for d in self.dc.inds_from(other.name)
                                                  if isinstance(d, ForeignKey)]:
                if r.target_table == table:
                    excluded.add(frozenset(r.target))
        cands = [k for k in self.dc.keys_of(table) if frozenset(k) not in excluded]
        owners = {}
        for a in cols:
            o = self.hints.owner(table, a)
            if o is not None:
                owners.setdefault(o, []).append(a)
        out, taken = [], set()
        for owner, owned in sorted(owners.items()):
            keyed = [k for k in cands if set(k) <= set(owned)]
            if not keyed:
                free = [k for k in cands if len(k) == 1 and not any(self.hints.owner(table, a) for a in k)]
                if len(free) == 1:
                    keyed = free
            if not keyed:
                continue
            kf = sorted(keyed, key=lambda k: (len(k), [cols.index(a) for a in k]))[0]
            if frozenset(kf) in taken:
                continue
            taken.add(frozenset(kf))
            a_f = tuple(a for a in owned if a not in kf and a not in key)
            out.append(self._merged_instance("DR11m", table, key, kf, a_f, owner))
        for k in cands:
            if frozenset(k) not in taken:
                label = self._view_label(table, k)
                if label is not None and len(k) == 1:
                    taken.add(frozenset(k))
                    out.append(self._merged_instance("DR11m", table, key, k, (), label))
                else:
                    self.note(table, f"additional key {list(k)} has no ownership hint; no DR11m")
        return out

    def _merged_instance(self, kind, table, key, kf, af, label):
        rel = self.schema.relation(table)
        cols = list(rel.attribute_names)
        a_e = tuple(a for a in cols if a not in key and a not in kf and a not in af)
        stem = "_".join(kf)
        ve = _view_name(self.taken, f"{table}__sans_{stem}")
        vf = _view_name(self.taken, f"{table}__{stem}")
        vr = _view_name(self.taken, f"{table}__{stem}_link")

        def view(name, attrs, keys, fks=()):
            q = project(Relation(table), [ColRef(table, a) for a in attrs])
            return ViewDef(name, self._base_expr(q), keys, fks, f"{kind}:{table}")

        views = (view(ve, key + a_e, (key,)),
                 view(vf, kf + af, (kf,)),
                 view(vr, key + kf, (key,), (ForeignKey(vr, key, ve, key, False),
                                             ForeignKey(vr, kf, vf, kf, False))))
        return PatternInstance(kind, table, {"K_E": key, "A_E": a_e, "K_F": kf, "A_F": af}, DISCOVERED,
                               {"F": vf}, views,
                               params={"label": label, "ve": ve, "vf": vf, "vr": vr})

    # -- clustering -----------------------------------------------------------

    def detect_clustering(self, table: str, base: Optional[PatternInstance]) -> list:
        """Clustering instances for hinted candidates whose partition holds in the data."""
        out = []
        for cand in self.hints.clusters_for(table):
            part = next((p for p in self.dc.partitions_of(table) if tuple(p.attrs) == tuple(cand.attrs)), None)
            if part is None:
                self.note(table, f"cluster candidate {list(cand.attrs)} is not a partition of the data")
                continue
            if base is not None and base.kind in ("SR", "DR", "DH01", "SRa", "DRa"):
                b = base.b
                if base.kind in ("SRa", "DRa"):
                    self.note(table, "clustering over an aligned relationship is not supported")
                    continue
                if not set(cand.attrs) <= set(b["K_RE"]) | set(b["K_RF"]):
                    self.note(table, f"{list(cand.attrs)} is not within the relationship roles; no CR2O")
                    continue
                if cand.flavor not in (None, "CR2O"):
                    self.note(table, f"flavor {cand.flavor} does not apply to a relationship")
                    continue
                views = self._cluster_views(table, cand.attrs, part.values, (b["K_RE"] + b["K_RF"],))
                out.append(PatternInstance("CR2O", table, {"K_RE": b["K_RE"], "K_RF": b["K_RF"], "B": cand.attrs},
                                           DISCOVERED, base.refs, views,
                                           params={"values": part.values, "targets": base.p["targets"],
                                                   "property": cand.property}))
                continue
            key, _ = self.ident(table)
            if not key or base is None:
                self.note(table, "clustering needs an identified entity")
                continue
            flavor = cand.flavor or ("CE2D" if cand.value_invention else
                                     "CE2O" if cand.value_template else "CE2C")
            if flavor == "CR2O":
                self.note(table, "CR2O needs a relationship table")
                continue
            params = {"values": part.values, "property": cand.property}
            mods = ()
            if flavor == "CE2D":
                xi = cand.invention_map()
                if not all(tuple(v) in xi for v in part.values):
                    self.note(table, f"value invention for {list(cand.attrs)} misses some values; no CE2D")
                    continue
                params["invention"] = [(v, xi[tuple(v)]) for v in part.values]
                mods = ("valueInvention",)
            if flavor == "CE2O":
                params["template"] = cand.value_template
            views = self._cluster_views(table, cand.attrs, part.values, (key,))
            out.append(PatternInstance(flavor, table, {"K": key, "B": cand.attrs}, DISCOVERED, (), views,
                                       mods, params))
        return out

    def _cluster_views(self, table, attrs, values, keys):
        cols = self.schema.columns_of(table)
        views = []
        for v in values:
            name = _view_name(self.taken, f"{table}__{'_'.join(attrs)}_{'_'.join(v)}")
            sel = Select(Relation(table), tuple(ConstEq(ColRef(table, a), Constant(x)) for a, x in zip(attrs, v)))
            q = project(sel, [ColRef(table, c) for c in cols])
            views.append(ViewDef(name, self._base_expr(q), keys, (), f"cluster:{table}"))
        return tuple(views)

    def _base_expr(self, q):
        return normalize_query(unfold_views(q, self.schema.view_exprs()))

    # -- entities --------------------------------------------------------------

    def detect_entity(self, table: str, claimed=()) -> Optional[PatternInstance]:
        key, kdecl = self.ident(table)
        if not key:
            self.note(table, "no declared or discovered key; no entity pattern")
            return None
        attrs = self.schema.columns_of(table)
        kind = "SE" if kdecl else "DE"
        return PatternInstance(kind, table, {"K": key, "A": tuple(a for a in attrs if a not in key and a not in claimed)},
                               _prov(kind))

    # -- one relation -------------------------------------------------------------

    def _keep(self, inst: PatternInstance) -> bool:
        attrs = {"SRm": "K_EF", "DRm": "K_EF", "DR1Nm": "K_F", "DR11m": "K_F"}.get(inst.kind)
        if inst.kind in ("CE2C", "CE2D", "CE2O", "CR2O"):
            attrs = "B"
        if self.hints.suppressed(inst.kind, inst.main_table, inst.b[attrs] if attrs else None):
            self.note(inst.main_table, f"{inst.label} suppressed by hints")
            return False
        return True

    def detect_table(self, table: str) -> list:
        out = []
        base = None
        role = None
        used = []
        got = self.detect_relationship(table)
        if got is not None and all(self._keep(i) for i in got[0]):
            out.extend(got[0])
            base, used, role = got[0][0], got[1], "relationship"
        if role is None:
            got = self.detect_hierarchy(table)
            if got is not None and all(self._keep(i) for i in got[0]):
                out.extend(got[0])
                base, used, role = got[0][0], got[1], "child"
        if role is None:
            merged = self.detect_denormalized_1N(table)
            merged += self.detect_merged_11(table, [i.b["K_F"] for i in merged])
            merged = [i for i in merged if self._keep(i)]
            claimed = {a for i in merged for a in i.b["K_F"] + i.b["A_F"]}
            ent = self.detect_entity(table, claimed)
            if ent is not None and self._keep(ent):
                out.append(ent)
                base, role = ent, "entity"
            out.extend(merged)
        if role in ("entity", "child"):
            out.extend(i for i in self.detect_merged_relationship(table, used) if self._keep(i))
        if role is not None:
            out.extend(i for i in self.detect_clustering(table, base) if self._keep(i))
        if role is None:
            self.note(table, "no pattern applies")
        for i in out:
            self.note(table, f"detected {i.label}")
        return out


# -- public single-table detectors -------------------------------------------------

def _analysis(schema, constraints, hints, data=None):
    return Analysis(schema, constraints or EMPTY_CONSTRAINTS, hints or EMPTY_HINTS, data)


def detect_entity(schema, table, constraints=None, hints=None) -> Optional[PatternInstance]:
    return _analysis(schema, constraints, hints).detect_entity(table)


def detect_relationship(schema, table, constraints=None, hints=None) -> Optional[PatternInstance]:
    got = _analysis(schema, constraints, hints).detect_relationship(table)
    if got is None:
        return None
    inst = got[0][0]
    return inst if inst.kind in ("SR", "DR", "SRa", "DRa") else None


def detect_reified_relationship(schema, table, constraints=None, hints=None) -> Optional[PatternInstance]:
    got = _analysis(schema, constraints, hints).detect_relationship(table)
    if got is None:
        return None
    inst = got[0][0]
    return inst if inst.kind in ("SRR", "DRR") else None


def detect_merged_relationship(schema, table, constraints=None, hints=None) -> list:
    return _analysis(schema, constraints, hints).detect_merged_relationship(table)


def detect_hierarchy(schema, table, constraints=None, hints=None) -> Optional[PatternInstance]:
    got = _analysis(schema, constraints, hints).detect_hierarchy(table)
    return got[0][0] if got else None


def detect_denormalized_1N(schema, table, constraints, hints=None, data=None) -> list:
    return _analysis(schema, constraints, hints, data).detect_denormalized_1N(table)


def detect_merged_11(schema, table, constraints, hints=None, data=None) -> list:
    return _analysis(schema, constraints, hints, data).detect_merged_11(table)


def detect_optional_participation(schema, table, constraints) -> Optional[PatternInstance]:
    got = _analysis(schema, constraints, None).detect_relationship(table)
    if got is None:
        return None
    inst = got[0][0]
    return inst if inst.kind == "DH01" else None


def detect_clustering(schema, table, constraints, hints) -> list:
    a = _analysis(schema, constraints, hints)
    base = None
    got = a.detect_relationship(table)
    if got is not None:
        base = got[0][0]
    else:
        got = a.detect_hierarchy(table)
        base = got[0][0] if got else a.detect_entity(table)
    return a.detect_clustering(table, base)


# -- driver ------------------------------------------------------------------------

def _partition_candidates(hints: HintsDocument) -> dict:
    out = {}
    for c in hints.cluster_candidates:
        if len(c.attrs) > 1:
            out.setdefault(c.table, []).append(c.attrs)
    return out


def _materialize(schema: RelationalSchema, data: DataInstance, views) -> DataInstance:
    tables = data.eval_tables()
    exprs = schema.view_exprs()
    for v in views:
        if not all(data.has(r) for r in _base_relations(v.expr)):
            continue
        cols, rows = evaluate(v.expr, tables, exprs)
        data = data.with_relation(v.name, cols, sorted(rows, key=lambda r: tuple("" if x is None else x for x in r)))
        tables = data.eval_tables()
    return data


def _base_relations(q):
    from .query import relations
    return relations(q)


def detect_all(schema: RelationalSchema, instance: Optional[DataInstance] = None,
               hints: Optional[HintsDocument] = None, config: ProfilerConfig = ProfilerConfig(),
               max_rounds: int = 4, constraints: Optional[DiscoveredConstraints] = None) -> DetectionResult:
    """Detect every pattern over ``schema``; with data, profile first and cascade over new views.

    ``constraints`` may supply a previously computed profile (and then no
    profiling of the base relations happens).
    """
    hints = hints or EMPTY_HINTS
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    cand = _partition_candidates(hints)
    if constraints is not None:
        dc = constraints
    elif instance is not None:
        dc = profile(schema, instance, config, cand)
    else:
        dc = EMPTY_CONSTRAINTS
    data = instance
    working = schema
    focus = [r.name for r in schema.relations()]
    instances, lines = [], []
    rounds = 0
    while focus:
        if rounds >= max_rounds:
            raise FixpointOverflow(f"new views still appear after {max_rounds} rounds: {focus}")
        rounds += 1
        lines.append(f"# round {rounds}: {', '.join(focus)}")
        a = Analysis(working, dc, hints, data)
        found = []
        for t in focus:
            found.extend(a.detect_table(t))
        lines.extend(a.lines)
        instances.extend(found)
        new_views = [v for i in found for v in i.views]
        if new_views:
            working = working.with_views(new_views)
        cascade = [i.p["vf"] for i in found if i.kind in ("DR1Nm", "DR11m")]
        if data is not None and new_views:
            data = _materialize(working, data, new_views)
        if cascade and data is not None:
            more = profile(working, data, config, cand, only=cascade, known=dc)
            dc = dc.merge(more)
        focus = cascade
    validate_hints(hints, working)
    return DetectionResult(tuple(sort_instances(instances)), working, tuple(lines), dc, hints, data, rounds)
