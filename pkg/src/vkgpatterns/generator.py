"""Mapping assertions and ontology axioms for detected pattern instances.

Every kind has one recipe.  Sources are built over the instance's main table
(joined with a referenced table where the catalog prescribes it), subjects and
objects use the identifiers of :class:`~vkgpatterns.naming.Naming`, and view
references are unfolded so that sources only mention stored tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ModelError
from .model import (CLASS, DATA, OBJECT, ConceptualSummary, IRITemplate, LiteralTemplate,
                    MappingAssertion, PatternInstance, RelationalSchema, TargetAtom, axiom,
                    required_roles, schema_counterpart)
from .naming import Ident, Naming, camel, has_property, local_name, template_for
from .query import (ColRef, ConstEq, Constant, Join, Relation, Select, normalize_query, project,
                    unfold_views)
from .sql import emit_sql


class _Source:
    """Projection under construction, with collision-free output names.

    With ``bare`` every column of that relation is an output under its own
    name; the plain relation is returned unless extra items were added.
    """

    def __init__(self, base, schema: RelationalSchema, bare: Optional[str] = None):
        self.base = base
        self.bare = bare
        self.items = []
        if bare is not None:
            self.items = [(ColRef(bare, c), c) for c in schema.columns_of(bare)]
        self.extra = False

    def add(self, expr, alias: Optional[str] = None) -> str:
        for e, a in self.items:
            if e == expr and (alias is None or a == alias):
                return a
        want = alias or expr.attr
        taken = {a for _, a in self.items}
        name = want
        if name in taken and isinstance(expr, ColRef):
            name = f"{expr.relation}_{expr.attr}"
        n = 2
        while name in taken:
            name = f"{want}_{n}"
            n += 1
        self.items.append((expr, name))
        self.extra = True
        return name

    def query(self):
        if self.bare is not None and not self.extra:
            return self.base
        return project(self.base, [(e, None if isinstance(e, ColRef) and e.attr == a else a)
                                   for e, a in self.items])


@dataclass
class Generation:
    """Assertions and axioms for a set of instances, with the instance behind each assertion."""

    assertions: list = field(default_factory=list)
    axioms: set = field(default_factory=set)
    origin: dict = field(default_factory=dict)


class _Gen:
    def __init__(self, inst: PatternInstance, schema: RelationalSchema, naming: Naming):
        self.i = inst
        self.schema = schema
        self.n = naming
        self.out = []
        self.axioms = set()

    # -- helpers -----------------------------------------------------------

    def cls(self, table):
        return self.n.class_of(table)

    def own_ident(self, table) -> Ident:
        got = self.n.ident(table)
        if got is not None:
            return got
        rel = self.schema.relation(table)
        key = rel.primary_key or self.i.b.get("K") or self.i.b.get("K_E") or rel.attribute_names
        return Ident(template_for(self.cls(table), key, self.n.base), tuple((a, a) for a in key))

    def ref_ident(self, source, table, target) -> Ident:
        got = self.n.ref_ident(source, table, target)
        if got is not None:
            return got
        t = template_for(self.cls(table), target, self.n.base)
        return Ident(t, tuple(zip(target, source)))

    def term(self, src: _Source, ident: Ident, relation: str) -> IRITemplate:
        """``ident`` over columns of ``relation``, registered in ``src``."""
        ren = {}
        for ph, v in ident.fill:
            if isinstance(v, Constant):
                ren[ph] = src.add(v, ph)
            else:
                ren[ph] = src.add(ColRef(relation, v))
        return ident.template.rename(ren)

    def emit(self, src: _Source, atoms):
        q = src.query()
        views = self.schema.view_exprs()
        if any(r in views for r in _relations(q)):
            q = normalize_query(unfold_views(q, views))
        self.out.append((q, tuple(atoms)))

    def ax(self, kind, a, b):
        self.axioms.add(axiom(kind, local_name(a), local_name(b)))

    def q(self, name):
        return self.n.q(local_name(name))

    def data_atoms(self, src, subject, relation, attrs, cls=None):
        atoms = []
        for a in attrs:
            atoms.append(TargetAtom(DATA, self.q(a), subject, src.add(ColRef(relation, a))))
            if cls is not None:
                self.ax("dataDomain", a, cls)
        return atoms

    # -- recipes -------------------------------------------------------------

    def run(self):
        kind = schema_counterpart(self.i.kind)
        getattr(self, "_" + kind)()
        return self.out, self.axioms

    def _SE(self):
        t, b = self.i.main_table, self.i.b
        cols = self.schema.columns_of(t)
        keep = [c for c in cols if c in b["K"] or c in b["A"]]
        src = _Source(Relation(t), self.schema)
        for c in keep:
            src.add(ColRef(t, c))
        c = self.cls(t)
        s = self.term(src, self.own_ident(t), t)
        atoms = [TargetAtom(CLASS, self.q(c), s)] + self.data_atoms(src, s, t, keep, c)
        self.emit(src, atoms)

    def reachable(self, source, table, target) -> bool:
        """Whether ``table`` objects can be named from ``source`` columns without a join."""
        return self.n.ref_ident(source, table, target) is not None or self.n.ident(table) is None

    def role(self, t, base, source, table, target):
        """Join ``table`` into ``base`` when its identifier is not reachable through ``source``."""
        if self.reachable(source, table, target):
            return base, None
        pairs = tuple((ColRef(t, x), ColRef(table, y)) for x, y in zip(source, target))
        return Join(base, Relation(table), pairs), table

    def role_term(self, src, t, joined, source, table, target):
        if joined:
            return self.term(src, self.own_ident(table), table)
        return self.term(src, self.ref_ident(source, table, target), t)

    def _binary_atom(self, src, t, e_src, f_src, prop, joined=(None, None)):
        r, tg = self.i.r, dict(self.i.p["targets"])
        s = self.role_term(src, t, joined[0], e_src, r["E"], tg["E"])
        o = self.role_term(src, t, joined[1], f_src, r["F"], tg["F"])
        self.ax("domain", prop, self.cls(r["E"]))
        self.ax("range", prop, self.cls(r["F"]))
        return TargetAtom(OBJECT, self.q(prop), s, o)

    def _SR(self):
        t, b, r = self.i.main_table, self.i.b, self.i.r
        tg = dict(self.i.p["targets"])
        base, je = self.role(t, Relation(t), b["K_RE"], r["E"], tg["E"])
        base, jf = self.role(t, base, b["K_RF"], r["F"], tg["F"])
        src = _Source(base, self.schema, bare=None if je or jf else t)
        if je or jf:
            for c in b["K_RE"] + b["K_RF"]:
                src.add(ColRef(t, c))
        self.emit(src, [self._binary_atom(src, t, b["K_RE"], b["K_RF"], t, (je, jf))])

    def _SRa(self):
        t, b, r = self.i.main_table, self.i.b, self.i.r
        tg = dict(self.i.p["targets"])
        f = r["F"]
        join = Join(Relation(t), Relation(f), tuple((ColRef(t, x), ColRef(f, y))
                                                      for x, y in zip(b["K_RF"], tg["F"])))
        src = _Source(join, self.schema)
        s = self.term(src, self.ref_ident(b["K_RE"], r["E"], tg["E"]), t)
        o = self.term(src, self.own_ident(f), f)
        prop = t
        self.ax("domain", prop, self.cls(r["E"]))
        self.ax("range", prop, self.cls(f))
        self.emit(src, [TargetAtom(OBJECT, self.q(prop), s, o)])

    def _SRm(self):
        t, b, r = self.i.main_table, self.i.b, self.i.r
        base, jf = self.role(t, Relation(t), b["K_EF"], r["F"], self.i.p["target"])
        src = _Source(base, self.schema, bare=None if jf else t)
        s = self.term(src, self.own_ident(t), t)
        o = self.role_term(src, t, jf, b["K_EF"], r["F"], self.i.p["target"])
        prop = has_property(b["K_EF"])
        self.ax("domain", prop, self.cls(t))
        self.ax("range", prop, self.cls(r["F"]))
        self.emit(src, [TargetAtom(OBJECT, self.q(prop), s, o)])

    def _SRR(self):
        t, b, r, p = self.i.main_table, self.i.b, self.i.r, self.i.p
        tg = dict(p["targets"])
        aligned = set(p.get("aligned", ()))
        c = self.cls(t)
        src = _Source(Relation(t), self.schema, bare=t)
        s = self.term(src, self.own_ident(t), t)
        cols = self.schema.columns_of(t)
        attrs = [a for a in cols if a in b["K_R"] or a in b["A_R"]]
        atoms = [TargetAtom(CLASS, self.q(c), s)] + self.data_atoms(src, s, t, attrs, c)
        joins = []
        for x in sorted(r):
            k = b[f"K_R{x}"]
            prop = has_property(k)
            self.ax("domain", prop, c)
            self.ax("range", prop, self.cls(r[x]))
            if x in aligned or not self.reachable(k, r[x], tg[x]):
                joins.append((x, k, prop))
                continue
            atoms.append(TargetAtom(OBJECT, self.q(prop), s, self.term(src, self.ref_ident(k, r[x], tg[x]), t)))
        self.emit(src, atoms)
        for x, k, prop in joins:
            other = r[x]
            join = Join(Relation(t), Relation(other), tuple((ColRef(t, a), ColRef(other, u))
                                                              for a, u in zip(k, tg[x])))
            jsrc = _Source(join, self.schema)
            js = self.term(jsrc, self.own_ident(t), t)
            jo = self.term(jsrc, self.own_ident(other), other)
            self.emit(jsrc, [TargetAtom(OBJECT, self.q(prop), js, jo)])

    def _SH(self):
        t, b, r = self.i.main_table, self.i.b, self.i.r
        c = self.cls(t)
        src = _Source(Relation(t), self.schema, bare=t)
        s = self.term(src, self.own_ident(t), t)
        self.ax("subClass", c, self.cls(r["E"]))
        self.emit(src, [TargetAtom(CLASS, self.q(c), s)] + self.data_atoms(src, s, t, b["A_F"], c))

    def _SHa(self):
        t, b, r, p = self.i.main_table, self.i.b, self.i.r, self.i.p
        c, e = self.cls(t), r["E"]
        cols = self.schema.columns_of(t)
        attrs = [a for a in cols if a in b["K_F"] or a in b["A_F"]]
        self.ax("subClass", c, self.cls(e))
        if p.get("subcase") == "depicted":
            src = _Source(Relation(t), self.schema, bare=t)
            s = self.term(src, self.ref_ident(b["U_F"], e, p["target"]), t)
        else:
            join = Join(Relation(t), Relation(e), tuple((ColRef(t, x), ColRef(e, y))
                                                          for x, y in zip(b["U_F"], p["target"])))
            src = _Source(join, self.schema)
            s = self.term(src, self.own_ident(e), e)
        self.emit(src, [TargetAtom(CLASS, self.q(c), s)] + self.data_atoms(src, s, t, attrs, c))

    def _SHaa(self):
        t, b, r, p = self.i.main_table, self.i.b, self.i.r, self.i.p
        c, e = self.cls(t), r["E"]
        items = []
        for x, tgt in zip(p["projection"], p["target"]):
            items.append((x, tgt) if isinstance(x, Constant) else ColRef(t, x))
        items += [ColRef(t, a) for a in b["A_F"] if a not in p["projection"]]
        src = _Source(Relation(t), self.schema)
        for it in items:
            if isinstance(it, tuple):
                src.add(it[0], it[1])
            else:
                src.add(it)
        s = self.term(src, self.ref_ident(p["projection"], e, p["target"]), t)
        self.ax("subClass", c, self.cls(e))
        self.emit(src, [TargetAtom(CLASS, self.q(c), s)] + self.data_atoms(src, s, t, b["A_F"], c))

    def _DR1Nm(self):
        t, b, p = self.i.main_table, self.i.b, self.i.p
        vf = p["vf"]
        cf, ce = self.cls(vf), self.cls(t)
        src = _Source(Relation(t), self.schema, bare=t)
        s_f = self.term(src, self.ref_ident(b["K_F"], vf, b["K_F"]), t)
        s_e = self.term(src, self.own_ident(t), t)
        prop = has_property(b["K_F"])
        cols = self.schema.columns_of(t)
        attrs = [a for a in cols if a in b["K_F"] or a in b["A_F"]]
        atoms = [TargetAtom(CLASS, self.q(cf), s_f)] + self.data_atoms(src, s_f, t, attrs, cf)
        atoms.append(TargetAtom(OBJECT, self.q(prop), s_e, s_f))
        self.ax("domain", prop, ce)
        self.ax("range", prop, cf)
        self.emit(src, atoms)

    _DR11m = _DR1Nm

    def _DH01(self):
        t, b, r, p = self.i.main_table, self.i.b, self.i.r, self.i.p
        tg = dict(p["targets"])
        e = r["E"]
        sub = self.dh01_class()
        src = _Source(Relation(t), self.schema, bare=t)
        self.emit(src, [self._binary_atom(src, t, b["K_RE"], b["K_RF"], t)])
        self.axioms.discard(axiom("domain", local_name(t), local_name(self.cls(e))))
        self.ax("domain", t, sub)
        self.ax("subClass", sub, self.cls(e))
        join = Join(Relation(t), Relation(e), tuple((ColRef(t, x), ColRef(e, y))
                                                      for x, y in zip(b["K_RE"], tg["E"])))
        items = [ColRef(t, a) for a in b["K_RE"]] + [ColRef(e, a) for a in b["K_E"] + b["A_E"]]
        src2 = _Source(join, self.schema)
        for it in items:
            src2.add(it)
        s = self.term(src2, self.ref_ident(b["K_RE"], e, tg["E"]), t)
        atoms = [TargetAtom(CLASS, self.q(sub), s)] + self.data_atoms(src2, s, e, b["K_E"] + b["A_E"])
        self.emit(src2, atoms)

    def dh01_class(self):
        view = self.i.p.get("view")
        if view and view in self.n.hints.labels:
            return local_name(self.n.hints.labels[view])
        return local_name(f"{self.cls(self.i.r['E'])}_{camel(self.i.main_table)}")

    # -- clustering --------------------------------------------------------------

    def _cases(self):
        """``(value tuple, view name, source)`` per partition value."""
        t, b, p = self.i.main_table, self.i.b, self.i.p
        views = [v.name for v in self.i.views]
        for n, v in enumerate(p["values"]):
            conds = tuple(ConstEq(ColRef(t, a), Constant(x)) for a, x in zip(b["B"], v))
            src = _Source(Select(Relation(t), conds), self.schema, bare=t)
            yield v, views[n] if n < len(views) else None, src

    def _vname(self, v):
        return "_".join(local_name(x) for x in v)

    def _prop_B(self):
        return self.i.p.get("property") or has_property(self.i.b["B"])

    def _CE2C(self):
        t = self.i.main_table
        c = self.cls(t)
        for v, view, src in self._cases():
            sub = self.ce2c_class(v, view)
            s = self.term(src, self.own_ident(t), t)
            self.ax("subClass", sub, c)
            self.emit(src, [TargetAtom(CLASS, self.q(sub), s)])

    def ce2c_class(self, v, view=None):
        label = self.n.hints.labels.get(view) if view else None
        return local_name(label or f"{self.cls(self.i.main_table)}_{self._vname(v)}")

    def _CE2D(self):
        t = self.i.main_table
        prop = self._prop_B()
        xi = {tuple(k): val for k, val in self.i.p["invention"]}
        self.ax("dataDomain", prop, self.cls(t))
        for v, _, src in self._cases():
            s = self.term(src, self.own_ident(t), t)
            self.emit(src, [TargetAtom(DATA, self.q(prop), s, LiteralTemplate.constant(xi[tuple(v)]))])

    def _CE2O(self):
        t, b = self.i.main_table, self.i.b
        prop = self._prop_B()
        text = self.i.p.get("template")
        if text:
            tmpl = IRITemplate.parse(text)
        else:
            tmpl = template_for(camel("_".join(b["B"])), b["B"], self.n.base)
        self.ax("domain", prop, self.cls(t))
        for v, _, src in self._cases():
            s = self.term(src, self.own_ident(t), t)
            o = tmpl.rename({a: src.add(ColRef(t, a)) for a in tmpl.placeholders})
            self.emit(src, [TargetAtom(OBJECT, self.q(prop), s, o)])

    def _CR2O(self):
        t, b, r = self.i.main_table, self.i.b, self.i.r
        tg = dict(self.i.p["targets"])
        base = t
        for v, _, src in self._cases():
            sub = local_name(f"{base}_{self._vname(v)}")
            s = self.term(src, self.ref_ident(b["K_RE"], r["E"], tg["E"]), t)
            o = self.term(src, self.ref_ident(b["K_RF"], r["F"], tg["F"]), t)
            self.ax("subObjectProperty", sub, base)
            self.emit(src, [TargetAtom(OBJECT, self.q(sub), s, o)])


def _relations(q):
    from .query import relations
    return relations(q)


def _check(inst: PatternInstance):
    have = inst.b
    for role in required_roles(inst.kind, have):
        if role not in have:
            from .errors import IncompleteBindings
            raise IncompleteBindings(inst.kind, role)


def generate(instance: PatternInstance, schema: RelationalSchema, naming: Optional[Naming] = None,
             prefix: str = "m"):
    """``(assertions, axioms)`` for one instance.

    Assertion ids are ``<prefix>_<kind>_<table>_<n>`` with ``n`` counting the
    assertions of this instance from 1.
    """
    _check(instance)
    naming = naming or Naming([instance], schema)
    pairs, axioms = _Gen(instance, schema, naming).run()
    out = []
    stem = local_name(f"{prefix}_{instance.kind}_{instance.main_table}")
    for n, (q, atoms) in enumerate(pairs, 1):
        out.append(MappingAssertion(f"{stem}_{n}", q, atoms, emit_sql(q)))
    return out, set(axioms)


def generate_all(instances, schema: RelationalSchema, hints=None, prefix: str = "m") -> Generation:
    """Generate every instance; ids count per (kind, main table) across instances."""
    from .hints import EMPTY_HINTS
    naming = Naming(instances, schema, hints or EMPTY_HINTS)
    res = Generation()
    counters = {}
    for inst in instances:
        got, axioms = generate(inst, schema, naming, prefix)
        res.axioms |= axioms
        stem = local_name(f"{prefix}_{inst.kind}_{inst.main_table}")
        for a in got:
            counters[stem] = counters.get(stem, 0) + 1
            a = MappingAssertion(f"{stem}_{counters[stem]}", a.source, a.targets, a.raw_sql)
            res.assertions.append(a)
            res.origin[a.id] = inst
    return res


# -- conceptual summary -------------------------------------------------------------

def conceptual_summary(instances, schema: RelationalSchema, hints=None) -> ConceptualSummary:
    from .hints import EMPTY_HINTS
    naming = Naming(instances, schema, hints or EMPTY_HINTS)
    cls = naming.class_of
    ents, rels, isa = set(), set(), set()
    for i in instances:
        k, t, b, r, p = schema_counterpart(i.kind), i.main_table, i.b, i.r, i.p
        if k == "SE":
            ents.add((cls(t), tuple(b["K"]) + tuple(b["A"]), tuple(b["K"])))
        elif k in ("SR", "SRa"):
            one = p.get("identifying") == "E"
            rels.add((t, ((cls(r["E"]), "(_,1)" if one else "(_,N)"), (cls(r["F"]), "(_,N)")), ()))
        elif k == "SRm":
            rels.add((has_property(b["K_EF"]), ((cls(t), "(_,1)"), (cls(r["F"]), "(_,N)")), ()))
        elif k == "SRR":
            roles = tuple((cls(r[x]), "(_,N)") for x in sorted(r))
            ents.add((cls(t), tuple(b["K_R"]) + tuple(b["A_R"]), tuple(b["K_R"])))
            rels.add((cls(t), roles, tuple(b["A_R"])))
        elif k in ("SH", "SHa", "SHaa"):
            isa.add((cls(t), cls(r["E"])))
        elif k in ("DR1Nm", "DR11m"):
            vf = p["vf"]
            ents.add((cls(vf), tuple(b["K_F"]) + tuple(b["A_F"]), tuple(b["K_F"])))
            card = "(_,1)" if k == "DR11m" else "(_,N)"
            rels.add((has_property(b["K_F"]), ((cls(t), "(_,1)"), (cls(vf), card)), ()))
        elif k == "DH01":
            sub = _Gen(i, schema, naming).dh01_class()
            isa.add((sub, cls(r["E"])))
            rels.add((t, ((sub, "(1,N)"), (cls(r["F"]), "(_,N)")), ()))
        elif k == "CE2C":
            g = _Gen(i, schema, naming)
            views = [v.name for v in i.views] + [None] * len(p["values"])
            for v, view in zip(p["values"], views):
                isa.add((g.ce2c_class(v, view), cls(t)))
    return ConceptualSummary(tuple(sorted(ents)), tuple(sorted(rels)), tuple(sorted(isa)))


def emit_conceptual_summary(instances, schema: Optional[RelationalSchema] = None, hints=None) -> str:
    """Plain-text listing of entities, relationships and ISA links."""
    instances = list(instances)
    if not instances:
        return ""
    if schema is None:
        raise ModelError("a schema is needed to name the conceptual elements")
    cs = conceptual_summary(instances, schema, hints)
    lines = ["Entities"]
    for name, attrs, ident in cs.entities:
        lines.append(f"  {name} [{', '.join(ident)}] ({', '.join(attrs)})")
    lines.append("Relationships")
    for name, parts, attrs in cs.relationships:
        roles = " -- ".join(f"{c} {card}" for c, card in parts)
        extra = f" ({', '.join(attrs)})" if attrs else ""
        lines.append(f"  {name}: {roles}{extra}")
    lines.append("ISA")
    for child, parent in cs.isa_links:
        lines.append(f"  {child} ISA {parent}")
    return "\n".join(lines) + "\n"
