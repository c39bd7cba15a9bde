"""Restricted relational algebra for mapping source queries.

Trees are built from four immutable node types (:class:`Relation`,
:class:`Select`, :class:`Join`, :class:`Project`).  Column references are
always qualified by the base relation they come from, so a query may mention
each relation at most once (no self-joins).  Constants may only appear in the
outermost projection or as the right-hand side of a selection.

The module also hosts a small set-semantics evaluator used by the profiler
(view materialisation) and by the test-suite oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import MalformedQuery


@dataclass(frozen=True, order=True)
class Constant:
    value: str

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True, order=True)
class ColRef:
    """A column of a base relation.  ``relation`` is ``None`` until resolved."""

    relation: Optional[str]
    attr: str

    def __str__(self):
        return f"{self.relation}.{self.attr}" if self.relation else self.attr


@dataclass(frozen=True, order=True)
class Star:
    """All columns of one relation, in schema order."""

    relation: str


Expr = Union[ColRef, Constant]


@dataclass(frozen=True)
class ProjItem:
    expr: Union[ColRef, Constant, Star]
    alias: Optional[str] = None

    @property
    def name(self) -> Optional[str]:
        if self.alias is not None:
            return self.alias
        if isinstance(self.expr, ColRef):
            return self.expr.attr
        return None


@dataclass(frozen=True, order=True)
class AttrEq:
    left: ColRef
    right: ColRef


@dataclass(frozen=True, order=True)
class ConstEq:
    col: ColRef
    value: Constant


Condition = Union[AttrEq, ConstEq]


@dataclass(frozen=True)
class Relation:
    name: str


@dataclass(frozen=True)
class Select:
    child: "SourceQuery"
    conditions: tuple


@dataclass(frozen=True)
class Join:
    left: "SourceQuery"
    right: "SourceQuery"
    pairs: tuple = ()


@dataclass(frozen=True)
class Project:
    child: "SourceQuery"
    items: tuple


SourceQuery = Union[Relation, Select, Join, Project]


# -- construction helpers -------------------------------------------------

def col(relation: str, attr: str) -> ColRef:
    return ColRef(relation, attr)


def project(child, items) -> Project:
    """Build a projection from ``ColRef``/``Constant``/``(expr, alias)`` items."""
    out = []
    for it in items:
        if isinstance(it, ProjItem):
            out.append(it)
        elif isinstance(it, tuple):
            out.append(ProjItem(it[0], it[1]))
        else:
            out.append(ProjItem(it))
    return Project(child, tuple(out))


def relations(q: SourceQuery) -> list:
    if isinstance(q, Relation):
        return [q.name]
    if isinstance(q, (Select, Project)):
        return relations(q.child)
    return relations(q.left) + relations(q.right)


def output_items(q: SourceQuery) -> list:
    """The projection items that define the columns ``q`` returns."""
    if isinstance(q, Relation):
        return [ProjItem(Star(q.name))]
    if isinstance(q, Project):
        return list(q.items)
    if isinstance(q, Select):
        return output_items(q.child)
    left, right = q.left, q.right
    if min(relations(right)) < min(relations(left)):
        left, right = right, left
    return output_items(left) + output_items(right)


def output_names(q: SourceQuery) -> Optional[list]:
    """Output column names, or ``None`` when a ``Star`` makes them schema-dependent."""
    names = []
    for it in output_items(q):
        if isinstance(it.expr, Star):
            return None
        names.append(it.name)
    return names


def alias_map(q: SourceQuery) -> dict:
    """Map each explicit output name to the expression it carries."""
    out = {}
    for it in output_items(q):
        if not isinstance(it.expr, Star):
            out[it.name] = it.expr
    return out


# -- validation -----------------------------------------------------------

def _visible(q: SourceQuery) -> Optional[set]:
    """Columns a parent node may reference; ``None`` means every column of the relations."""
    if isinstance(q, Relation):
        return None
    if isinstance(q, Select):
        return _visible(q.child)
    if isinstance(q, Project):
        vis = set()
        for it in q.items:
            if isinstance(it.expr, ColRef):
                vis.add(it.expr)
            elif isinstance(it.expr, Star):
                vis.add(it.expr)
        return vis
    lv, rv = _visible(q.left), _visible(q.right)
    if lv is None and rv is None:
        return None
    vis = set()
    for side, v in ((q.left, lv), (q.right, rv)):
        if v is None:
            vis.update(Star(r) for r in relations(side))
        else:
            vis.update(v)
    return vis


def _check_ref(ref: ColRef, rels: Sequence[str], vis: Optional[set]):
    if ref.relation is None:
        if len(rels) == 1:
            return
        raise MalformedQuery(f"unqualified column {ref.attr!r}; resolve against a schema first")
    if ref.relation not in rels:
        raise MalformedQuery(f"column {ref} references a relation outside its subtree")
    if vis is not None and ref not in vis and Star(ref.relation) not in vis:
        raise MalformedQuery(f"column {ref} was projected away below its use")


def validate(q: SourceQuery, outermost: bool = True) -> None:
    """Raise :class:`MalformedQuery` unless ``q`` is a well-formed conjunctive query."""
    if isinstance(q, Relation):
        if not q.name:
            raise MalformedQuery("empty relation name")
        return
    if isinstance(q, Select):
        validate(q.child, outermost=False)
        rels, vis = relations(q.child), _visible(q.child)
        if not q.conditions:
            raise MalformedQuery("selection without conditions")
        for c in q.conditions:
            if isinstance(c, AttrEq):
                _check_ref(c.left, rels, vis)
                _check_ref(c.right, rels, vis)
            elif isinstance(c, ConstEq):
                _check_ref(c.col, rels, vis)
            else:
                raise MalformedQuery(f"unsupported condition {c!r}")
        return
    if isinstance(q, Join):
        validate(q.left, outermost=False)
        validate(q.right, outermost=False)
        lr, rr = relations(q.left), relations(q.right)
        if set(lr) & set(rr):
            raise MalformedQuery(f"relation used twice: {sorted(set(lr) & set(rr))}")
        lv, rv = _visible(q.left), _visible(q.right)
        for a, b in q.pairs:
            if a.relation in rr and b.relation in lr:
                a, b = b, a
            _check_ref(a, lr, lv)
            _check_ref(b, rr, rv)
        return
    if isinstance(q, Project):
        validate(q.child, outermost=False)
        rels, vis = relations(q.child), _visible(q.child)
        names = []
        for it in q.items:
            if isinstance(it.expr, Constant):
                if not outermost:
                    raise MalformedQuery("constants are only allowed in the outermost projection")
                if it.alias is None:
                    raise MalformedQuery("constant projection needs an alias")
            elif isinstance(it.expr, Star):
                if it.expr.relation not in rels:
                    raise MalformedQuery(f"{it.expr.relation}.* outside the subtree")
                continue
            else:
                _check_ref(it.expr, rels, vis)
            names.append(it.name)
        if len(set(names)) != len(names):
            raise MalformedQuery(f"duplicate output aliases in {names}")
        return
    raise MalformedQuery(f"not a conjunctive query node: {q!r}")


# -- normal form ----------------------------------------------------------

class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def _collect_conditions(q: SourceQuery, acc: list):
    if isinstance(q, Relation):
        return
    if isinstance(q, Select):
        acc.extend(q.conditions)
        _collect_conditions(q.child, acc)
    elif isinstance(q, Project):
        _collect_conditions(q.child, acc)
    else:
        acc.extend(AttrEq(a, b) for a, b in q.pairs)
        _collect_conditions(q.left, acc)
        _collect_conditions(q.right, acc)


def normalize_query(q: SourceQuery) -> SourceQuery:
    """Return the unique normal form of a conjunctive source query.

    The normal form is ``Project(Select(J))`` where ``J`` is a left-deep join
    over the relations sorted by name.  Attribute equalities are closed under
    transitivity and re-emitted as (representative, member) pairs: pairs over a
    single relation become selection conjuncts, the others are attached to the
    join step that introduces the later relation.  ``Project`` is dropped when
    it would return every column in canonical order, ``Select`` when empty.
    """
    validate(q)
    if any(c.relation is None for c in iter_colrefs(q)):
        if len(relations(q)) > 1:
            raise MalformedQuery("unqualified column in a multi-relation query")
        q = qualify(q, lambda r: ())
    rels = sorted(relations(q))
    rank = {r: i for i, r in enumerate(rels)}
    conds = []
    _collect_conditions(q, conds)

    uf = _UnionFind()
    consts = {}
    for c in conds:
        if isinstance(c, AttrEq):
            uf.union(c.left, c.right)
        else:
            uf.find(c.col)
    for c in conds:
        if isinstance(c, ConstEq):
            consts.setdefault(uf.find(c.col), set()).add(c.value)

    classes = {}
    for x in list(uf.parent):
        classes.setdefault(uf.find(x), []).append(x)

    select_conds = []
    join_pairs = {r: [] for r in rels}
    for rep, members in classes.items():
        members = sorted(members)
        rep = members[0]
        if len(members) == 1 and AttrEq(rep, rep) in conds:
            select_conds.append(AttrEq(rep, rep))  # keeps its null filter
        for m in members[1:]:
            if m.relation == rep.relation:
                select_conds.append(AttrEq(rep, m))
            else:
                a, b = sorted((rep, m), key=lambda c: (rank[c.relation], c))
                join_pairs[b.relation].append((a, b))
        for v in sorted(consts.get(uf.find(rep), ())):
            select_conds.append(ConstEq(rep, v))

    tree: SourceQuery = Relation(rels[0])
    for r in rels[1:]:
        tree = Join(tree, Relation(r), tuple(sorted(join_pairs[r])))
    if select_conds:
        tree = Select(tree, tuple(sorted(select_conds, key=_cond_key)))

    items = []
    for it in output_items(q):
        expr, name = it.expr, it.name
        if isinstance(expr, ColRef) and expr in uf.parent:
            expr = uf.find(expr)  # any member of the equality class carries the same value
        alias = None if isinstance(expr, ColRef) and name == expr.attr else name
        items.append(ProjItem(expr, alias if not isinstance(expr, Star) else None))
    canonical_star = [ProjItem(Star(r)) for r in rels]
    if items != canonical_star:
        tree = Project(tree, tuple(items))
    return tree


def _cond_key(c):
    if isinstance(c, AttrEq):
        return (0, c.left, c.right, "")
    return (1, c.col, c.col, c.value.value)


def core(q: SourceQuery) -> SourceQuery:
    """The normal form without its projection: what rows are selected, not which columns."""
    n = normalize_query(q)
    return n.child if isinstance(n, Project) else n


# -- rewriting ------------------------------------------------------------

def _subst_ref(ref: ColRef, mapping: Mapping) -> Expr:
    return mapping.get(ref, ref)


def unfold_views(q: SourceQuery, views: Mapping) -> SourceQuery:
    """Inline view definitions (``name -> SourceQuery``) until only base relations remain."""
    rels = relations(q)
    if not any(r in views for r in rels):
        return q
    items = output_items(q)
    if any(isinstance(it.expr, Star) and it.expr.relation in views for it in items):
        expanded = []
        for it in items:
            if isinstance(it.expr, Star) and it.expr.relation in views:
                v = it.expr.relation
                expanded.extend(ProjItem(ColRef(v, c)) for c in output_names(views[v]))
            else:
                expanded.append(it)
        q = Project(q.child if isinstance(q, Project) else q, tuple(expanded))
    subst = {}
    bodies = {}
    for r in rels:
        if r in views:
            body = unfold_views(views[r], views)
            if not isinstance(body, Project):
                raise MalformedQuery(f"view {r!r} needs an explicit projection to be unfolded")
            for it in body.items:
                if isinstance(it.expr, Star):
                    raise MalformedQuery(f"view {r!r} projects a star; cannot unfold")
                subst[ColRef(r, it.name)] = it.expr
            bodies[r] = body.child
    return _rewrite(q, subst, bodies)


def _rewrite(q, subst, bodies):
    if isinstance(q, Relation):
        return bodies.get(q.name, q)
    if isinstance(q, Select):
        child = _rewrite(q.child, subst, bodies)
        conds = []
        for c in q.conditions:
            if isinstance(c, AttrEq):
                a, b = _subst_ref(c.left, subst), _subst_ref(c.right, subst)
                if isinstance(a, Constant) and isinstance(b, Constant):
                    if a != b:
                        raise MalformedQuery("unfolding produced a contradictory constant comparison")
                    continue
                if isinstance(a, Constant):
                    a, b = b, a
                conds.append(ConstEq(a, b) if isinstance(b, Constant) else AttrEq(a, b))
            else:
                a = _subst_ref(c.col, subst)
                if isinstance(a, Constant):
                    if a != c.value:
                        raise MalformedQuery("unfolding produced a contradictory constant comparison")
                    continue
                conds.append(ConstEq(a, c.value))
        return Select(child, tuple(conds)) if conds else child
    if isinstance(q, Join):
        left = _rewrite(q.left, subst, bodies)
        right = _rewrite(q.right, subst, bodies)
        pairs, extra = [], []
        for a, b in q.pairs:
            a2, b2 = _subst_ref(a, subst), _subst_ref(b, subst)
            if isinstance(a2, Constant) or isinstance(b2, Constant):
                ref, const = (b2, a2) if isinstance(a2, Constant) else (a2, b2)
                extra.append(ConstEq(ref, const))
            else:
                pairs.append((a2, b2))
        out = Join(left, right, tuple(pairs))
        return Select(out, tuple(extra)) if extra else out
    items = []
    for it in q.items:
        if isinstance(it.expr, ColRef):
            items.append(ProjItem(_subst_ref(it.expr, subst), it.name))
        elif isinstance(it.expr, Star) and it.expr.relation in bodies:
            raise MalformedQuery(f"cannot unfold {it.expr.relation}.* without the view columns")
        else:
            items.append(it)
    return Project(_rewrite(q.child, subst, bodies), tuple(items))


def qualify(q: SourceQuery, columns_of) -> SourceQuery:
    """Attach relation names to unqualified column references.

    ``columns_of(relation)`` returns the attribute names of a relation.  An
    unqualified name must match exactly one relation of the query.
    """
    rels = relations(q)

    def fix(ref):
        if not isinstance(ref, ColRef) or ref.relation is not None:
            return ref
        if len(rels) == 1:
            return ColRef(rels[0], ref.attr)
        owners = [r for r in rels if ref.attr in columns_of(r)]
        if len(owners) != 1:
            raise MalformedQuery(f"column {ref.attr!r} is {'ambiguous' if owners else 'unknown'}")
        return ColRef(owners[0], ref.attr)

    def walk(n):
        if isinstance(n, Relation):
            return n
        if isinstance(n, Select):
            conds = tuple(AttrEq(fix(c.left), fix(c.right)) if isinstance(c, AttrEq)
                          else ConstEq(fix(c.col), c.value) for c in n.conditions)
            return Select(walk(n.child), conds)
        if isinstance(n, Join):
            return Join(walk(n.left), walk(n.right), tuple((fix(a), fix(b)) for a, b in n.pairs))
        return Project(walk(n.child), tuple(ProjItem(fix(it.expr), it.alias) for it in n.items))

    return walk(q)


# -- evaluation -----------------------------------------------------------

def evaluate(q: SourceQuery, tables: Mapping, views: Optional[Mapping] = None):
    """Evaluate ``q`` under set semantics.

    ``tables`` maps relation name to ``(columns, rows)``; ``views`` maps a view
    name to its defining query and is consulted for names absent from
    ``tables``.  Returns ``(column_names, set_of_row_tuples)``.  SQL null
    semantics apply: a comparison involving ``None`` is never satisfied.
    """
    views = views or {}
    cache = {}

    def base(name):
        if name in cache:
            return cache[name]
        if name in tables:
            cols, rows = tables[name]
        elif name in views:
            cols, rows = evaluate(views[name], tables, views)
            rows = sorted(rows, key=_row_key)
        else:
            raise MalformedQuery(f"no data for relation {name!r}")
        cache[name] = (list(cols), [tuple(r) for r in rows])
        return cache[name]

    def columns(name):
        return base(name)[0]

    def rec(n):
        # returns (list of ColRef, list of row tuples)
        if isinstance(n, Relation):
            cols, rows = base(n.name)
            return [ColRef(n.name, c) for c in cols], rows
        if isinstance(n, Select):
            cols, rows = rec(n.child)
            idx = {c: i for i, c in enumerate(cols)}
            out = []
            for r in rows:
                ok = True
                for c in n.conditions:
                    if isinstance(c, AttrEq):
                        a, b = r[idx[c.left]], r[idx[c.right]]
                        ok = a is not None and a == b
                    else:
                        ok = r[idx[c.col]] == c.value.value
                    if not ok:
                        break
                if ok:
                    out.append(r)
            return cols, out
        if isinstance(n, Join):
            lc, lrows = rec(n.left)
            rc, rrows = rec(n.right)
            li = {c: i for i, c in enumerate(lc)}
            ri = {c: i for i, c in enumerate(rc)}
            pairs = []
            for a, b in n.pairs:
                if a in ri:
                    a, b = b, a
                pairs.append((li[a], ri[b]))
            index = {}
            for r in rrows:
                key = tuple(r[j] for _, j in pairs)
                if None in key:
                    continue
                index.setdefault(key, []).append(r)
            out = []
            for l in lrows:
                key = tuple(l[i] for i, _ in pairs)
                if None in key:
                    continue
                for r in index.get(key, ()):
                    out.append(l + r)
            return lc + rc, out
        cols, rows = rec(n.child)
        idx = {c: i for i, c in enumerate(cols)}
        getters, refs = [], []
        for it in n.items:
            if isinstance(it.expr, Star):
                for c in columns(it.expr.relation):
                    ref = ColRef(it.expr.relation, c)
                    getters.append(("col", idx[ref]))
                    refs.append(ref)
            elif isinstance(it.expr, Constant):
                getters.append(("const", it.expr.value))
                refs.append(ColRef(None, it.name))
            else:
                getters.append(("col", idx[it.expr]))
                # unrenamed columns stay addressable by enclosing selections and joins
                refs.append(it.expr if it.name == it.expr.attr else ColRef(None, it.name))
        out = [tuple(r[g] if kind == "col" else g for kind, g in getters) for r in rows]
        return refs, out

    cols, rows = rec(q)
    if not isinstance(q, Project):
        # canonical column order for bare trees
        items = output_items(q)
        names = []
        order = []
        pos = {c: i for i, c in enumerate(cols)}
        for it in items:
            if isinstance(it.expr, ColRef):
                names.append(it.name)
                order.append(pos[it.expr])
                continue
            for c in columns(it.expr.relation):
                ref = ColRef(it.expr.relation, c)
                if ref in pos:  # an inner projection may have dropped it
                    names.append(c)
                    order.append(pos[ref])
        return names, {tuple(r[i] for i in order) for r in rows}
    return [c.attr for c in cols], set(rows)


def _row_key(row):
    return tuple((v is None, v or "") for v in row)


def conditions_of(q: SourceQuery) -> list:
    acc = []
    _collect_conditions(q, acc)
    return acc


def constants_selected(q: SourceQuery) -> dict:
    """Map each column fixed by an ``attr = constant`` conjunct to its constant."""
    return {c.col: c.value for c in conditions_of(q) if isinstance(c, ConstEq)}


def render_algebra(q: SourceQuery) -> str:
    """Compact textual relational-algebra rendering, for logs and reports."""
    if isinstance(q, Relation):
        return q.name
    if isinstance(q, Select):
        conds = " ∧ ".join(f"{c.left}={c.right}" if isinstance(c, AttrEq) else f"{c.col}={c.value}"
                           for c in q.conditions)
        return f"σ[{conds}]({render_algebra(q.child)})"
    if isinstance(q, Join):
        pairs = ",".join(f"{a}={b}" for a, b in q.pairs)
        return f"({render_algebra(q.left)} ⋈[{pairs}] {render_algebra(q.right)})"
    items = []
    for it in q.items:
        if isinstance(it.expr, Star):
            items.append(f"{it.expr.relation}.*")
        else:
            e = str(it.expr)
            items.append(e if it.alias in (None, getattr(it.expr, "attr", None)) else f"{e}→{it.alias}")
    return f"π[{','.join(items)}]({render_algebra(q.child)})"


def iter_colrefs(q: SourceQuery) -> Iterable[ColRef]:
    if isinstance(q, Relation):
        return
    if isinstance(q, Select):
        for c in q.conditions:
            if isinstance(c, AttrEq):
                yield c.left
                yield c.right
            else:
                yield c.col
        yield from iter_colrefs(q.child)
    elif isinstance(q, Join):
        for a, b in q.pairs:
            yield a
            yield b
        yield from iter_colrefs(q.left)
        yield from iter_colrefs(q.right)
    else:
        for it in q.items:
            if isinstance(it.expr, ColRef):
                yield it.expr
        yield from iter_colrefs(q.child)
