import random
import sqlite3

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vkgpatterns.errors import MalformedQuery
from vkgpatterns.query import (AttrEq, ColRef, ConstEq, Constant, Join, ProjItem, Project, Relation, Select,
                               core, evaluate, normalize_query, project, render_algebra, unfold_views,
                               validate)
from vkgpatterns.sql import emit_sql

SCHEMA = {"r1": ("a", "b"), "r2": ("a", "c"), "r3": ("b", "d")}
VALUES = ("x", "y", "z")


def _cols(rels):
    return [ColRef(r, c) for r in rels for c in SCHEMA[r]]


@st.composite
def trees(draw, rels=None):
    """Random conjunctive trees over distinct relations, at most four levels deep."""
    if rels is None:
        rels = draw(st.lists(st.sampled_from(sorted(SCHEMA)), min_size=1, max_size=3, unique=True))
    if len(rels) == 1:
        node = Relation(rels[0])
    else:
        cut = draw(st.integers(1, len(rels) - 1))
        left, right = draw(trees(rels[:cut])), draw(trees(rels[cut:]))
        lc, rc = _cols(rels[:cut]), _cols(rels[cut:])
        pairs = tuple(draw(st.lists(st.tuples(st.sampled_from(lc), st.sampled_from(rc)), max_size=2)))
        node = Join(left, right, pairs)
    if draw(st.booleans()):
        cs = _cols(rels)
        conds = draw(st.lists(st.one_of(
            st.builds(ConstEq, st.sampled_from(cs), st.sampled_from(VALUES).map(Constant)),
            st.builds(AttrEq, st.sampled_from(cs), st.sampled_from(cs))), min_size=1, max_size=2))
        node = Select(node, tuple(conds))
    return node


@st.composite
def projected(draw):
    q = draw(trees())
    from vkgpatterns.query import relations
    cs = _cols(relations(q))
    picked = draw(st.lists(st.sampled_from(cs), min_size=1, max_size=4, unique=True))
    items = [ProjItem(c, f"o{i}") for i, c in enumerate(picked)]
    if draw(st.booleans()):
        items.append(ProjItem(Constant("k"), "konst"))
    return Project(q, tuple(items))


def _swap(q):
    if isinstance(q, Relation):
        return q
    if isinstance(q, Select):
        return Select(_swap(q.child), tuple(reversed(q.conditions)))
    if isinstance(q, Project):
        return Project(_swap(q.child), q.items)
    return Join(_swap(q.right), _swap(q.left), tuple((b, a) for a, b in q.pairs))


def _tables(seed):
    rng = random.Random(seed)
    return {r: (cols, [tuple(rng.choice(VALUES + (None,)) for _ in cols) for _ in range(rng.randint(0, 6))])
            for r, cols in SCHEMA.items()}


def _sqlite_rows(q, tables):
    con = sqlite3.connect(":memory:")
    for r, (cols, rows) in tables.items():
        con.execute(f'CREATE TABLE "{r}" ({", ".join(cols)})')
        con.executemany(f'INSERT INTO "{r}" VALUES ({", ".join("?" for _ in cols)})', rows)
    return set(con.execute(emit_sql(q)).fetchall())


@given(trees())
def test_normalize_is_idempotent(q):
    n = normalize_query(q)
    assert normalize_query(n) == n


@given(projected())
def test_normalize_ignores_join_operand_order(q):
    assert normalize_query(_swap(q)) == normalize_query(q)


@given(projected(), st.integers(0, 10_000))
def test_normal_form_evaluates_like_sqlite(q, seed):
    tables = _tables(seed)
    cols, rows = evaluate(q, tables)
    assert cols == [f"o{i}" for i in range(len(cols) - ("konst" in cols))] + (["konst"] if "konst" in cols else [])
    assert rows == _sqlite_rows(q, tables)
    assert evaluate(normalize_query(q), tables)[1] == rows


def test_already_normal_projection_is_unchanged():
    q = project(Relation("person_info"), [ColRef("person_info", "ssn")])
    assert normalize_query(q) == q


def test_join_operands_swapped_same_normal_form():
    r, f = Relation("T_R"), Relation("T_F")
    pair = (ColRef("T_R", "u"), ColRef("T_F", "u"))
    assert normalize_query(Join(r, f, (pair,))) == normalize_query(Join(f, r, (pair[::-1],)))


def test_selection_over_projection_moves_inside():
    t = Relation("t")
    k, b = ColRef("t", "k"), ColRef("t", "b")
    inner_first = Select(project(t, [k, b]), (ConstEq(b, Constant("v")),))
    outer_first = project(Select(t, (ConstEq(b, Constant("v")),)), [k, b])
    assert normalize_query(inner_first) == normalize_query(outer_first)
    rng = random.Random(3)
    tables = {"t": (("k", "b", "z"), [(str(i), rng.choice("uvw"), "q") for i in range(20)])}
    assert evaluate(inner_first, tables)[1] == evaluate(outer_first, tables)[1]


def test_transitive_equalities_collapse():
    a, b = Relation("a"), Relation("b")
    x, y = ColRef("a", "x"), ColRef("b", "y")
    q1 = Select(Join(a, b, ((x, y),)), (ConstEq(x, Constant("1")),))
    q2 = Select(Join(a, b, ((x, y),)), (ConstEq(y, Constant("1")),))
    assert normalize_query(q1) == normalize_query(q2)


def test_constants_only_in_outermost_projection():
    inner = Project(Relation("t"), (ProjItem(Constant("c"), "c"),))
    with pytest.raises(MalformedQuery):
        validate(Project(inner, (ProjItem(ColRef("t", "c"), "c"),)))


def test_duplicate_aliases_rejected():
    with pytest.raises(MalformedQuery):
        validate(Project(Relation("t"), (ProjItem(ColRef("t", "a"), "x"), ProjItem(ColRef("t", "b"), "x"))))


def test_self_join_rejected():
    with pytest.raises(MalformedQuery):
        validate(Join(Relation("t"), Relation("t"), ()))


def test_column_projected_away_cannot_be_used():
    p = Project(Relation("t"), (ProjItem(ColRef("t", "a")),))
    with pytest.raises(MalformedQuery):
        validate(Select(p, (ConstEq(ColRef("t", "b"), Constant("1")),)))


def test_core_drops_projection():
    q = Select(project(Relation("t"), [ColRef("t", "a")]), (ConstEq(ColRef("t", "a"), Constant("1")),))
    assert core(q) == Select(Relation("t"), (ConstEq(ColRef("t", "a"), Constant("1")),))


def test_unfold_views_inlines_definition():
    view = project(Select(Relation("t"), (ConstEq(ColRef("t", "g"), Constant("F")),)),
                   [ColRef("t", "k"), ColRef("t", "g")])
    q = project(Relation("v"), [ColRef("v", "k")])
    got = normalize_query(unfold_views(q, {"v": view}))
    want = normalize_query(project(Select(Relation("t"), (ConstEq(ColRef("t", "g"), Constant("F")),)),
                                   [ColRef("t", "k")]))
    assert got == want


def test_null_never_satisfies_equality():
    tables = {"t": (("a", "b"), [(None, None), ("1", "1")])}
    q = Select(Relation("t"), (AttrEq(ColRef("t", "a"), ColRef("t", "b")),))
    assert evaluate(q, tables)[1] == {("1", "1")}


def test_render_algebra_is_readable():
    q = project(Select(Relation("t"), (ConstEq(ColRef("t", "g"), Constant("F")),)), [ColRef("t", "k")])
    assert render_algebra(q) == "π[t.k](σ[t.g='F'](t))"
