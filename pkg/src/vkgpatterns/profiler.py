"""Exact discovery of keys, functional dependencies, inclusion dependencies,
partitions and optional participations in a data instance.

All checks are exact: one counterexample row vetoes a constraint.  Tables
without rows yield nothing (a constraint licensed by zero rows is noise).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Optional, Sequence

from .model import (DerivationRule, ForeignKey, FunctionalDependency, InclusionDependency,
                    PartitionSpec, RelationalSchema)
from .query import Constant

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProfilerConfig:
    max_key_arity: int = 3
    max_fd_determinant: int = 2
    max_ind_arity: int = 2
    max_partition_values: int = 16

    def __post_init__(self):
        for name in ("max_key_arity", "max_fd_determinant", "max_ind_arity"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.max_partition_values < 2:
            raise ValueError("max_partition_values must be at least 2")


@dataclass(frozen=True, order=True)
class Participation:
    """``rel_table.source`` references ``target_table.target`` and covers a strict subset of it."""

    rel_table: str
    source: tuple
    target_table: str
    target: tuple
    covered: int
    total: int

    @property
    def coverage(self) -> float:
        return self.covered / self.total


@dataclass(frozen=True)
class DiscoveredConstraints:
    keys: tuple = ()
    fds: tuple = ()
    inds: tuple = ()
    partitions: tuple = ()
    optional_participations: tuple = ()
    profiled: tuple = ()

    def keys_of(self, table: str) -> list:
        return [k for t, k in self.keys if t == table]

    def fds_of(self, table: str) -> list:
        return [f for f in self.fds if f.table == table]

    def inds_from(self, table: str) -> list:
        return [d for d in self.inds if _src_table(d) == table]

    def partitions_of(self, table: str) -> list:
        return [p for p in self.partitions if p.table == table]

    def merge(self, other: "DiscoveredConstraints") -> "DiscoveredConstraints":
        def u(a, b, key=None):
            seen, out = set(), []
            for x in list(a) + list(b):
                if x not in seen:
                    seen.add(x)
                    out.append(x)
            return tuple(out)

        return DiscoveredConstraints(u(self.keys, other.keys), u(self.fds, other.fds),
                                     u(self.inds, other.inds), u(self.partitions, other.partitions),
                                     u(self.optional_participations, other.optional_participations),
                                     u(self.profiled, other.profiled))


def _src_table(d):
    return d.table if isinstance(d, ForeignKey) else d.source_table


# -- keys -----------------------------------------------------------------

def _proj(rows, idx):
    return [tuple(r[i] for i in idx) for r in rows]


def _is_unique(rows, idx) -> bool:
    seen = set()
    for r in rows:
        t = tuple(r[i] for i in idx)
        if None in t or t in seen:
            return False
        seen.add(t)
    return True


def discover_keys(columns: Sequence[str], rows: Sequence[tuple], max_arity: int = 3,
                  exclude: Iterable = ()) -> list:
    """Minimal null-free duplicate-free attribute sets of size at most ``max_arity``.

    Sets equal (as sets) to one in ``exclude`` (typically the declared primary
    key) are dropped from the report but still prune their supersets.
    """
    if not rows:
        return []
    excluded = {frozenset(e) for e in exclude}
    cols = list(columns)
    nullable = {i for i in range(len(cols)) if any(r[i] is None for r in rows)}
    found = []
    for size in range(1, min(max_arity, len(cols)) + 1):
        for idx in combinations(range(len(cols)), size):
            if nullable.intersection(idx):
                continue
            s = frozenset(idx)
            if any(f <= s for f in found):
                continue
            if _is_unique(rows, idx):
                found.append(s)
    out = []
    for s in found:
        names = tuple(cols[i] for i in sorted(s))
        if frozenset(names) not in excluded:
            out.append(names)
    return sorted(out, key=lambda k: (len(k), [cols.index(a) for a in k]))


# -- functional dependencies ----------------------------------------------

def _group_count(rows, idx) -> int:
    return len({tuple(r[i] for i in idx) for r in rows})


def discover_fds(table: str, columns: Sequence[str], rows: Sequence[tuple], max_determinant: int = 2,
                 primary_key: Sequence[str] = ()) -> list:
    """Minimal exact FDs ``X -> A`` with ``|X| <= max_determinant``.

    Nulls compare equal to each other.  Determinants that contain the primary
    key or are superkeys of the instance are suppressed, since every attribute
    trivially depends on them.  Dependents sharing a determinant are grouped.
    """
    if not rows:
        return []
    cols = list(columns)
    n = len(rows)
    pk = {cols.index(a) for a in primary_key if a in cols}
    counts = {}

    def cnt(idx):
        idx = tuple(sorted(idx))
        if idx not in counts:
            counts[idx] = _group_count(rows, idx) if idx else 1
        return counts[idx]

    holding = {}  # dependent -> list of minimal determinants (index tuples)
    for a in range(len(cols)):
        mins = []
        others = [i for i in range(len(cols)) if i != a]
        for size in range(0, min(max_determinant, len(others)) + 1):
            for x in combinations(others, size):
                if any(set(m) <= set(x) for m in mins):
                    continue
                if cnt(x) == cnt(x + (a,)):
                    mins.append(x)
        holding[a] = mins

    grouped = {}
    for a, mins in holding.items():
        for x in mins:
            if pk and pk <= set(x):
                continue
            if cnt(x) == n:
                continue  # superkey: the dependency says nothing
            grouped.setdefault(x, []).append(a)
    out = []
    for x, deps in grouped.items():
        out.append(FunctionalDependency(table, tuple(cols[i] for i in x), tuple(cols[i] for i in sorted(deps))))
    return sorted(out, key=lambda f: (len(f.determinant), [cols.index(c) for c in f.determinant]))


# -- inclusion dependencies -----------------------------------------------

def _value_sets(columns, rows, arity):
    """Projection sets for every ordered attribute list up to ``arity`` (null rows skipped)."""
    out = {}
    for size in range(1, arity + 1):
        for idx in permutations(range(len(columns)), size):
            vals = set()
            for r in rows:
                t = tuple(r[i] for i in idx)
                if None not in t:
                    vals.add(t)
            out[idx] = vals
    return out


def discover_inds(instance, schema: Optional[RelationalSchema], max_arity: int = 2,
                  only: Optional[Iterable[str]] = None, max_key_arity: int = 3) -> list:
    """Inclusions ``S[X] ⊆ T[Y]`` where ``T[Y]`` is duplicate-free and null-free.

    ``X`` ranges over ordered lists of at most ``max_arity`` attributes of
    ``S`` and ``Y`` over attribute combinations of ``T`` (in schema order), so
    each positional correspondence is reported once.  Source rows with a null
    in ``X`` are ignored; at least one non-null source row is required.  When
    ``S = T`` the lists must be disjoint.  With ``only``, a pair is examined
    when either side is in ``only``.

    Constant-augmented inclusions ``(c, K_S) ⊆ T[K_T]`` are also reported when
    exactly one constant ``c`` completes a key of ``T`` for every row of ``S``.
    """
    tables = instance.eval_tables() if hasattr(instance, "eval_tables") else instance
    names = [n for n in tables if tables[n][1]]
    only = set(only) if only is not None else None
    sets = {n: _value_sets(tables[n][0], tables[n][1], max_arity) for n in names}
    # duplicate-free, null-free target lists (combinations only)
    targets = {}
    for n in names:
        cols, rows = tables[n]
        ok = []
        for size in range(1, max_arity + 1):
            for idx in combinations(range(len(cols)), size):
                if len(sets[n][idx]) == len(rows) and _is_unique(rows, idx):
                    ok.append(idx)
        targets[n] = ok

    out = []
    for s in names:
        scols = tables[s][0]
        for t in names:
            if only is not None and s not in only and t not in only:
                continue
            tcols = tables[t][0]
            # unary inclusions first; longer lists only extend unary ones
            unary = {}
            for i in range(len(scols)):
                src = sets[s][(i,)]
                if not src:
                    continue
                for (j,) in (y for y in targets[t] if len(y) == 1):
                    if s == t and i == j:
                        continue
                    if src <= sets[t][(j,)]:
                        unary.setdefault(i, set()).add(j)
            for (j,) in (y for y in targets[t] if len(y) == 1):
                for i in sorted(unary):
                    if j in unary[i]:
                        out.append(ForeignKey(s, (scols[i],), t, (tcols[j],), declared=False))
            for y in targets[t]:
                if len(y) < 2:
                    continue
                for x in permutations(range(len(scols)), len(y)):
                    if s == t and set(x) & set(y):
                        continue
                    src = sets[s][x]
                    if not src:
                        continue
                    tgt = sets[t][y]
                    if src <= tgt:
                        out.append(ForeignKey(s, tuple(scols[i] for i in x), t,
                                              tuple(tcols[j] for j in y), declared=False))
    out.extend(_constant_inds(tables, names, schema, only, max_key_arity))
    return sorted(set(out), key=_ind_key)


def _ind_key(d):
    if isinstance(d, ForeignKey):
        return (d.table, d.target_table, len(d.source), d.source, d.target, "")
    return (d.source_table, d.target_table, len(d.source_projection),
            tuple(str(x) for x in d.source_projection), d.target, "c")


def _identifiers(name, cols, rows, schema, max_key_arity):
    """Declared primary key when present, otherwise discovered minimal keys."""
    if schema is not None and schema.has(name):
        pk = schema.relation(name).primary_key
        if pk:
            return [tuple(pk)]
    return discover_keys(cols, rows, max_key_arity)


def _constant_inds(tables, names, schema, only, max_key_arity):
    out = []
    for s in names:
        scols, srows = tables[s]
        for t in names:
            if s == t or (only is not None and s not in only and t not in only):
                continue
            tcols, trows = tables[t]
            for ks in _identifiers(s, scols, srows, schema, max_key_arity):
                for kt in _identifiers(t, tcols, trows, schema, max_key_arity + 1):
                    if len(kt) != len(ks) + 1:
                        continue
                    ti = [tcols.index(a) for a in kt]
                    tproj = {tuple(r[i] for i in ti) for r in trows}
                    for pos in range(len(kt)):
                        for perm in permutations(ks):
                            c = _single_constant(srows, [scols.index(a) for a in perm], tproj, pos)
                            if c is None:
                                continue
                            proj = list(perm)
                            proj.insert(pos, Constant(c))
                            out.append(InclusionDependency(s, tuple(proj), t, tuple(kt), declared=False))
                            break
    return out


def _single_constant(srows, sidx, tproj, pos):
    if not srows:
        return None
    keys = [tuple(r[i] for i in sidx) for r in srows]
    if any(None in k for k in keys):
        return None
    candidates = {t[pos] for t in tproj if t[pos] is not None}
    good = []
    for c in sorted(candidates):
        if all(k[:pos] + (c,) + k[pos:] in tproj for k in keys):
            good.append(c)
            if len(good) > 1:
                return None
    return good[0] if good else None


# -- partitions -----------------------------------------------------------

def discover_partitions(table: str, columns: Sequence[str], rows: Sequence[tuple],
                        candidates: Iterable = (), max_values: int = 16) -> list:
    """Value partitions over single attributes and the given multi-attribute candidates."""
    cols = list(columns)
    cands = [(c,) for c in cols]
    for c in candidates:
        c = tuple(c)
        if c not in cands and all(a in cols for a in c):
            cands.append(c)
    out = []
    for b in cands:
        idx = [cols.index(a) for a in b]
        values, seen = [], set()
        ok = True
        for r in rows:
            v = tuple(r[i] for i in idx)
            if None in v:
                ok = False
                break
            if v not in seen:
                seen.add(v)
                values.append(v)
                if len(values) > max_values:
                    ok = False
                    break
        if ok and len(values) >= 2:
            out.append(_partition(table, b, values))
    return out


def _partition(table, attrs, values) -> PartitionSpec:
    text = f"{table}.{','.join(attrs)} in {len(values)} values"
    return PartitionSpec(table, tuple(attrs), tuple(values), DerivationRule("enumerated-values", text))


# -- optional participation -----------------------------------------------

def discover_optional_participation(instance, schema: RelationalSchema, references: Iterable) -> list:
    """References whose source values cover a strict, non-empty subset of the target's identifiers."""
    tables = instance.eval_tables() if hasattr(instance, "eval_tables") else instance
    out = []
    for fk in references:
        if fk.table not in tables or fk.target_table not in tables:
            continue
        scols, srows = tables[fk.table]
        tcols, trows = tables[fk.target_table]
        si = [scols.index(a) for a in fk.source]
        ti = [tcols.index(a) for a in fk.target]
        target_vals = {tuple(r[i] for i in ti) for r in trows}
        target_vals.discard(None)
        target_vals = {v for v in target_vals if None not in v}
        covered = {tuple(r[i] for i in si) for r in srows} & target_vals
        if 0 < len(covered) < len(target_vals):
            out.append(Participation(fk.table, tuple(fk.source), fk.target_table, tuple(fk.target),
                                     len(covered), len(target_vals)))
    return sorted(set(out))


# -- driver ---------------------------------------------------------------

def profile(schema: RelationalSchema, instance, config: ProfilerConfig = ProfilerConfig(),
            partition_candidates: Optional[dict] = None, only: Optional[Iterable[str]] = None,
            known: Optional[DiscoveredConstraints] = None) -> DiscoveredConstraints:
    """Profile every relation of ``schema`` that has rows in ``instance``.

    With ``only``, per-relation discovery is limited to those relations and
    inclusions are examined for pairs touching them.
    """
    partition_candidates = partition_candidates or {}
    tables = instance.eval_tables() if hasattr(instance, "eval_tables") else dict(instance)
    order = [r.name for r in schema.relations()]
    names = [n for n in order if n in tables and tables[n][1]]
    focus = [n for n in names if only is None or n in set(only)]
    keys, fds, parts = [], [], []
    for n in focus:
        rel = schema.relation(n)
        cols, rows = tables[n]
        for k in discover_keys(cols, rows, config.max_key_arity, exclude=[rel.primary_key] if rel.primary_key else []):
            keys.append((n, k))
        fds.extend(discover_fds(n, cols, rows, config.max_fd_determinant, rel.primary_key))
        parts.extend(discover_partitions(n, cols, rows, partition_candidates.get(n, ()),
                                         config.max_partition_values))
    sub = {n: tables[n] for n in names}
    inds = discover_inds(sub, schema, config.max_ind_arity, only=focus if only is not None else None,
                         max_key_arity=config.max_key_arity)
    refs = [fk for r in schema.relations() for fk in r.foreign_keys]
    refs += [d for d in inds if isinstance(d, ForeignKey)]
    pk_refs = []
    for fk in refs:
        if only is not None and fk.table not in focus:
            continue
        if not schema.has(fk.target_table):
            continue
        target = schema.relation(fk.target_table)
        ident = tuple(target.primary_key) or next(
            (k for t, k in (known.keys if known else ()) + tuple(keys) if t == fk.target_table), ())
        if ident and set(fk.target) == set(ident):
            pk_refs.append(fk)
    parts_opt = discover_optional_participation(sub, schema, _dedupe(pk_refs))
    log.debug("profiled %d relations", len(focus))
    return DiscoveredConstraints(tuple(keys), tuple(fds), tuple(inds), tuple(parts), tuple(parts_opt),
                                 tuple(focus))


def _dedupe(refs):
    seen, out = set(), []
    for r in refs:
        k = (r.table, r.source, r.target_table, r.target)
        if k not in seen:
            seen.add(k)
            out.append(r)
    return out


# -- constraints document -------------------------------------------------

def constraints_to_dict(dc: DiscoveredConstraints) -> dict:
    def ind(d):
        if isinstance(d, ForeignKey):
            return {"sourceTable": d.table, "source": list(d.source), "targetTable": d.target_table,
                    "target": list(d.target)}
        return {"sourceTable": d.source_table,
                "sourceProjection": [{"const": x.value} if isinstance(x, Constant) else x
                                     for x in d.source_projection],
                "targetTable": d.target_table, "target": list(d.target)}

    return {
        "profiled": list(dc.profiled),
        "keys": [{"table": t, "attrs": list(k)} for t, k in dc.keys],
        "fds": [{"table": f.table, "determinant": list(f.determinant), "dependent": list(f.dependent)}
                for f in dc.fds],
        "inds": [ind(d) for d in dc.inds],
        "partitions": [{"table": p.table, "attrs": list(p.attrs), "values": [list(v) for v in p.values]}
                       for p in dc.partitions],
        "optionalParticipations": [
            {"relTable": p.rel_table, "source": list(p.source), "targetTable": p.target_table,
             "target": list(p.target), "covered": p.covered, "total": p.total,
             "coverage": round(p.coverage, 4)}
            for p in dc.optional_participations],
    }


def constraints_from_dict(doc: dict) -> DiscoveredConstraints:
    inds = []
    for d in doc.get("inds", []):
        if "sourceProjection" in d:
            proj = tuple(Constant(x["const"]) if isinstance(x, dict) else x for x in d["sourceProjection"])
            inds.append(InclusionDependency(d["sourceTable"], proj, d["targetTable"], tuple(d["target"]),
                                            declared=False))
        else:
            inds.append(ForeignKey(d["sourceTable"], tuple(d["source"]), d["targetTable"], tuple(d["target"]),
                                   declared=False))
    return DiscoveredConstraints(
        tuple((k["table"], tuple(k["attrs"])) for k in doc.get("keys", [])),
        tuple(FunctionalDependency(f["table"], tuple(f["determinant"]), tuple(f["dependent"]))
              for f in doc.get("fds", [])),
        tuple(inds),
        tuple(_partition(p["table"], p["attrs"], [tuple(v) for v in p["values"]])
              for p in doc.get("partitions", [])),
        tuple(Participation(p["relTable"], tuple(p["source"]), p["targetTable"], tuple(p["target"]),
                            p["covered"], p["total"]) for p in doc.get("optionalParticipations", [])),
        tuple(doc.get("profiled", [])),
    )
