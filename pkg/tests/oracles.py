"""Brute-force reference implementations used as test oracles.

They enumerate every attribute subset and check it directly, using numpy
sorting rather than the counting tricks of the profiler.  Tables are int
arrays with -1 standing for null.
"""

from itertools import combinations, permutations

import numpy as np

NULL = -1


def to_rows(arr):
    return [tuple(None if x == NULL else f"v{x}" for x in row) for row in arr.tolist()]


def _distinct(arr, idx):
    if arr.shape[0] == 0:
        return 0
    return np.unique(arr[:, list(idx)], axis=0).shape[0]


def unique_null_free(arr, idx) -> bool:
    sub = arr[:, list(idx)]
    return arr.shape[0] > 0 and not (sub == NULL).any() and _distinct(arr, idx) == arr.shape[0]


def keys(cols, arr, max_arity=3):
    """Every minimal null-free duplicate-free attribute set, by exhaustive subset checks."""
    if arr.shape[0] == 0:
        return set()
    good = [set(s) for size in range(1, min(max_arity, len(cols)) + 1)
            for s in combinations(range(len(cols)), size) if unique_null_free(arr, s)]
    minimal = [s for s in good if not any(o < s for o in good)]
    return {tuple(cols[i] for i in sorted(s)) for s in minimal}


def fd_holds(arr, x, a) -> bool:
    """Rows agreeing on ``x`` agree on ``a`` (nulls equal to each other)."""
    if arr.shape[0] < 2:
        return True
    if not x:
        return bool((arr[:, a] == arr[0, a]).all())
    order = np.lexsort([arr[:, a]] + [arr[:, i] for i in reversed(x)])
    s = arr[order]
    same_x = (s[1:, list(x)] == s[:-1, list(x)]).all(axis=1)
    return bool((s[1:, a][same_x] == s[:-1, a][same_x]).all())


def fds(cols, arr, max_det=2, pk=()):
    """``{(determinant, dependents)}`` for minimal FDs, minus pk-containing and superkey determinants."""
    n = arr.shape[0]
    if n == 0:
        return set()
    pki = {cols.index(c) for c in pk}
    grouped = {}
    for a in range(len(cols)):
        others = [i for i in range(len(cols)) if i != a]
        holding = [x for size in range(0, min(max_det, len(others)) + 1)
                   for x in combinations(others, size) if fd_holds(arr, x, a)]
        for x in holding:
            if any(set(y) < set(x) for y in holding):
                continue
            if pki and pki <= set(x):
                continue
            if x and _distinct(arr, x) == n:
                continue
            if not x and n == 1:
                continue
            grouped.setdefault(x, set()).add(a)
    return {(tuple(cols[i] for i in x), tuple(cols[i] for i in sorted(d))) for x, d in grouped.items()}


def _proj(rows, idx):
    out = set()
    for r in rows:
        t = tuple(r[i] for i in idx)
        if None not in t:
            out.add(t)
    return out


def inds(tables, max_arity=2, max_key_arity=3):
    """Plain ``(S, X, T, Y)`` and constant ``(S, proj, T, Y)`` inclusions over ``name -> (cols, int array)``."""
    rows = {n: to_rows(a) for n, (c, a) in tables.items()}
    live = [n for n in tables if tables[n][1].shape[0] > 0]
    plain = set()
    for s in live:
        scols = tables[s][0]
        for t in live:
            tcols, tarr = tables[t]
            for size in range(1, max_arity + 1):
                for y in combinations(range(len(tcols)), size):
                    if not unique_null_free(tarr, y):
                        continue
                    tgt = _proj(rows[t], y)
                    for x in permutations(range(len(scols)), size):
                        if s == t and set(x) & set(y):
                            continue
                        src = _proj(rows[s], x)
                        if src and src <= tgt:
                            plain.add((s, tuple(scols[i] for i in x), t, tuple(tcols[j] for j in y)))
    const = set()
    for s in live:
        scols, sarr = tables[s]
        for t in live:
            if s == t:
                continue
            tcols, tarr = tables[t]
            for ks in sorted(keys(scols, sarr, max_key_arity)):
                for kt in sorted(keys(tcols, tarr, max_key_arity + 1)):
                    if len(kt) != len(ks) + 1:
                        continue
                    ti = [tcols.index(c) for c in kt]
                    tset = {tuple(r[i] for i in ti) for r in rows[t]}
                    for pos in range(len(kt)):
                        for perm in permutations(ks):
                            si = [scols.index(c) for c in perm]
                            svals = [tuple(r[i] for i in si) for r in rows[s]]
                            fits = [c for c in sorted({r[ti[pos]] for r in rows[t]} - {None})
                                    if all(v[:pos] + (c,) + v[pos:] in tset for v in svals)]
                            if len(fits) == 1:
                                proj = list(perm)
                                proj.insert(pos, ("const", fits[0]))
                                const.add((s, tuple(proj), t, tuple(kt)))
                                break
    return plain, const


def random_tables(rng, max_cols=8, max_rows=200):
    """One or two tables, at most ``max_cols`` columns in total, small value domains."""
    ntab = int(rng.integers(1, 3))
    total = int(rng.integers(ntab, max_cols + 1))
    split = [total] if ntab == 1 else [int(rng.integers(1, total)), 0]
    if ntab == 2:
        split[1] = total - split[0]
    out = {}
    for k, m in enumerate(split):
        n = int(rng.choice([0, 1, 2, 5, 12, 30, 80, max_rows], p=[.04, .06, .1, .25, .25, .15, .1, .05]))
        dom = int(rng.integers(1, 8))
        arr = rng.integers(0, dom, size=(n, m))
        for j in range(m):
            r = rng.random()
            if r < 0.25 and n:
                arr[:, j] = rng.permutation(max(n, dom))[:n]  # a key column
            elif r < 0.35:
                arr[:, j] = np.where(rng.random(n) < 0.2, NULL, arr[:, j])
        out[f"t{k}"] = (tuple(f"c{k}{j}" for j in range(m)), arr)
    return out
