"""Brute-force references built directly from definitions, independent of the package code."""

from __future__ import annotations

import math
from collections import deque


def _users(triples):
    return sorted({u for u, _, _ in triples})


def _pivot_feature(triple, projection):
    u, r, t = triple
    return (r, t) if projection == "items" else (t, r)


def _set_value(kernel, a, b):
    inter = a & b
    if not inter:
        return 0.0
    n = len(inter)
    if kernel == "matching":
        return float(n)
    if kernel == "overlap":
        return n / min(len(a), len(b))
    if kernel == "dice":
        return 2 * n / (len(a) + len(b))
    if kernel == "jaccard":
        return n / len(a | b)
    if kernel == "cosine":
        return n / math.sqrt(len(a) * len(b))
    raise ValueError(kernel)


def _mip_value(a, b, p):
    inter = a & b
    if not inter:
        return 0.0
    den = math.log(min(p[x] for x in a)) + math.log(min(p[x] for x in b))
    if den == 0:
        return 1.0
    return 2 * math.log(min(p[x] for x in inter)) / den


def similarity(triples, kernel, aggregation, projection, u, v):
    """Score of (u, v) computed from the raw triple set."""
    triples = set(triples)
    users = _users(triples)
    if aggregation == "distributional":
        vec = {w: {} for w in users}
        for tr in triples:
            piv, x = _pivot_feature(tr, projection)
            vec[tr[0]].setdefault(x, set()).add(piv)
        counts = {w: {x: len(s) for x, s in vec[w].items()} for w in users}
        a, b = set(counts[u]), set(counts[v])
        if kernel == "cosine":
            if not a & b:
                return 0.0
            dot = sum(counts[u][x] * counts[v][x] for x in a & b)
            nu = math.sqrt(sum(c * c for c in counts[u].values()))
            nv = math.sqrt(sum(c * c for c in counts[v].values()))
            return dot / (nu * nv)
        if kernel == "mip":
            p = {}
            for w in users:
                for x in counts[w]:
                    p[x] = p.get(x, 0) + 1
            p = {x: c / len(users) for x, c in p.items()}
            return _mip_value(a, b, p)
        return _set_value(kernel, a, b)
    # collaborative: per-pivot sets, summed
    sets = {}
    for tr in triples:
        piv, x = _pivot_feature(tr, projection)
        sets.setdefault(piv, {}).setdefault(tr[0], set()).add(x)
    total = 0.0
    for piv, by_user in sets.items():
        if u not in by_user or v not in by_user:
            continue
        a, b = by_user[u], by_user[v]
        if kernel == "mip":
            p = {}
            for feats in by_user.values():
                for x in feats:
                    p[x] = p.get(x, 0) + 1
            p = {x: c / len(by_user) for x, c in p.items()}
            total += _mip_value(a, b, p)
        else:
            total += _set_value(kernel, a, b)
    return total


def mann_whitney_auc(scores, labels):
    """P(score of a random positive > a random negative), ties counting 1/2."""
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    wins = 0.0
    for p in pos:
        for q in neg:
            wins += 1.0 if p > q else 0.5 if p == q else 0.0
    return wins / (len(pos) * len(neg))


def bfs(adj, source, dmax):
    dist = {source: 0}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        if dist[x] == dmax:
            continue
        for y in adj.get(x, ()):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    del dist[source]
    return dist


def tag_cosine(triples, u, v):
    freq = {}
    for w, r, t in set(triples):
        freq.setdefault(w, {}).setdefault(t, set()).add(r)
    fu = {t: len(s) for t, s in freq.get(u, {}).items()}
    fv = {t: len(s) for t, s in freq.get(v, {}).items()}
    dot = sum(fu[t] * fv[t] for t in fu if t in fv)
    if dot == 0:
        return 0.0
    return dot / math.sqrt(sum(c * c for c in fu.values()) * sum(c * c for c in fv.values()))


def group_cosine(groups, u, v):
    gu, gv = groups.get(u, set()), groups.get(v, set())
    if not gu or not gv:
        return 0.0
    return len(gu & gv) / math.sqrt(len(gu) * len(gv))
