"""Synthetic folksonomies and social graphs with planted homophily.

Users belong to interest communities.  Each community prefers its own slice
of the tag, item and group universes (Zipf popularity inside the slice); a
global Zipf background covers everything.  ``homophily`` is both the weight
of the community profile in each draw and the probability that an edge is
placed inside the community.  Activity is heavy tailed: one latent
power-law level per user drives n_t, a and n_g (with independent log-normal
noise), so these metrics are positively correlated.  The target degree
follows the same level for a ``degree_coupling`` share of users and an
independent draw from the same law otherwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .core import Folksonomy, GroupMembership, SocialGraph
from .errors import DomainError

__all__ = ["SynthConfig", "SyntheticData", "generate", "synthetic_baseline", "write_dataset"]


@dataclass(frozen=True)
class SynthConfig:
    user_count: int = 1000
    tag_universe: int = 2000
    item_universe: int = 5000
    group_universe: int = 1000
    activity_exponent: float = 2.5
    activity_cap: int = 100
    homophily: float = 0.5
    community_count: int = 10
    mean_degree: float = 10.0
    degree_cap: int = 200  # hard bound on realized degree; surplus edges are dropped
    degree_coupling: float = 0.3  # share of users whose target degree follows their activity level
    tags_per_activity: float = 4.0
    tag_frequency: float = 1.6  # mean f_u(t)
    items_per_tag: float = 1.5  # size of a user's item pool relative to n_t
    groups_per_activity: float = 2.0
    activity_mixing: float = 0.0  # share of edges placed between users of similar target degree
    mixing_width: float = 0.02  # spread of those partners, as a fraction of the pool
    noise: float = 0.4  # log-normal sigma of each metric around the latent level
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.homophily <= 1.0:
            raise DomainError("homophily must be in [0, 1]")
        if not 0.0 <= self.activity_mixing <= 1.0:
            raise DomainError("activity_mixing must be in [0, 1]")
        if not 0.0 <= self.degree_coupling <= 1.0:
            raise DomainError("degree_coupling must be in [0, 1]")
        for name in ("user_count", "tag_universe", "item_universe", "group_universe", "community_count", "activity_cap", "degree_cap"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1")
        if self.activity_exponent <= 1.0:
            raise DomainError("activity_exponent must exceed 1")

    def as_dict(self) -> dict:
        return asdict(self)


class SyntheticData(NamedTuple):
    folksonomy: Folksonomy
    graph: SocialGraph
    groups: GroupMembership
    communities: dict[str, int]


def _zipf_weights(n: int, rng: np.random.Generator, exponent: float = 1.0) -> np.ndarray:
    """Zipf weights over ``n`` values with a random rank assignment."""
    w = 1.0 / np.arange(1, n + 1, dtype=np.float64) ** exponent
    return w[rng.permutation(n)]


class _Mixture:
    """Per-community categorical distributions mixed with a global background."""

    def __init__(self, n_values: int, n_comm: int, rng: np.random.Generator):
        self.n = n_values
        perm = rng.permutation(n_values)
        self.slices = np.array_split(perm, n_comm)
        self.cums = []
        for sl in self.slices:
            if len(sl) == 0:  # more communities than values: fall back to everything
                sl = perm
            self.cums.append((sl, np.cumsum(_zipf_weights(len(sl), rng))))
        self.background = np.cumsum(_zipf_weights(n_values, rng))

    def draw(self, community: np.ndarray, homophily: float, rng: np.random.Generator) -> np.ndarray:
        n = len(community)
        out = np.empty(n, dtype=np.int64)
        local = rng.random(n) < homophily
        u = rng.random(n)
        bg = ~local
        out[bg] = np.minimum(np.searchsorted(self.background, u[bg] * self.background[-1], side="right"), self.n - 1)
        for c, (sl, cum) in enumerate(self.cums):
            sel = local & (community == c)
            if sel.any():
                idx = np.searchsorted(cum, u[sel] * cum[-1], side="right")
                out[sel] = sl[np.minimum(idx, len(sl) - 1)]
        return out


def _distinct_draws(
    owners_comm: np.ndarray, counts: np.ndarray, mix: _Mixture, homophily: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Up to ``counts[o]`` distinct values per owner; returns (owner, value) sorted by owner."""
    counts = np.minimum(counts, mix.n)
    extra = np.ceil(counts * 0.5).astype(np.int64) + 2
    slots = counts + extra
    owner = np.repeat(np.arange(len(counts)), slots)
    for _ in range(4):
        values = mix.draw(owners_comm[owner], homophily, rng)
        key = owner * mix.n + values
        uniq, first = np.unique(key, return_index=True)
        # keep the first counts[o] distinct values in draw order
        order = np.argsort(first, kind="stable")
        uniq = uniq[order]
        o = uniq // mix.n
        order2 = np.argsort(o, kind="stable")
        uniq, o = uniq[order2], o[order2]
        start = np.searchsorted(o, np.arange(len(counts)))
        rank = np.arange(len(o)) - start[o]
        keep = rank < counts[o]
        got = np.bincount(o[keep], minlength=len(counts))
        if (got >= counts).all():
            break
        slots = slots * 2
        owner = np.repeat(np.arange(len(counts)), slots)
    return o[keep], uniq[keep] % mix.n


def _power_law(n: int, exponent: float, cap: int, rng: np.random.Generator) -> np.ndarray:
    support = np.arange(1, cap + 1, dtype=np.float64)
    p = support**-exponent
    return rng.choice(support, size=n, p=p / p.sum())


def _stochastic_round(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    base = np.floor(x)
    return (base + (rng.random(len(x)) < (x - base))).astype(np.int64)


def _edges(cfg: SynthConfig, community: np.ndarray, k_target: np.ndarray, rng) -> tuple:
    n = cfg.user_count
    initiations = _stochastic_round(k_target / 2.0, rng)
    src = np.repeat(np.arange(n), initiations)
    m = len(src)
    intra = rng.random(m) < cfg.homophily
    local = rng.random(m) < cfg.activity_mixing
    dst = np.empty(m, dtype=np.int64)
    order_all = np.lexsort((rng.random(n), k_target))  # by target degree, random tie-break
    rank_all = np.empty(n, dtype=np.int64)
    rank_all[order_all] = np.arange(n)

    pools = [(~intra, np.arange(n))]
    for c in range(cfg.community_count):
        pools.append((intra & (community[src] == c), np.flatnonzero(community == c)))
    for sel, members in pools:
        if not sel.any():
            continue
        idx = np.flatnonzero(sel)
        size = len(members)
        # degree-proportional partners
        cum = np.cumsum(k_target[members].astype(np.float64))
        chung = idx[~local[idx]]
        if len(chung):
            pick = np.searchsorted(cum, rng.random(len(chung)) * cum[-1], side="right")
            dst[chung] = members[np.minimum(pick, size - 1)]
        # assortative partners: near the source's target-degree quantile inside the pool
        near = idx[local[idx]]
        if len(near):
            sorted_members = members[np.argsort(rank_all[members], kind="stable")]
            pos_in_pool = np.searchsorted(rank_all[sorted_members], rank_all[src[near]])
            jitter = rng.normal(0.0, cfg.mixing_width * size, len(near))
            j = np.clip(np.rint(pos_in_pool + jitter), 0, size - 1).astype(np.int64)
            dst[near] = sorted_members[j]
    return src, dst


def _cap_degrees(n: int, src: np.ndarray, dst: np.ndarray, cap: int, rng) -> tuple:
    """Drop loops and repeats, then visit edges in random order and keep each while both ends are under ``cap``."""
    lo, hi = np.minimum(src, dst), np.maximum(src, dst)
    keep = lo != hi
    key = np.unique(lo[keep] * n + hi[keep])
    key = key[rng.permutation(len(key))]
    a, b = key // n, key % n
    if (np.bincount(a, minlength=n) + np.bincount(b, minlength=n)).max(initial=0) <= cap:
        return a, b
    deg = np.zeros(n, dtype=np.int64)
    kept = np.zeros(len(key), dtype=bool)
    for e, (u, v) in enumerate(zip(a.tolist(), b.tolist())):
        if deg[u] < cap and deg[v] < cap:
            deg[u] += 1
            deg[v] += 1
            kept[e] = True
    return a[kept], b[kept]


def generate(cfg: SynthConfig) -> SyntheticData:
    """Draw one synthetic dataset; identical ``cfg`` gives identical output."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.user_count
    community = rng.integers(0, cfg.community_count, n)
    level = _power_law(n, cfg.activity_exponent, cfg.activity_cap, rng)
    noise = lambda: np.exp(rng.normal(0.0, cfg.noise, n) - cfg.noise**2 / 2)  # noqa: E731

    n_t = np.maximum(1, np.rint(cfg.tags_per_activity * level * noise())).astype(np.int64)
    if n_t.max() > cfg.tag_universe:
        warnings.warn(f"n_t draws up to {n_t.max()} exceed tag universe {cfg.tag_universe}; clamped", stacklevel=2)
        n_t = np.minimum(n_t, cfg.tag_universe)
    n_g = np.maximum(1, np.rint(cfg.groups_per_activity * level * noise())).astype(np.int64)
    if n_g.max() > cfg.group_universe:
        warnings.warn(f"n_g draws exceed group universe {cfg.group_universe}; clamped", stacklevel=2)
        n_g = np.minimum(n_g, cfg.group_universe)
    # the rest draw an independent level from the same law, so k stays heavy tailed either way
    drive = np.where(rng.random(n) < cfg.degree_coupling, level, _power_law(n, cfg.activity_exponent, cfg.activity_cap, rng))
    k_target = np.minimum(cfg.mean_degree * drive / float(drive.mean()) * noise(), cfg.degree_cap)

    tag_mix = _Mixture(cfg.tag_universe, cfg.community_count, rng)
    item_mix = _Mixture(cfg.item_universe, cfg.community_count, rng)
    group_mix = _Mixture(cfg.group_universe, cfg.community_count, rng)

    # vocabularies, then f_u(t) distinct items per (u, t) from the user's item pool
    tu, tt = _distinct_draws(community, n_t, tag_mix, cfg.homophily, rng)
    real_nt = np.bincount(tu, minlength=n)
    pool_size = np.maximum(1, np.rint(real_nt * cfg.items_per_tag)).astype(np.int64)
    pu, pitems = _distinct_draws(community, pool_size, item_mix, cfg.homophily, rng)
    real_pool = np.bincount(pu, minlength=n)
    pool_start = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(real_pool, out=pool_start[1:])
    freq = rng.geometric(1.0 / max(cfg.tag_frequency, 1.0), len(tu))
    freq = np.minimum(freq, real_pool[tu])
    slot_user = np.repeat(tu, freq)
    slot_tag = np.repeat(tt, freq)
    slot_item = pitems[pool_start[slot_user] + (rng.random(len(slot_user)) * real_pool[slot_user]).astype(np.int64)]

    gu, gg = _distinct_draws(community, n_g, group_mix, cfg.homophily, rng)
    src, dst = _cap_degrees(n, *_edges(cfg, community, k_target, rng), cfg.degree_cap, rng)

    width = len(str(max(n - 1, 1)))
    users = tuple(f"u{i:0{width}d}" for i in range(n))
    tags = tuple(f"t{i:0{len(str(cfg.tag_universe))}d}" for i in range(cfg.tag_universe))
    items = tuple(f"i{i:0{len(str(cfg.item_universe))}d}" for i in range(cfg.item_universe))
    groups = tuple(f"g{i:0{len(str(cfg.group_universe))}d}" for i in range(cfg.group_universe))
    f = Folksonomy.from_codes(users, items, tags, slot_user, slot_item, slot_tag)
    g = SocialGraph.from_codes(users, src, dst)
    m = GroupMembership.from_codes(users, groups, gu, gg)
    return SyntheticData(f, g, m, {u: int(c) for u, c in zip(users, community.tolist())})


def synthetic_baseline(
    f: Folksonomy,
    g: SocialGraph,
    seed: int = 0,
    size: int = 60,
    friend_share: float = 0.5,
    noise: float = 2.0,
    users=None,
) -> dict[tuple[str, str], float]:
    """Candidate lists with a noisy degree-product affinity, as a stand-in recommender.

    For each user up to ``friend_share * size`` of its friends plus random
    other users fill a list of ``size`` candidates; the affinity of (u, v) is
    log(1 + k_u) + log(1 + k_v) + N(0, noise).  Only active users (with
    annotations) are listed.
    """
    rng = np.random.default_rng(seed)
    deg = g.degrees
    logk = np.log1p(deg.astype(np.float64))
    active = np.array([u in f.user_index for u in g.users], dtype=bool)
    active_idx = np.flatnonzero(active)
    if users is None:
        owners = active_idx
    else:
        owners = np.array(sorted(g.user_index[u] for u in users if u in g.user_index), dtype=np.int64)
    out: dict[tuple[str, str], float] = {}
    n_friends = int(math.floor(size * friend_share))
    for u in owners.tolist():
        nb = g.neighbors_of(u)
        nb = nb[active[nb]]
        if len(nb) > n_friends:
            nb = rng.choice(nb, n_friends, replace=False)
        need = size - len(nb)
        cand = set(nb.tolist())
        if len(active_idx) > 1:
            for v in rng.choice(active_idx, min(len(active_idx), need * 2 + 4), replace=False).tolist():
                if len(cand) >= size:
                    break
                if v != u:
                    cand.add(v)
        cand.discard(u)
        cand = np.array(sorted(cand), dtype=np.int64)
        scores = logk[u] + logk[cand] + rng.normal(0.0, noise, len(cand))
        for v, s in zip(cand.tolist(), scores.tolist()):
            out[(g.users[u], g.users[v])] = round(s, 6)
    return out


def write_dataset(data: SyntheticData, directory, baseline: dict | None = None) -> dict[str, str]:
    """Write the TSV files; returns name -> path."""
    import os

    os.makedirs(directory, exist_ok=True)
    paths = {
        "triples": os.path.join(directory, "triples.tsv"),
        "edges": os.path.join(directory, "edges.tsv"),
        "groups": os.path.join(directory, "groups.tsv"),
        "communities": os.path.join(directory, "communities.tsv"),
    }
    data.folksonomy.write_tsv(paths["triples"])
    data.graph.write_tsv(paths["edges"])
    data.groups.write_tsv(paths["groups"])
    with open(paths["communities"], "w", encoding="utf-8", newline="\n") as fh:
        for u, c in sorted(data.communities.items()):
            fh.write(f"{u}\t{c}\n")
    if baseline is not None:
        paths["baseline"] = os.path.join(directory, "baseline.tsv")
        with open(paths["baseline"], "w", encoding="utf-8", newline="\n") as fh:
            for (a, b), s in baseline.items():
                fh.write(f"{a}\t{b}\t{s!r}\n")
    return paths
