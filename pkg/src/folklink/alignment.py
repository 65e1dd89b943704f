"""Lexical (tags) and topical (groups) alignment of user pairs versus social distance."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .core import CsrRows, Folksonomy, GroupMembership, SocialGraph, normalize_id
from .errors import DomainError, EmptyStratumError, NotFoundError
from .metrics import Distribution

__all__ = [
    "QUANTITIES",
    "PairAlignment",
    "AlignmentConfig",
    "DistanceProfile",
    "AlignmentStudy",
    "pair_alignment",
    "bfs_distances",
    "alignment_profile",
    "alignment_histogram",
    "alignment_study",
    "random_pair_baseline",
    "bin_values",
]

QUANTITIES = ("n_st", "sigma_tags", "n_sg", "sigma_groups")
_COSINES = ("sigma_tags", "sigma_groups")


@dataclass(frozen=True)
class PairAlignment:
    user_a: str
    user_b: str
    n_st: int
    n_sg: int
    sigma_tags: float
    sigma_groups: float


@dataclass(frozen=True)
class AlignmentConfig:
    """BFS sampling parameters.

    ``sources`` BFS roots are drawn uniformly without replacement from the
    graph nodes; pairs are stratified by hop distance up to ``dmax``.  With
    ``exhaustive_d2`` every node is a root for distances 1 and 2.
    """

    sources: int = 20000
    dmax: int = 6
    seed: int = 0
    exhaustive_d2: bool = False

    def __post_init__(self):
        if self.sources < 1:
            raise DomainError("sources must be >= 1")
        if self.dmax < 1:
            raise DomainError("dmax must be >= 1")


@dataclass(frozen=True)
class DistanceProfile:
    d: tuple
    mean_n_st: tuple
    mean_n_sg: tuple
    mean_sigma_tags: tuple
    mean_sigma_groups: tuple
    pair_count: tuple
    config: AlignmentConfig

    def column(self, quantity: str) -> tuple:
        if quantity not in QUANTITIES:
            raise DomainError(f"unknown quantity {quantity!r}")
        return getattr(self, "mean_" + quantity)

    def at(self, d: int, quantity: str) -> float:
        return self.column(quantity)[self.d.index(d)]


def _cosine(fu: dict, fv: dict) -> float:
    if not fu or not fv:
        return 0.0
    if len(fu) > len(fv):
        fu, fv = fv, fu
    dot = sum(c * fv[t] for t, c in fu.items() if t in fv)
    if dot == 0:
        return 0.0
    nu = math.sqrt(sum(c * c for c in fu.values()))
    nv = math.sqrt(sum(c * c for c in fv.values()))
    return min(1.0, dot / (nu * nv))


def pair_alignment(f: Folksonomy | None, m: GroupMembership | None, u: str, v: str) -> PairAlignment:
    """Shared tags/groups and the two cosine similarities for one pair."""
    u, v = normalize_id(u), normalize_id(v)
    if u == v:
        raise DomainError("pair_alignment needs two distinct users")
    for x in (u, v):
        if not ((f is not None and x in f.user_index) or (m is not None and x in m.user_index)):
            raise NotFoundError(f"unknown user {x!r}")
    fu = f.tag_freq.get(u, {}) if f is not None else {}
    fv = f.tag_freq.get(v, {}) if f is not None else {}
    gu = m.membership.get(u, frozenset()) if m is not None else frozenset()
    gv = m.membership.get(v, frozenset()) if m is not None else frozenset()
    n_st = len(fu.keys() & fv.keys())
    n_sg = len(gu & gv)
    sigma_groups = min(1.0, n_sg / math.sqrt(len(gu) * len(gv))) if n_sg else 0.0
    return PairAlignment(u, v, n_st, n_sg, _cosine(fu, fv), sigma_groups)


def bfs_distances(g: SocialGraph, source: str, dmax: int) -> dict[str, int]:
    """Hop distances (1..dmax) from ``source``; unreachable users are absent."""
    s = g.index_of(source)
    nodes, dist = kernels.bfs_levels(g.indptr, g.indices, s, dmax)
    return {g.users[n]: int(d) for n, d in zip(nodes.tolist(), dist.tolist())}


class _Aligned:
    """Tag and group rows re-indexed to graph node order."""

    def __init__(self, f: Folksonomy | None, g: SocialGraph, m: GroupMembership | None):
        n = g.node_count
        if f is not None:
            codes = np.array([f.user_index.get(u, -1) for u in g.users], dtype=np.int64)
            self.tags = f.user_tag.take_rows(codes)
        else:
            self.tags = CsrRows.from_sorted([], [], [], n, 1)
        if m is not None:
            codes = np.array([m.user_index.get(u, -1) for u in g.users], dtype=np.int64)
            self.groups = m.rows.take_rows(codes)
        else:
            self.groups = CsrRows.from_sorted([], [], [], n, 1)
        sq = self.tags.data * self.tags.data
        rows = np.repeat(np.arange(n), self.tags.row_lengths())
        self.tag_norm = np.sqrt(np.bincount(rows, weights=sq, minlength=n))
        self.n_groups = self.groups.row_lengths().astype(np.float64)
        self.tag_scratch = np.zeros(max(self.tags.n_cols, 1))
        self.group_scratch = np.zeros(max(self.groups.n_cols, 1))

    def measure(self, s: int, targets: np.ndarray):
        t = self.tags
        n_st, dot = kernels.pair_overlap(t.indptr, t.indices, t.data, s, targets, self.tag_scratch)
        denom = self.tag_norm[s] * self.tag_norm[targets]
        sig = np.zeros(len(targets))
        ok = (denom > 0) & (n_st > 0)
        sig[ok] = np.minimum(1.0, dot[ok] / denom[ok])
        gr = self.groups
        n_sg, _ = kernels.pair_overlap(gr.indptr, gr.indices, gr.data, s, targets, self.group_scratch)
        gden = np.sqrt(self.n_groups[s] * self.n_groups[targets])
        sigg = np.zeros(len(targets))
        ok = (gden > 0) & (n_sg > 0)
        sigg[ok] = np.minimum(1.0, n_sg[ok] / gden[ok])
        return {"n_st": n_st, "sigma_tags": sig, "n_sg": n_sg, "sigma_groups": sigg}


def _choose_sources(g: SocialGraph, cfg: AlignmentConfig) -> np.ndarray:
    n = g.node_count
    count = cfg.sources
    if count > n:
        warnings.warn(f"{count} BFS sources requested but graph has {n} users; using all", stacklevel=3)
        count = n
    rng = np.random.default_rng(cfg.seed)
    return rng.choice(n, size=count, replace=False)


def _sweep(data: _Aligned, g: SocialGraph, sources, dmin: int, dmax: int) -> Iterator[tuple[np.ndarray, dict]]:
    """Yield (distances, quantities) per source, counting each unordered pair once."""
    done = np.zeros(g.node_count, dtype=bool)
    scratch = kernels.BfsScratch(g.node_count)
    for s in np.asarray(sources).tolist():
        nodes, dist = kernels.bfs_levels(g.indptr, g.indices, s, dmax, scratch)
        # a pair of two roots is reached from both; keep it for the first root only
        keep = ~done[nodes]
        if dmin > 1:
            keep &= dist >= dmin
        done[s] = True
        nodes, dist = nodes[keep], dist[keep]
        if len(nodes):
            yield dist, data.measure(s, nodes)


def _strata(f, g, m, cfg: AlignmentConfig) -> Iterator[tuple[np.ndarray, dict]]:
    if g.node_count == 0:
        raise DomainError("alignment needs a nonempty graph")
    data = _Aligned(f, g, m)
    sampled = _choose_sources(g, cfg)
    if cfg.exhaustive_d2:
        yield from _sweep(data, g, np.arange(g.node_count), 1, min(2, cfg.dmax))
        if cfg.dmax > 2:
            yield from _sweep(data, g, sampled, 3, cfg.dmax)
    else:
        yield from _sweep(data, g, sampled, 1, cfg.dmax)


def bin_values(values: np.ndarray, quantity: str, bin_width: float) -> np.ndarray:
    """Histogram keys: integer counts as-is, cosines floored to ``bin_width``."""
    if quantity in _COSINES:
        idx = np.floor(np.asarray(values) / bin_width + 1e-9).astype(np.int64)
        return np.round(idx * bin_width, 12)
    return np.asarray(values, dtype=np.int64)


@dataclass
class AlignmentStudy:
    """Profile plus per-distance histograms collected in one sweep."""

    profile: DistanceProfile
    histograms: dict = field(default_factory=dict)  # (d, quantity) -> Distribution


def alignment_study(
    f: Folksonomy | None,
    g: SocialGraph,
    m: GroupMembership | None,
    cfg: AlignmentConfig,
    histogram_distances: Sequence[int] = (),
    bin_width: float = 0.02,
) -> AlignmentStudy:
    dmax = cfg.dmax
    sums = {q: np.zeros(dmax + 1) for q in QUANTITIES}
    counts = np.zeros(dmax + 1, dtype=np.int64)
    wanted = set(int(d) for d in histogram_distances)
    hist_parts = {(d, q): [] for d in wanted for q in QUANTITIES}
    for dist, values in _strata(f, g, m, cfg):
        counts += np.bincount(dist, minlength=dmax + 1)
        for q in QUANTITIES:
            sums[q] += np.bincount(dist, weights=values[q].astype(np.float64), minlength=dmax + 1)
        for d in wanted:
            sel = dist == d
            if sel.any():
                for q in QUANTITIES:
                    hist_parts[(d, q)].append(bin_values(values[q][sel], q, bin_width))
    rows = [d for d in range(1, dmax + 1) if counts[d] > 0]
    means = {q: tuple(float(sums[q][d] / counts[d]) for d in rows) for q in QUANTITIES}
    profile = DistanceProfile(
        d=tuple(rows),
        mean_n_st=means["n_st"],
        mean_n_sg=means["n_sg"],
        mean_sigma_tags=means["sigma_tags"],
        mean_sigma_groups=means["sigma_groups"],
        pair_count=tuple(int(counts[d]) for d in rows),
        config=cfg,
    )
    hists = {}
    for key, parts in hist_parts.items():
        if parts:
            hists[key] = _distribution(np.concatenate(parts))
    return AlignmentStudy(profile, hists)


def _distribution(keys: np.ndarray) -> Distribution:
    support, c = np.unique(keys, return_counts=True)
    return Distribution(tuple(support.tolist()), tuple((c / c.sum()).tolist()), int(c.sum()))


def alignment_profile(f: Folksonomy | None, g: SocialGraph, m: GroupMembership | None, cfg: AlignmentConfig) -> DistanceProfile:
    """Mean n_st, n_sg, sigma_tags, sigma_groups per social distance 1..dmax."""
    if f is not None and len(f) == 0 and (m is None or m.user_count == 0):
        raise DomainError("alignment needs a nonempty folksonomy")
    return alignment_study(f, g, m, cfg).profile


def alignment_histogram(
    f: Folksonomy | None,
    g: SocialGraph,
    m: GroupMembership | None,
    d: int,
    quantity: str,
    cfg: AlignmentConfig | None = None,
    bin_width: float = 0.02,
) -> Distribution:
    """Distribution of one alignment quantity over sampled pairs at exactly distance ``d``."""
    if d < 1:
        raise DomainError("distance must be >= 1")
    if quantity not in QUANTITIES:
        raise DomainError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")
    if bin_width <= 0:
        raise DomainError("bin_width must be positive")
    if cfg is None:
        cfg = AlignmentConfig(sources=g.node_count or 1, dmax=d)
    elif cfg.dmax < d:
        cfg = AlignmentConfig(cfg.sources, d, cfg.seed, cfg.exhaustive_d2)
    study = alignment_study(f, g, m, cfg, histogram_distances=(d,), bin_width=bin_width)
    try:
        return study.histograms[(d, quantity)]
    except KeyError:
        raise EmptyStratumError(f"no sampled pairs at distance {d}") from None


def random_pair_baseline(f: Folksonomy, n_pairs: int, seed: int = 0, m: GroupMembership | None = None) -> dict:
    """Alignment of uniformly random unordered user pairs (no repeats).

    Returns the mean of each quantity plus ``p_no_shared_tags`` (the
    probability of zero shared tags) and the number of pairs used.
    """
    users = f.users
    n = len(users)
    total = n * (n - 1) // 2
    if total == 0:
        raise DomainError("need at least two users")
    rng = np.random.default_rng(seed)
    if n_pairs >= total:
        iu = np.triu_indices(n, 1)
        a, b = iu[0], iu[1]
    else:
        seen = set()
        a_list, b_list = [], []
        while len(a_list) < n_pairs:
            x, y = rng.integers(0, n, size=2).tolist()
            if x == y:
                continue
            key = (min(x, y), max(x, y))
            if key in seen:
                continue
            seen.add(key)
            a_list.append(key[0])
            b_list.append(key[1])
        a, b = np.array(a_list), np.array(b_list)
    vals = {q: [] for q in QUANTITIES}
    for x, y in zip(a.tolist(), b.tolist()):
        pa = pair_alignment(f, m, users[x], users[y])
        for q in QUANTITIES:
            vals[q].append(getattr(pa, q))
    out = {q: float(np.mean(v)) for q, v in vals.items()}
    out["p_no_shared_tags"] = float(np.mean(np.asarray(vals["n_st"]) == 0))
    out["pairs"] = len(a)
    return out
