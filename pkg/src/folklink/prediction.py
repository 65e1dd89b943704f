"""Candidate-pair sampling, ROC/AUC and measure-vs-baseline comparison."""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .core import Folksonomy, SocialGraph, _read_tsv, normalize_id
from .errors import DataError, DegenerateLabelsError, DomainError
from .similarity import MeasureSpec, TagProbabilityTable, batch_similarity, tag_probabilities

__all__ = [
    "CRITERIA",
    "NEIGHBOR_LIST_SIZE",
    "PairSample",
    "ScoredPair",
    "RocResult",
    "ComparisonRow",
    "load_baseline",
    "neighbor_lists_from_scores",
    "sample_pairs",
    "label_pairs",
    "roc",
    "relative_improvement",
    "compare_measures",
]

CRITERIA = ("most_active", "most_connected", "random")
NEIGHBOR_LIST_SIZE = 60

_CRITERION_ALIASES = {
    "most_active": "most_active",
    "mostactive": "most_active",
    "most-active": "most_active",
    "most_connected": "most_connected",
    "mostconnected": "most_connected",
    "most-connected": "most_connected",
    "random": "random",
}


@dataclass(frozen=True)
class PairSample:
    pairs: tuple[tuple[str, str], ...]
    criterion: str
    m: int
    seed: int
    short: bool = False  # fewer than m pairs could be formed


@dataclass(frozen=True)
class ScoredPair:
    pair: tuple[str, str]
    score: float
    label: bool


@dataclass(frozen=True)
class RocResult:
    points: tuple[tuple[float, float], ...]
    auc: float
    auc_exact: Fraction  # same area as a rational number
    positives: int
    negatives: int


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    auc: float
    rel_improvement: float
    roc: RocResult = field(repr=False, compare=False)


# ---------------------------------------------------------------------------
# baseline ingestion
# ---------------------------------------------------------------------------


def load_baseline(path) -> dict[tuple[str, str], float]:
    """Read ``userA<TAB>userB<TAB>affinity``; keys are ordered as in the file."""
    out: dict[tuple[str, str], float] = {}
    path = os.fspath(path)
    for lineno, (a, b, s) in _read_tsv(path, 3):
        try:
            score = float(s)
        except ValueError:
            raise DataError(f"{path}:{lineno}: affinity {s!r} is not a number") from None
        if a == b:
            continue
        out[(a, b)] = score
    return out


def neighbor_lists_from_scores(
    scores: Mapping[tuple[str, str], float], size: int = NEIGHBOR_LIST_SIZE
) -> dict[str, list[tuple[str, float]]]:
    """Top-``size`` candidates per user by decreasing affinity (ties by id).

    Every ``(a, b)`` entry makes ``b`` a candidate of ``a``.
    """
    lists: dict[str, list[tuple[str, float]]] = {}
    for (a, b), s in scores.items():
        lists.setdefault(a, []).append((b, float(s)))
    return {u: sorted(c, key=lambda x: (-x[1], x[0]))[:size] for u, c in sorted(lists.items())}


def _lookup_score(scores: Mapping[tuple[str, str], float], a: str, b: str) -> float | None:
    s = scores.get((a, b))
    if s is None:
        s = scores.get((b, a))
    return s


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _criterion(name: str) -> str:
    key = _CRITERION_ALIASES.get(name.replace(" ", "").lower()) or _CRITERION_ALIASES.get(name.lower())
    if key is None:
        raise DomainError(f"unknown criterion {name!r}; expected one of {CRITERIA}")
    return key


def _user_order(f: Folksonomy, g: SocialGraph | None, users: list[str], criterion: str, seed: int) -> list[str]:
    users = sorted(users)
    if criterion == "random":
        rng = np.random.default_rng(seed)
        return [users[i] for i in rng.permutation(len(users))]
    if criterion == "most_active":
        def key(u):
            i = f.user_index.get(u)
            return -(int(f.assignments[i]) if i is not None else 0), u
    else:
        def key(u):
            i = g.user_index.get(u) if g is not None else None
            return -(int(g.degrees[i]) if i is not None else 0), u
    return sorted(users, key=key)


def sample_pairs(
    f: Folksonomy,
    g: SocialGraph | None,
    neighbor_lists: Mapping[str, Sequence],
    criterion: str,
    m: int,
    seed: int = 0,
) -> PairSample:
    """Walk users in criterion order, taking each one's active candidates until ``m`` pairs.

    ``neighbor_lists`` maps a user to an ordered list of candidates (ids or
    ``(id, affinity)`` tuples); at most the first 60 are used.  Users and
    candidates without annotations are skipped, as are self-pairs and
    unordered pairs already taken.
    """
    if m < 1:
        raise DomainError("m must be >= 1")
    if not neighbor_lists:
        raise DomainError("no neighbor lists given")
    crit = _criterion(criterion)
    lists = {normalize_id(u): c for u, c in neighbor_lists.items()}
    active = f.user_index
    pairs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for u in _user_order(f, g, list(lists), crit, seed):
        if len(pairs) >= m:
            break
        if u not in active:
            continue
        for cand in list(lists[u])[:NEIGHBOR_LIST_SIZE]:
            n = normalize_id(cand[0] if isinstance(cand, (tuple, list)) else cand)
            if n == u or n not in active:
                continue
            key = (u, n) if u < n else (n, u)
            if key in seen:
                continue
            seen.add(key)
            pairs.append((u, n))
            if len(pairs) >= m:
                break
    short = len(pairs) < m
    if short:
        warnings.warn(f"only {len(pairs)} of {m} requested pairs could be sampled", stacklevel=2)
    return PairSample(tuple(pairs), crit, int(m), int(seed), short)


def label_pairs(g: SocialGraph, pairs: Sequence[tuple[str, str]], scores: Sequence[float]) -> list[ScoredPair]:
    return [ScoredPair(tuple(p), float(s), g.has_edge(*p)) for p, s in zip(pairs, scores)]


# ---------------------------------------------------------------------------
# ROC
# ---------------------------------------------------------------------------


def roc(scored: Sequence[ScoredPair] | tuple[Sequence[float], Sequence[bool]]) -> RocResult:
    """ROC curve from a descending threshold sweep; tied scores form one diagonal step.

    The trapezoidal area equals the Mann-Whitney probability that a random
    positive outscores a random negative, ties counting one half.
    """
    if isinstance(scored, tuple) and len(scored) == 2 and not isinstance(scored[0], ScoredPair):
        scores = np.asarray(scored[0], dtype=np.float64)
        labels = np.asarray(scored[1], dtype=bool)
    else:
        scores = np.array([s.score for s in scored], dtype=np.float64)
        labels = np.array([s.label for s in scored], dtype=bool)
    if np.isnan(scores).any():
        raise DomainError("scores contain NaN")
    n_pos = int(labels.sum())
    n_neg = int(len(labels) - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError(f"need both labels; got {n_pos} positive, {n_neg} negative")
    order = np.argsort(-scores, kind="stable")
    s, y = scores[order], labels[order]
    boundary = np.flatnonzero(np.diff(s) != 0)
    ends = np.append(boundary, len(s) - 1)
    tp = np.cumsum(y)[ends]
    fp = (ends + 1) - tp
    tp = np.concatenate([[0], tp]).astype(np.int64)
    fp = np.concatenate([[0], fp]).astype(np.int64)
    # twice the area in units of one (positive x negative) cell, exact in integers
    twice_area = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    exact = Fraction(twice_area, 2 * n_pos * n_neg)
    points = tuple(zip((fp / n_neg).tolist(), (tp / n_pos).tolist()))
    return RocResult(points, float(exact), exact, n_pos, n_neg)


def relative_improvement(auc_measure: float, auc_baseline: float) -> float:
    """AUC(measure) / AUC(baseline) - 1."""
    if auc_baseline <= 0:
        raise DomainError("baseline AUC must be positive")
    return auc_measure / auc_baseline - 1.0


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------


def compare_measures(
    f: Folksonomy,
    g: SocialGraph,
    probs: TagProbabilityTable | None,
    sample: PairSample,
    specs: Sequence[MeasureSpec | str],
    baseline_scores: Mapping[tuple[str, str], float],
    baseline_name: str = "baseline",
) -> list[ComparisonRow]:
    """AUC of each measure and of the baseline on one pair sample.

    Rows are sorted by relative improvement over the baseline (descending,
    ties by name); the baseline row has improvement 0.
    """
    pairs = list(sample.pairs)
    base = []
    for u, v in pairs:
        s = _lookup_score(baseline_scores, u, v)
        if s is None:
            raise DataError(f"no baseline score for pair ({u}, {v})")
        base.append(s)
    labels = [g.has_edge(u, v) for u, v in pairs]
    base_roc = roc((base, labels))
    rows = [ComparisonRow(baseline_name, base_roc.auc, 0.0, base_roc)]
    if probs is None:
        probs = tag_probabilities(f)
    for spec in specs:
        if isinstance(spec, str):
            spec = MeasureSpec.parse(spec)
        scores = [s for _, s in batch_similarity(spec, f, probs, pairs)]
        r = roc((scores, labels))
        rows.append(ComparisonRow(str(spec), r.auc, relative_improvement(r.auc, base_roc.auc), r))
    rows.sort(key=lambda row: (-row.rel_improvement, row.name))
    return rows
