"""Tag-based user-user similarity: 6 kernels x 2 aggregations x 2 projections.

Projection names say what the annotations are aggregated *across*:

* ``items`` -- users are compared on tags.  Distributionally a user is the
  vector f_u(t) = number of items u tagged with t; collaboratively the pivot
  is an item r and u is the set of tags u put on r.
* ``tags`` -- users are compared on items.  Distributionally a user is the
  vector of tags-per-item counts; collaboratively the pivot is a tag t and u
  is the set of items u tagged with t.

Kernels on feature sets A, B (frequency vectors for distributional cosine)::

    matching  |A & B|
    overlap   |A & B| / min(|A|, |B|)
    dice      2 |A & B| / (|A| + |B|)
    jaccard   |A & B| / |A | B|
    cosine    <a, b> / (|a| |b|)
    mip       2 log min_{A & B} p / (log min_A p + log min_B p)

MIP uses p[x] = fraction of users having feature x (distributional) or the
conditional p[x | pivot] = fraction of the pivot's annotators that have x
on that pivot (collaborative).  Empty intersection gives 0; a zero
denominator with a nonempty intersection gives 1.  Collaborative measures
are the plain sum of the per-pivot values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import Annotation, Folksonomy, normalize_id
from .errors import DomainError, NotFoundError, StateError, UnsupportedOperationError

__all__ = [
    "KERNELS",
    "AGGREGATIONS",
    "PROJECTIONS",
    "MeasureSpec",
    "ALL_SPECS",
    "TagProbabilityTable",
    "tag_probabilities",
    "similarity",
    "batch_similarity",
    "SimilarityIndex",
    "Delta",
    "apply_delta",
]

KERNELS = ("cosine", "overlap", "matching", "dice", "jaccard", "mip")
AGGREGATIONS = ("distributional", "collaborative")
PROJECTIONS = ("items", "tags")

_PROJECTION_ALIASES = {
    "items": "items",
    "ontoitems": "items",
    "onto_items": "items",
    "tags": "tags",
    "ontotags": "tags",
    "onto_tags": "tags",
}


@dataclass(frozen=True, order=True)
class MeasureSpec:
    kernel: str
    aggregation: str
    projection: str

    def __post_init__(self):
        kernel = self.kernel.lower()
        aggregation = self.aggregation.lower()
        projection = _PROJECTION_ALIASES.get(self.projection.lower())
        if kernel not in KERNELS:
            raise DomainError(f"unknown kernel {self.kernel!r}; expected one of {KERNELS}")
        if aggregation not in AGGREGATIONS:
            raise DomainError(f"unknown aggregation {self.aggregation!r}; expected one of {AGGREGATIONS}")
        if projection is None:
            raise DomainError(f"unknown projection {self.projection!r}; expected one of {PROJECTIONS}")
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "aggregation", aggregation)
        object.__setattr__(self, "projection", projection)

    @classmethod
    def parse(cls, text: str) -> "MeasureSpec":
        """Parse ``kernel:aggregation:projection``."""
        parts = text.strip().split(":")
        if len(parts) != 3:
            raise DomainError(f"measure spec {text!r} is not kernel:aggregation:projection")
        return cls(*parts)

    @property
    def collaborative(self) -> bool:
        return self.aggregation == "collaborative"

    def __str__(self):
        return f"{self.kernel}:{self.aggregation}:{self.projection}"


ALL_SPECS: tuple[MeasureSpec, ...] = tuple(
    MeasureSpec(k, a, p) for a in AGGREGATIONS for p in PROJECTIONS for k in KERNELS
)


# ---------------------------------------------------------------------------
# kernels on small Python containers
# ---------------------------------------------------------------------------


def _set_kernel(kernel: str, n_shared: int, n_a: int, n_b: int) -> float:
    if n_shared == 0:
        return 0.0
    if kernel == "matching":
        return float(n_shared)
    if kernel == "overlap":
        return n_shared / min(n_a, n_b)
    if kernel == "dice":
        return 2.0 * n_shared / (n_a + n_b)
    if kernel == "jaccard":
        return n_shared / (n_a + n_b - n_shared)
    if kernel == "cosine":
        return n_shared / math.sqrt(n_a * n_b)
    raise AssertionError(kernel)


def _mip(shared_min_p: float, min_a: float, min_b: float) -> float:
    denom = math.log(min_a) + math.log(min_b)
    if denom == 0.0:
        return 1.0
    return 2.0 * math.log(shared_min_p) / denom


def _pivot_kernel(kernel: str, a: Mapping[int, float], b: Mapping[int, float]) -> float:
    """Kernel on one pivot's feature sets; values of ``a``/``b`` are p[x | pivot]."""
    if len(a) > len(b):
        a, b = b, a
    shared = [x for x in a if x in b]
    if not shared:
        return 0.0
    if kernel == "mip":
        return _mip(min(a[x] for x in shared), min(a.values()), min(b.values()))
    return _set_kernel(kernel, len(shared), len(a), len(b))


# ---------------------------------------------------------------------------
# probability tables
# ---------------------------------------------------------------------------


class _View:
    """Triples arranged as (user, pivot, feature) for one projection."""

    def __init__(self, f: Folksonomy, projection: str):
        self.f = f
        if projection == "items":
            piv, feat = f.ti.astype(np.int64), f.tt.astype(np.int64)
            self.n_feat = f.tag_count
            self.n_piv = f.item_count
            self.matrix = f.user_tag
            order = None  # f is already sorted by (user, item, tag)
        else:
            piv, feat = f.tt.astype(np.int64), f.ti.astype(np.int64)
            self.n_feat = f.item_count
            self.n_piv = f.tag_count
            self.matrix = f.user_item
            order = np.lexsort((feat, piv, f.tu))
        users = f.tu.astype(np.int64)
        if order is not None:
            users, piv, feat = users[order], piv[order], feat[order]
        self.piv, self.feat = piv, feat
        self.user_start = np.zeros(f.user_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(users, minlength=f.user_count), out=self.user_start[1:])
        n_users = max(f.user_count, 1)

        # distributional: p[x] = fraction of users having feature x
        users_per_feat = np.bincount(self.matrix.indices, minlength=self.n_feat)
        self.p_feat = users_per_feat / n_users
        logp = np.log(np.where(self.p_feat > 0, self.p_feat, 1.0))
        self.log_p = logp
        rows = np.repeat(np.arange(f.user_count), self.matrix.row_lengths())
        self.user_min_logp = np.zeros(f.user_count)
        if len(rows):
            # rows are sorted, so a segmented minimum via reduceat is safe (no empty rows)
            starts = self.matrix.indptr[:-1]
            self.user_min_logp = np.minimum.reduceat(logp[self.matrix.indices], starts)
        self.sq_norm = np.bincount(rows, weights=self.matrix.data**2, minlength=f.user_count)

        # collaborative: p[x | pivot] = (#users with (pivot, x)) / (#users with pivot)
        pf_key = piv * max(self.n_feat, 1) + feat
        uniq_pf, inv_pf, cnt_pf = np.unique(pf_key, return_inverse=True, return_counts=True)
        up_key = np.unique(users * max(self.n_piv, 1) + piv)
        users_per_piv = np.bincount(up_key % max(self.n_piv, 1), minlength=self.n_piv)
        self.cond = cnt_pf[inv_pf] / users_per_piv[piv]
        self.cond_keys = uniq_pf
        self.cond_values = cnt_pf / users_per_piv[uniq_pf // max(self.n_feat, 1)]
        self._pivots: dict[int, dict[int, dict[int, float]]] = {}

    def pivots_of(self, u: int) -> dict[int, dict[int, float]]:
        got = self._pivots.get(u)
        if got is None:
            lo, hi = self.user_start[u], self.user_start[u + 1]
            got = {}
            for p, x, c in zip(self.piv[lo:hi].tolist(), self.feat[lo:hi].tolist(), self.cond[lo:hi].tolist()):
                got.setdefault(p, {})[x] = c
            self._pivots[u] = got
        return got

    def distributional(self, kernel: str, u: int, v: int) -> float:
        m = self.matrix
        cu, fu = m.row(u)
        cv, fv = m.row(v)
        shared, iu, iv = np.intersect1d(cu, cv, assume_unique=True, return_indices=True)
        n_shared = len(shared)
        if n_shared == 0:
            return 0.0
        if kernel == "cosine":
            dot = math.fsum((fu[iu] * fv[iv]).tolist())
            return min(1.0, dot / math.sqrt(self.sq_norm[u] * self.sq_norm[v]))
        if kernel == "mip":
            denom = float(self.user_min_logp[u] + self.user_min_logp[v])
            if denom == 0.0:
                return 1.0
            return 2.0 * float(self.log_p[shared].min()) / denom
        return _set_kernel(kernel, n_shared, len(cu), len(cv))

    def collaborative(self, kernel: str, u: int, v: int) -> float:
        pu, pv = self.pivots_of(u), self.pivots_of(v)
        if len(pu) > len(pv):
            pu, pv = pv, pu
        terms = [_pivot_kernel(kernel, a, pv[p]) for p, a in pu.items() if p in pv]
        return math.fsum(terms)


class TagProbabilityTable:
    """Marginal and conditional annotation probabilities of a folksonomy.

    ``p_tag[t]`` is the fraction of users that used tag t, ``p_item[r]`` the
    fraction that annotated item r; ``p_tag_given_item[(t, r)]`` is the
    fraction of r's annotators who tagged r with t, and symmetrically for
    ``p_item_given_tag[(r, t)]``.
    """

    def __init__(self, f: Folksonomy):
        if len(f) == 0:
            raise DomainError("probabilities of an empty folksonomy")
        self.folksonomy = f
        self._views: dict[str, _View] = {}

    def view(self, projection: str) -> _View:
        v = self._views.get(projection)
        if v is None:
            v = self._views[projection] = _View(self.folksonomy, projection)
        return v

    @cached_property
    def p_tag(self) -> dict[str, float]:
        f = self.folksonomy
        return dict(zip(f.tags, self.view("items").p_feat.tolist()))

    @cached_property
    def p_item(self) -> dict[str, float]:
        f = self.folksonomy
        return dict(zip(f.items, self.view("tags").p_feat.tolist()))

    @cached_property
    def p_tag_given_item(self) -> dict[tuple[str, str], float]:
        f, v = self.folksonomy, self.view("items")
        n = max(v.n_feat, 1)
        return {
            (f.tags[k % n], f.items[k // n]): p for k, p in zip(v.cond_keys.tolist(), v.cond_values.tolist())
        }

    @cached_property
    def p_item_given_tag(self) -> dict[tuple[str, str], float]:
        f, v = self.folksonomy, self.view("tags")
        n = max(v.n_feat, 1)
        return {
            (f.items[k % n], f.tags[k // n]): p for k, p in zip(v.cond_keys.tolist(), v.cond_values.tolist())
        }


def tag_probabilities(f: Folksonomy) -> TagProbabilityTable:
    cached = f.__dict__.get("_probability_table")
    if cached is None:
        cached = TagProbabilityTable(f)
        f.__dict__["_probability_table"] = cached
    return cached


# ---------------------------------------------------------------------------
# public similarity API
# ---------------------------------------------------------------------------


def _active_index(f: Folksonomy, user: str) -> int:
    i = f.user_index.get(normalize_id(user))
    if i is None:
        raise DomainError(f"user {user!r} has no annotations")
    return i


def _score(spec: MeasureSpec, probs: TagProbabilityTable, iu: int, iv: int) -> float:
    view = probs.view(spec.projection)
    if spec.collaborative:
        return view.collaborative(spec.kernel, iu, iv)
    return view.distributional(spec.kernel, iu, iv)


def similarity(spec: MeasureSpec | str, f: Folksonomy, probs: TagProbabilityTable | None, u: str, v: str) -> float:
    """Similarity of two active users under one of the 24 measures."""
    if isinstance(spec, str):
        spec = MeasureSpec.parse(spec)
    if probs is None:
        probs = tag_probabilities(f)
    iu, iv = _active_index(f, u), _active_index(f, v)
    if iu == iv:
        raise DomainError("similarity needs two distinct users")
    return _score(spec, probs, iu, iv)


def batch_similarity(
    spec: MeasureSpec | str,
    f: Folksonomy,
    probs: TagProbabilityTable | None,
    pairs: Sequence[tuple[str, str]],
) -> list[tuple[tuple[str, str], float]]:
    """Scores for many pairs, in input order; errors name the failing pair index."""
    if isinstance(spec, str):
        spec = MeasureSpec.parse(spec)
    if probs is None and pairs:
        probs = tag_probabilities(f)
    out = []
    for n, (u, v) in enumerate(pairs):
        try:
            out.append(((u, v), similarity(spec, f, probs, u, v)))
        except (DomainError, NotFoundError) as exc:
            raise type(exc)(f"pair {n} ({u!r}, {v!r}): {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# incremental index for collaborative measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Delta:
    op: str  # "add" or "remove"
    annotation: Annotation

    def __post_init__(self):
        if self.op not in ("add", "remove"):
            raise DomainError(f"delta op must be 'add' or 'remove', not {self.op!r}")


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


class SimilarityIndex:
    """Per-pivot partial similarities of all user pairs for a collaborative measure.

    A pair's total is the exactly rounded sum (``math.fsum``) of its
    partials, so totals do not depend on the order deltas arrived in.
    Single writer: callers serialize :meth:`apply`.
    """

    def __init__(self, spec: MeasureSpec | str, f: Folksonomy):
        if isinstance(spec, str):
            spec = MeasureSpec.parse(spec)
        if not spec.collaborative:
            raise UnsupportedOperationError(f"{spec} is distributional; only collaborative measures are indexable")
        self.spec = spec
        self._by_pivot: dict[str, dict[str, set[str]]] = {}
        self._count: dict[tuple[str, str], int] = {}  # (pivot, feature) -> users
        self._pair_partials: dict[tuple[str, str], dict[str, float]] = {}
        self._totals: dict[tuple[str, str], float] = {}
        for u, r, t in f.triples():
            self._insert(u, r, t)
        for pivot in sorted(self._by_pivot):
            self._refresh(pivot, None)

    # state ------------------------------------------------------------

    def _split(self, user: str, item: str, tag: str) -> tuple[str, str]:
        return (item, tag) if self.spec.projection == "items" else (tag, item)

    def _insert(self, user, item, tag) -> bool:
        pivot, feat = self._split(user, item, tag)
        feats = self._by_pivot.setdefault(pivot, {}).setdefault(user, set())
        if feat in feats:
            return False
        feats.add(feat)
        self._count[(pivot, feat)] = self._count.get((pivot, feat), 0) + 1
        return True

    def _delete(self, user, item, tag) -> bool:
        pivot, feat = self._split(user, item, tag)
        users = self._by_pivot.get(pivot)
        feats = users.get(user) if users else None
        if not feats or feat not in feats:
            return False
        feats.discard(feat)
        if not feats:
            del users[user]
            if not users:
                del self._by_pivot[pivot]
        c = self._count[(pivot, feat)] - 1
        if c:
            self._count[(pivot, feat)] = c
        else:
            del self._count[(pivot, feat)]
        return True

    def _profile(self, pivot: str, user: str) -> dict[str, float]:
        users = self._by_pivot[pivot]
        n = len(users)
        return {x: self._count[(pivot, x)] / n for x in users[user]}

    def _set_partial(self, pair, pivot, value, touched) -> None:
        partials = self._pair_partials.get(pair)
        if value == 0.0:
            if partials and pivot in partials:
                del partials[pivot]
                touched.add(pair)
            return
        if partials is None:
            partials = self._pair_partials[pair] = {}
        if partials.get(pivot) != value:
            partials[pivot] = value
            touched.add(pair)

    def _refresh(self, pivot: str, changed_user: str | None, gone: Iterable[str] = ()) -> None:
        """Recompute partials at ``pivot``: all pairs, or only those involving ``changed_user``."""
        touched: set = set()
        users = self._by_pivot.get(pivot, {})
        for other in gone:
            for v in users:
                self._set_partial(_pair(other, v), pivot, 0.0, touched)
        names = sorted(users)
        profiles = {u: self._profile(pivot, u) for u in names}
        kernel = self.spec.kernel
        if changed_user is None:
            for i, a in enumerate(names):
                for b in names[i + 1 :]:
                    self._set_partial((a, b), pivot, _pivot_kernel(kernel, profiles[a], profiles[b]), touched)
        elif changed_user in users:
            for v in names:
                if v != changed_user:
                    self._set_partial(
                        _pair(changed_user, v), pivot, _pivot_kernel(kernel, profiles[changed_user], profiles[v]), touched
                    )
        for pair in touched:
            partials = self._pair_partials.get(pair)
            if partials:
                self._totals[pair] = math.fsum(partials.values())
            else:
                self._pair_partials.pop(pair, None)
                self._totals.pop(pair, None)

    # updates ----------------------------------------------------------

    def apply(self, delta: Delta) -> "SimilarityIndex":
        ann = delta.annotation
        pivot, _ = self._split(ann.user, ann.item, ann.tag)
        before = set(self._by_pivot.get(pivot, ()))
        if delta.op == "add":
            if not self._insert(ann.user, ann.item, ann.tag):
                raise StateError(f"annotation {ann} already present")
        else:
            if not self._delete(ann.user, ann.item, ann.tag):
                raise StateError(f"annotation {ann} not present")
        after = set(self._by_pivot.get(pivot, ()))
        gone = before - after
        if self.spec.kernel == "mip":
            # p[x | pivot] moved for everyone at this pivot
            self._refresh(pivot, None, gone)
        else:
            self._refresh(pivot, ann.user, gone)
        return self

    # queries ----------------------------------------------------------

    def total(self, u: str, v: str) -> float:
        return self._totals.get(_pair(normalize_id(u), normalize_id(v)), 0.0)

    def partial(self, u: str, v: str, pivot: str) -> float:
        return self._pair_partials.get(_pair(normalize_id(u), normalize_id(v)), {}).get(normalize_id(pivot), 0.0)

    @property
    def totals(self) -> dict[tuple[str, str], float]:
        return dict(self._totals)

    def to_folksonomy(self) -> Folksonomy:
        rows = []
        for pivot, users in self._by_pivot.items():
            for u, feats in users.items():
                for x in feats:
                    rows.append((u, pivot, x) if self.spec.projection == "items" else (u, x, pivot))
        return Folksonomy.from_triples(rows)

    def __eq__(self, other):
        if not isinstance(other, SimilarityIndex):
            return NotImplemented
        return self.spec == other.spec and self._totals == other._totals and self._pair_partials == other._pair_partials

    __hash__ = None


def apply_delta(index: SimilarityIndex, change: Delta | tuple, f: Folksonomy | None = None) -> SimilarityIndex:
    """Apply one add/remove to ``index`` in place and return it.

    ``change`` is a :class:`Delta` or ``(op, Annotation)``.  ``f`` is
    accepted for symmetry with the other operations and is not consulted;
    the index tracks its own copy of the annotations.
    """
    if not isinstance(index, SimilarityIndex):
        raise UnsupportedOperationError("apply_delta needs a SimilarityIndex")
    if not isinstance(change, Delta):
        op, ann = change
        if not isinstance(ann, Annotation):
            ann = Annotation(*ann)
        change = Delta(op, ann)
    return index.apply(change)
