"""Folksonomy data model, social graph, group memberships and TSV ingestion.

All stores are immutable after construction.  Internally every store keeps
its identifiers in sorted order and works on integer codes; the dictionary
views named after the usual folksonomy notation (``tag_freq``, ``vocab``,
``adjacency`` ...) are built lazily on first access.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import NotFoundError, ParseError, ValidationError

__all__ = [
    "Annotation",
    "Folksonomy",
    "SocialGraph",
    "GroupMembership",
    "ActivityProfile",
    "ActivityTable",
    "CsrRows",
    "normalize_id",
    "load_triples",
    "load_edges",
    "load_groups",
    "activity_profile",
    "activity_table",
]


def normalize_id(value: str) -> str:
    return value.strip().lower()


@dataclass(frozen=True, order=True)
class Annotation:
    """One (user, item, tag) triple with normalized identifiers."""

    user: str
    item: str
    tag: str

    def __post_init__(self):
        for name in ("user", "item", "tag"):
            value = normalize_id(str(getattr(self, name)))
            if not value:
                raise ValidationError(f"empty {name} in annotation")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class CsrRows:
    """Compressed sparse rows with sorted column indices per row.

    ``indptr`` is int64, ``indices`` int32 and ``data`` float64 so the
    arrays can be handed to the compiled kernels without conversion.
    """

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    n_cols: int

    @property
    def n_rows(self) -> int:
        return len(self.indptr) - 1

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.data[lo:hi]

    def row_lengths(self) -> np.ndarray:
        return np.diff(self.indptr)

    @classmethod
    def from_sorted(cls, rows, cols, data, n_rows, n_cols) -> "CsrRows":
        """Build from coordinates already sorted by (row, col)."""
        counts = np.bincount(np.asarray(rows, dtype=np.int64), minlength=n_rows)
        indptr = np.zeros(n_rows + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(
            indptr,
            np.ascontiguousarray(cols, dtype=np.int32),
            np.ascontiguousarray(data, dtype=np.float64),
            int(n_cols),
        )

    def take_rows(self, rows: np.ndarray) -> "CsrRows":
        """Rows in the given order; ``-1`` yields an empty row."""
        rows = np.asarray(rows, dtype=np.int64)
        valid = rows >= 0
        lengths = np.zeros(len(rows), dtype=np.int64)
        lengths[valid] = self.indptr[rows[valid] + 1] - self.indptr[rows[valid]]
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        np.cumsum(lengths, out=indptr[1:])
        starts = np.zeros(len(rows), dtype=np.int64)
        starts[valid] = self.indptr[rows[valid]]
        src = _segment_positions(starts, lengths)
        return CsrRows(indptr, self.indices[src], self.data[src], self.n_cols)


def _segment_positions(starts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Concatenate ``arange(s, s + n)`` for each (s, n) without a Python loop."""
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    ends = np.cumsum(lengths)
    offsets = np.repeat(starts - (ends - lengths), lengths)
    return np.arange(total, dtype=np.int64) + offsets


def _encode(values: Sequence[str]) -> tuple[tuple[str, ...], np.ndarray]:
    """Map strings to codes that follow the sorted order of the strings."""
    table: dict[str, int] = {}
    setdefault = table.setdefault
    raw = np.fromiter((setdefault(v, len(table)) for v in values), dtype=np.int64, count=len(values))
    names = sorted(table)
    remap = np.empty(len(names), dtype=np.int64)
    for new, name in enumerate(names):
        remap[table[name]] = new
    return tuple(names), remap[raw] if len(raw) else raw


# ---------------------------------------------------------------------------
# Folksonomy
# ---------------------------------------------------------------------------


class Folksonomy:
    """Set of unique (user, item, tag) annotations.

    Users, items and tags are stored as sorted tuples; ``tu``, ``ti``, ``tt``
    hold the triple codes sorted by (user, item, tag).  Only users with at
    least one annotation are part of a folksonomy.
    """

    def __init__(self, users, items, tags, tu, ti, tt):
        self.users: tuple[str, ...] = tuple(users)
        self.items: tuple[str, ...] = tuple(items)
        self.tags: tuple[str, ...] = tuple(tags)
        self.tu = np.ascontiguousarray(tu, dtype=np.int32)
        self.ti = np.ascontiguousarray(ti, dtype=np.int32)
        self.tt = np.ascontiguousarray(tt, dtype=np.int32)
        for arr in (self.tu, self.ti, self.tt):
            arr.setflags(write=False)

    # construction -----------------------------------------------------

    @classmethod
    def from_triples(cls, triples: Iterable) -> "Folksonomy":
        """Build from ``(user, item, tag)`` tuples or :class:`Annotation` objects.

        Identifiers are normalized; duplicates collapse.
        """
        us, its, ts = [], [], []
        for triple in triples:
            if isinstance(triple, Annotation):
                u, i, t = triple.user, triple.item, triple.tag
            else:
                u, i, t = (normalize_id(str(x)) for x in triple)
                if not (u and i and t):
                    raise ValidationError(f"empty field in triple {triple!r}")
            us.append(u)
            its.append(i)
            ts.append(t)
        return cls._from_names(us, its, ts)

    @classmethod
    def _from_names(cls, us, its, ts) -> "Folksonomy":
        users, cu = _encode(us)
        items, ci = _encode(its)
        tags, ct = _encode(ts)
        return cls.from_codes(users, items, tags, cu, ci, ct)

    @classmethod
    def from_codes(cls, users, items, tags, cu, ci, ct, *, prune=True) -> "Folksonomy":
        """Build from integer codes into the given name tuples.

        Duplicate triples are dropped.  With ``prune`` the name tuples are
        reduced to identifiers that actually occur, so ``user_count`` etc.
        only count active entities.
        """
        cu = np.asarray(cu, dtype=np.int64)
        ci = np.asarray(ci, dtype=np.int64)
        ct = np.asarray(ct, dtype=np.int64)
        users, items, tags = tuple(users), tuple(items), tuple(tags)
        if prune and len(cu):
            users, cu = _prune(users, cu)
            items, ci = _prune(items, ci)
            tags, ct = _prune(tags, ct)
        elif prune:
            users, items, tags = (), (), ()
        if len(cu):
            key = (cu * len(items) + ci) * len(tags) + ct
            key = np.unique(key)
            ct = key % len(tags)
            rest = key // len(tags)
            ci = rest % len(items)
            cu = rest // len(items)
        return cls(users, items, tags, cu, ci, ct)

    # sizes ------------------------------------------------------------

    @property
    def user_count(self) -> int:
        return len(self.users)

    @property
    def item_count(self) -> int:
        return len(self.items)

    @property
    def tag_count(self) -> int:
        return len(self.tags)

    def __len__(self) -> int:
        return len(self.tu)

    def __repr__(self):
        return (
            f"Folksonomy(users={self.user_count}, items={self.item_count}, "
            f"tags={self.tag_count}, annotations={len(self)})"
        )

    def __eq__(self, other):
        if not isinstance(other, Folksonomy):
            return NotImplemented
        return (
            self.users == other.users
            and self.items == other.items
            and self.tags == other.tags
            and np.array_equal(self.tu, other.tu)
            and np.array_equal(self.ti, other.ti)
            and np.array_equal(self.tt, other.tt)
        )

    __hash__ = None

    # lookups ----------------------------------------------------------

    @cached_property
    def user_index(self) -> dict[str, int]:
        return {u: i for i, u in enumerate(self.users)}

    @cached_property
    def item_index(self) -> dict[str, int]:
        return {r: i for i, r in enumerate(self.items)}

    @cached_property
    def tag_index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.tags)}

    def index_of(self, user: str) -> int:
        try:
            return self.user_index[normalize_id(user)]
        except KeyError:
            raise NotFoundError(f"unknown user {user!r}") from None

    def __contains__(self, user) -> bool:
        return normalize_id(str(user)) in self.user_index

    # derived matrices -------------------------------------------------

    @cached_property
    def user_tag(self) -> CsrRows:
        """Rows = users, columns = tags, values = f_u(t) (distinct items)."""
        return _count_matrix(self.tu, self.tt, self.user_count, self.tag_count)

    @cached_property
    def user_item(self) -> CsrRows:
        """Rows = users, columns = items, values = distinct tags on the item."""
        return _count_matrix(self.tu, self.ti, self.user_count, self.item_count)

    @cached_property
    def assignments(self) -> np.ndarray:
        """a(u) per user code."""
        return np.bincount(self.tu, minlength=self.user_count).astype(np.int64)

    @cached_property
    def distinct_tags(self) -> np.ndarray:
        """n_t(u) per user code."""
        return self.user_tag.row_lengths()

    @cached_property
    def tag_use(self) -> np.ndarray:
        """Global assignment count per tag code."""
        return np.bincount(self.tt, minlength=self.tag_count).astype(np.int64)

    # dictionary views -------------------------------------------------

    @cached_property
    def annotations(self) -> frozenset[Annotation]:
        U, I, T = self.users, self.items, self.tags
        return frozenset(
            Annotation(U[u], I[i], T[t]) for u, i, t in zip(self.tu.tolist(), self.ti.tolist(), self.tt.tolist())
        )

    def triples(self) -> Iterator[tuple[str, str, str]]:
        U, I, T = self.users, self.items, self.tags
        for u, i, t in zip(self.tu.tolist(), self.ti.tolist(), self.tt.tolist()):
            yield U[u], I[i], T[t]

    @cached_property
    def tag_freq(self) -> dict[str, dict[str, int]]:
        m = self.user_tag
        out = {}
        for u, name in enumerate(self.users):
            cols, vals = m.row(u)
            out[name] = {self.tags[c]: int(v) for c, v in zip(cols.tolist(), vals.tolist())}
        return out

    @cached_property
    def vocab(self) -> dict[str, frozenset[str]]:
        return {u: frozenset(freq) for u, freq in self.tag_freq.items()}

    @cached_property
    def items_of(self) -> dict[str, frozenset[str]]:
        m = self.user_item
        return {
            name: frozenset(self.items[c] for c in m.row(u)[0].tolist()) for u, name in enumerate(self.users)
        }

    @cached_property
    def global_tag_use(self) -> dict[str, int]:
        return {t: int(c) for t, c in zip(self.tags, self.tag_use.tolist())}

    def annotation_count(self, user: str) -> int:
        return int(self.assignments[self.index_of(user)])

    # serialization ----------------------------------------------------

    def write_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for u, i, t in self.triples():
                fh.write(f"{u}\t{i}\t{t}\n")


def _prune(names: tuple[str, ...], codes: np.ndarray) -> tuple[tuple[str, ...], np.ndarray]:
    used, inverse = np.unique(codes, return_inverse=True)
    if len(used) == len(names):
        return names, codes
    return tuple(names[k] for k in used.tolist()), inverse.astype(np.int64)


def _count_matrix(rows, cols, n_rows, n_cols) -> CsrRows:
    if len(rows) == 0:
        return CsrRows.from_sorted([], [], [], n_rows, n_cols)
    key = rows.astype(np.int64) * max(n_cols, 1) + cols
    uniq, counts = np.unique(key, return_counts=True)
    return CsrRows.from_sorted(uniq // max(n_cols, 1), uniq % max(n_cols, 1), counts, n_rows, n_cols)


# ---------------------------------------------------------------------------
# Social graph
# ---------------------------------------------------------------------------


class SocialGraph:
    """Undirected simple graph over user ids, stored as sorted adjacency rows."""

    def __init__(self, users, indptr, indices):
        self.users: tuple[str, ...] = tuple(users)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int32)
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], nodes: Iterable[str] = ()) -> "SocialGraph":
        """Symmetrize; drop self-loops and duplicates.  ``nodes`` adds isolated users."""
        a, b = [], []
        for e in edges:
            u, v = normalize_id(str(e[0])), normalize_id(str(e[1]))
            if not (u and v):
                raise ValidationError(f"empty user id in edge {e!r}")
            a.append(u)
            b.append(v)
        extra = [normalize_id(str(n)) for n in nodes]
        names, codes = _encode(a + b + extra)
        m = len(a)
        return cls.from_codes(names, codes[:m], codes[m : 2 * m])

    @classmethod
    def from_codes(cls, users, src, dst) -> "SocialGraph":
        n = len(users)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        keep = src != dst
        src, dst = src[keep], dst[keep]
        lo, hi = np.minimum(src, dst), np.maximum(src, dst)
        und = np.unique(lo * max(n, 1) + hi)
        lo, hi = und // max(n, 1), und % max(n, 1)
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
        order = np.lexsort((cols, rows))
        csr = CsrRows.from_sorted(rows[order], cols[order], np.ones(len(rows)), n, n)
        return cls(users, csr.indptr, csr.indices)

    @property
    def node_count(self) -> int:
        return len(self.users)

    @cached_property
    def edge_count(self) -> int:
        return int(self.indptr[-1] // 2)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @cached_property
    def user_index(self) -> dict[str, int]:
        return {u: i for i, u in enumerate(self.users)}

    def index_of(self, user: str) -> int:
        try:
            return self.user_index[normalize_id(user)]
        except KeyError:
            raise NotFoundError(f"unknown user {user!r}") from None

    def __contains__(self, user) -> bool:
        return normalize_id(str(user)) in self.user_index

    def neighbors_of(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def neighbors(self, user: str) -> frozenset[str]:
        return frozenset(self.users[j] for j in self.neighbors_of(self.index_of(user)).tolist())

    def degree(self, user: str) -> int:
        return int(self.degrees[self.index_of(user)])

    def has_edge(self, u: str, v: str) -> bool:
        iu, iv = self.user_index.get(normalize_id(u)), self.user_index.get(normalize_id(v))
        if iu is None or iv is None:
            return False
        row = self.neighbors_of(iu)
        k = np.searchsorted(row, iv)
        return bool(k < len(row) and row[k] == iv)

    @cached_property
    def adjacency(self) -> dict[str, frozenset[str]]:
        return {u: self.neighbors(u) for u in self.users}

    def edges(self) -> Iterator[tuple[str, str]]:
        for i, u in enumerate(self.users):
            for j in self.neighbors_of(i).tolist():
                if j > i:
                    yield u, self.users[j]

    def as_csr(self) -> CsrRows:
        return CsrRows(self.indptr, self.indices, np.ones(len(self.indices)), self.node_count)

    def __eq__(self, other):
        if not isinstance(other, SocialGraph):
            return NotImplemented
        return (
            self.users == other.users
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None

    def __repr__(self):
        return f"SocialGraph(nodes={self.node_count}, edges={self.edge_count})"

    def write_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for u, v in self.edges():
                fh.write(f"{u}\t{v}\n")


# ---------------------------------------------------------------------------
# Group membership
# ---------------------------------------------------------------------------


class GroupMembership:
    """User -> set of groups, stored as sorted rows of group codes."""

    def __init__(self, users, groups, rows: CsrRows):
        self.users: tuple[str, ...] = tuple(users)
        self.groups: tuple[str, ...] = tuple(groups)
        self.rows = rows

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "GroupMembership":
        us, gs = [], []
        for p in pairs:
            u, g = normalize_id(str(p[0])), normalize_id(str(p[1]))
            if not (u and g):
                raise ValidationError(f"empty field in membership {p!r}")
            us.append(u)
            gs.append(g)
        users, cu = _encode(us)
        groups, cg = _encode(gs)
        return cls.from_codes(users, groups, cu, cg)

    @classmethod
    def from_codes(cls, users, groups, cu, cg, *, prune=True) -> "GroupMembership":
        users, groups = tuple(users), tuple(groups)
        cu = np.asarray(cu, dtype=np.int64)
        cg = np.asarray(cg, dtype=np.int64)
        if prune and len(cu):
            users, cu = _prune(users, cu)
            groups, cg = _prune(groups, cg)
        elif prune:
            users, groups = (), ()
        key = np.unique(cu * max(len(groups), 1) + cg)
        rows = CsrRows.from_sorted(
            key // max(len(groups), 1), key % max(len(groups), 1), np.ones(len(key)), len(users), len(groups)
        )
        return cls(users, groups, rows)

    @property
    def user_count(self) -> int:
        return len(self.users)

    @cached_property
    def user_index(self) -> dict[str, int]:
        return {u: i for i, u in enumerate(self.users)}

    def __contains__(self, user) -> bool:
        return normalize_id(str(user)) in self.user_index

    @cached_property
    def group_counts(self) -> np.ndarray:
        """n_g(u) per user code."""
        return self.rows.row_lengths()

    @cached_property
    def sizes(self) -> np.ndarray:
        """Members per group code."""
        return np.bincount(self.rows.indices, minlength=len(self.groups)).astype(np.int64)

    @cached_property
    def membership(self) -> dict[str, frozenset[str]]:
        return {
            u: frozenset(self.groups[g] for g in self.rows.row(i)[0].tolist()) for i, u in enumerate(self.users)
        }

    @cached_property
    def group_size(self) -> dict[str, int]:
        return {g: int(n) for g, n in zip(self.groups, self.sizes.tolist())}

    def n_groups(self, user: str) -> int:
        i = self.user_index.get(normalize_id(user))
        return 0 if i is None else int(self.group_counts[i])

    def pairs(self) -> Iterator[tuple[str, str]]:
        for i, u in enumerate(self.users):
            for g in self.rows.row(i)[0].tolist():
                yield u, self.groups[g]

    def __eq__(self, other):
        if not isinstance(other, GroupMembership):
            return NotImplemented
        return (
            self.users == other.users
            and self.groups == other.groups
            and np.array_equal(self.rows.indptr, other.rows.indptr)
            and np.array_equal(self.rows.indices, other.rows.indices)
        )

    __hash__ = None

    def __repr__(self):
        return f"GroupMembership(users={self.user_count}, groups={len(self.groups)})"

    def write_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for u, g in self.pairs():
                fh.write(f"{u}\t{g}\n")


# ---------------------------------------------------------------------------
# File ingestion
# ---------------------------------------------------------------------------


def _read_tsv(path, n_fields: int) -> Iterator[tuple[int, list[str]]]:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != n_fields:
                raise ParseError(f"expected {n_fields} tab-separated fields, got {len(fields)}", path, lineno)
            fields = [normalize_id(f) for f in fields]
            if not all(fields):
                raise ValidationError(f"{path}:{lineno}: empty field")
            yield lineno, fields


def load_triples(path) -> Folksonomy:
    """Read ``user<TAB>item<TAB>tag`` lines."""
    us, its, ts = [], [], []
    for _, (u, i, t) in _read_tsv(path, 3):
        us.append(u)
        its.append(i)
        ts.append(t)
    return Folksonomy._from_names(us, its, ts)


def load_edges(path) -> SocialGraph:
    """Read ``userA<TAB>userB`` lines into a symmetrized graph."""
    a, b = [], []
    for _, (u, v) in _read_tsv(path, 2):
        a.append(u)
        b.append(v)
    names, codes = _encode(a + b)
    m = len(a)
    return SocialGraph.from_codes(names, codes[:m], codes[m:])


def load_groups(path) -> GroupMembership:
    """Read ``user<TAB>group`` lines."""
    us, gs = [], []
    for _, (u, g) in _read_tsv(path, 2):
        us.append(u)
        gs.append(g)
    users, cu = _encode(us)
    groups, cg = _encode(gs)
    return GroupMembership.from_codes(users, groups, cu, cg)


# ---------------------------------------------------------------------------
# Activity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ActivityProfile:
    user: str
    k: int
    n_t: int
    n_g: int
    a: int


def activity_profile(f: Folksonomy | None, g: SocialGraph | None, m: GroupMembership | None, u: str) -> ActivityProfile:
    """(k, n_t, n_g, a) for one user; sources that do not know ``u`` contribute 0."""
    u = normalize_id(u)
    known = False
    k = n_t = n_g = a = 0
    if g is not None and u in g.user_index:
        known = True
        k = int(g.degrees[g.user_index[u]])
    if f is not None and u in f.user_index:
        known = True
        i = f.user_index[u]
        n_t = int(f.distinct_tags[i])
        a = int(f.assignments[i])
    if m is not None and u in m.user_index:
        known = True
        n_g = int(m.group_counts[m.user_index[u]])
    if not known:
        raise NotFoundError(f"unknown user {u!r}")
    return ActivityProfile(u, k, n_t, n_g, a)


@dataclass(frozen=True)
class ActivityTable:
    """Column-oriented activity profiles for many users."""

    users: tuple[str, ...]
    k: np.ndarray
    n_t: np.ndarray
    n_g: np.ndarray
    a: np.ndarray

    def __len__(self):
        return len(self.users)

    def column(self, metric: str) -> np.ndarray:
        return getattr(self, METRIC_ALIASES.get(metric, metric))

    def profiles(self) -> list[ActivityProfile]:
        return [
            ActivityProfile(u, int(k), int(t), int(g), int(a))
            for u, k, t, g, a in zip(self.users, self.k.tolist(), self.n_t.tolist(), self.n_g.tolist(), self.a.tolist())
        ]

    @classmethod
    def from_profiles(cls, profiles: Sequence[ActivityProfile]) -> "ActivityTable":
        return cls(
            tuple(p.user for p in profiles),
            np.array([p.k for p in profiles], dtype=np.int64),
            np.array([p.n_t for p in profiles], dtype=np.int64),
            np.array([p.n_g for p in profiles], dtype=np.int64),
            np.array([p.a for p in profiles], dtype=np.int64),
        )


METRIC_ALIASES = {"degree": "k", "k": "k", "n_t": "n_t", "n_g": "n_g", "a": "a"}


def _lookup(names: tuple[str, ...], index: dict[str, int], users: Sequence[str]) -> np.ndarray:
    return np.array([index.get(u, -1) for u in users], dtype=np.int64)


def _gather(values: np.ndarray, codes: np.ndarray) -> np.ndarray:
    out = np.zeros(len(codes), dtype=np.int64)
    hit = codes >= 0
    out[hit] = values[codes[hit]]
    return out


def activity_table(
    f: Folksonomy | None, g: SocialGraph | None, m: GroupMembership | None, users: Sequence[str] | None = None
) -> ActivityTable:
    """Activity profiles for ``users`` (default: graph nodes, or else the union of all users)."""
    if users is None:
        if g is not None:
            users = g.users
        else:
            union = set()
            for store in (f, m):
                if store is not None:
                    union.update(store.users)
            users = tuple(sorted(union))
    users = tuple(users)
    n = len(users)
    k = _gather(g.degrees, _lookup(g.users, g.user_index, users)) if g is not None else np.zeros(n, np.int64)
    if f is not None:
        codes = _lookup(f.users, f.user_index, users)
        n_t = _gather(f.distinct_tags, codes)
        a = _gather(f.assignments, codes)
    else:
        n_t = np.zeros(n, np.int64)
        a = np.zeros(n, np.int64)
    n_g = _gather(m.group_counts, _lookup(m.users, m.user_index, users)) if m is not None else np.zeros(n, np.int64)
    return ActivityTable(users, k, n_t, n_g, a)
