"""Reshuffling null models that keep per-user activity and destroy local alignment.

Tags: every user keeps its frequency list f_1..f_n but receives n distinct
tags drawn, without replacement, from the global tag list where each tag
appears as often as it was used.  Groups: every user keeps its number of
groups, drawn the same way from the list where each group appears once per
member.  The social graph is never touched.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .core import Folksonomy, GroupMembership
from .errors import DomainError, ImpossibleDrawError

__all__ = ["ShuffleReport", "shuffle_tags", "shuffle_groups"]


@dataclass(frozen=True)
class ShuffleReport:
    seed: int
    users_shuffled: int
    preserves_n_t: bool
    preserves_frequencies: bool
    preserves_n_g: bool

    @property
    def ok(self) -> bool:
        return self.preserves_n_t and self.preserves_frequencies and self.preserves_n_g

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def shuffle_tags(f: Folksonomy, seed: int) -> tuple[Folksonomy, ShuffleReport]:
    """Null-model copy of ``f`` with tag vocabularies redrawn.

    For a user whose distinct tags have frequencies f_1..f_n (in tag order),
    the k-th drawn tag replaces the k-th original tag on the same items, so
    it inherits frequency f_k.  a(u), n_t(u) and the user's items are
    unchanged.
    """
    if len(f) == 0:
        raise DomainError("cannot shuffle an empty folksonomy")
    m = f.user_tag
    n_t = m.row_lengths()
    if n_t.max() > f.tag_count:
        raise ImpossibleDrawError(f"a user has {int(n_t.max())} tags but only {f.tag_count} exist")
    rng = np.random.default_rng(seed)
    drawn, _ = kernels.draw_distinct(f.tag_use, n_t, rng)

    # every triple (u, r, t) becomes (u, r, t') where t' replaces t for u
    new_tt = drawn[_slot_index(f)]
    out = Folksonomy.from_codes(f.users, f.items, f.tags, f.tu, f.ti, new_tt, prune=True)
    report = ShuffleReport(
        seed=int(seed),
        users_shuffled=int(f.user_count),
        preserves_n_t=_same_n_t(f, out),
        preserves_frequencies=_same_freqs(f, out),
        preserves_n_g=True,
    )
    return out, report


def _slot_index(f: Folksonomy) -> np.ndarray:
    """Global CSR position of the (user, tag) cell of each triple."""
    m = f.user_tag
    key_cells = np.repeat(np.arange(f.user_count, dtype=np.int64), m.row_lengths()) * max(f.tag_count, 1) + m.indices
    key_triples = f.tu.astype(np.int64) * max(f.tag_count, 1) + f.tt
    return np.searchsorted(key_cells, key_triples)


def _same_n_t(a: Folksonomy, b: Folksonomy) -> bool:
    return a.users == b.users and np.array_equal(a.distinct_tags, b.distinct_tags) and np.array_equal(
        a.assignments, b.assignments
    )


def _same_freqs(a: Folksonomy, b: Folksonomy) -> bool:
    if a.users != b.users:
        return False
    ma, mb = a.user_tag, b.user_tag
    # per-row sorted values must match
    ra = np.repeat(np.arange(a.user_count), ma.row_lengths())
    rb = np.repeat(np.arange(b.user_count), mb.row_lengths())
    if len(ra) != len(rb):
        return False
    sa = ma.data[np.lexsort((ma.data, ra))]
    sb = mb.data[np.lexsort((mb.data, rb))]
    return bool(np.array_equal(sa, sb))


def shuffle_groups(m: GroupMembership, seed: int) -> tuple[GroupMembership, ShuffleReport]:
    """Null-model copy of ``m``: each user redraws n_g distinct groups weighted by group size."""
    if m.user_count == 0 or m.rows.nnz == 0:
        raise DomainError("cannot shuffle an empty membership")
    n_g = m.group_counts
    if n_g.max() > len(m.groups):
        raise ImpossibleDrawError(f"a user has {int(n_g.max())} groups but only {len(m.groups)} exist")
    rng = np.random.default_rng(seed)
    drawn, _ = kernels.draw_distinct(m.sizes, n_g, rng)
    users = np.repeat(np.arange(m.user_count, dtype=np.int64), n_g)
    out = GroupMembership.from_codes(m.users, m.groups, users, drawn, prune=False)
    # groups nobody drew stay listed with size 0 so group codes remain comparable
    report = ShuffleReport(
        seed=int(seed),
        users_shuffled=int(m.user_count),
        preserves_n_t=True,
        preserves_frequencies=True,
        preserves_n_g=bool(np.array_equal(out.group_counts, m.group_counts)),
    )
    return out, report
