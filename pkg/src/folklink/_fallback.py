"""Numpy / pure-Python versions of the kernels in ``_kernels.pyx``.

Signatures and results are identical; only speed differs.
"""

import numpy as np


def bfs_levels(indptr, indices, source, dmax, dist, queue):
    # frontier-at-a-time expansion; ``dist``/``queue`` kept for signature parity
    frontier = np.array([source], dtype=np.int64)
    nodes, dists = [], []
    seen = np.zeros(len(indptr) - 1, dtype=bool)
    seen[source] = True
    for d in range(1, dmax + 1):
        if not len(frontier):
            break
        starts = indptr[frontier]
        lengths = indptr[frontier + 1] - starts
        total = int(lengths.sum())
        if total == 0:
            break
        ends = np.cumsum(lengths)
        pos = np.arange(total, dtype=np.int64) + np.repeat(starts - (ends - lengths), lengths)
        cand = indices[pos].astype(np.int64)
        # first-seen order matches the queue order of a sequential BFS
        cand = cand[~seen[cand]]
        _, first = np.unique(cand, return_index=True)
        nxt = cand[np.sort(first)]
        seen[nxt] = True
        nodes.append(nxt)
        dists.append(np.full(len(nxt), d, dtype=np.int32))
        frontier = nxt
    if not nodes:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int32)
    return np.concatenate(nodes), np.concatenate(dists)


def pair_overlap(indptr, indices, data, source, targets, scratch):
    targets = np.asarray(targets, dtype=np.int64)
    lo, hi = indptr[source], indptr[source + 1]
    scratch[indices[lo:hi]] = data[lo:hi]
    try:
        starts = indptr[targets]
        lengths = indptr[targets + 1] - starts
        total = int(lengths.sum())
        if total == 0:
            return np.zeros(len(targets), dtype=np.int64), np.zeros(len(targets), dtype=np.float64)
        ends = np.cumsum(lengths)
        pos = np.arange(total, dtype=np.int64) + np.repeat(starts - (ends - lengths), lengths)
        w = scratch[indices[pos]]
        seg = np.repeat(np.arange(len(targets)), lengths)
        hit = w != 0.0
        shared = np.bincount(seg[hit], minlength=len(targets)).astype(np.int64)
        dots = np.bincount(seg[hit], weights=w[hit] * data[pos][hit], minlength=len(targets))
        return shared, dots
    finally:
        scratch[indices[lo:hi]] = 0.0


def draw_distinct(cum, n_draw, offsets, out, uniforms, stamp, state, budget):
    # scalar indexing only: the loop is re-entered often, so no per-call list copies
    n_vals = len(cum)
    total = float(cum[-1])
    n_unif = len(uniforms)
    n_owners = len(n_draw)
    owner, j, upos = int(state[0]), int(state[1]), int(state[2])
    status = 0
    while owner < n_owners:
        base = int(offsets[owner])
        need = int(n_draw[owner])
        while j < need:
            rej = 0
            while True:
                if upos >= n_unif:
                    status = 1
                    break
                t = int(np.searchsorted(cum, uniforms[upos] * total, side="right"))
                upos += 1
                if t >= n_vals:
                    t = n_vals - 1
                if stamp[t] != owner:
                    break
                rej += 1
                if rej > budget:
                    status = 2
                    break
            if status:
                break
            stamp[t] = owner
            out[base + j] = t
            j += 1
        if status:
            break
        owner += 1
        j = 0
    state[0], state[1], state[2] = owner, j, upos
    return status
