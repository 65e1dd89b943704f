# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.  Semantics must match ``folklink._fallback`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32
ctypedef cnp.float64_t f64


def bfs_levels(const i64[::1] indptr, const i32[::1] indices, Py_ssize_t source,
               int dmax, i32[::1] dist, i64[::1] queue):
    """Nodes within ``dmax`` hops of ``source`` (source excluded) and their distances.

    ``dist`` must be all -1 on entry and is restored before returning.
    ``queue`` needs room for every node.
    """
    cdef Py_ssize_t head = 0, tail = 1, k, v, u
    cdef int du
    queue[0] = source
    dist[source] = 0
    with nogil:
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            if du >= dmax:
                continue
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if dist[v] < 0:
                    dist[v] = du + 1
                    queue[tail] = v
                    tail += 1
    nodes = np.empty(tail - 1, dtype=np.int64)
    dists = np.empty(tail - 1, dtype=np.int32)
    cdef i64[::1] nv = nodes
    cdef i32[::1] dv = dists
    with nogil:
        for k in range(1, tail):
            nv[k - 1] = queue[k]
            dv[k - 1] = dist[queue[k]]
        for k in range(tail):
            dist[queue[k]] = -1
    return nodes, dists


def pair_overlap(const i64[::1] indptr, const i32[::1] indices, const f64[::1] data,
                 Py_ssize_t source, const i64[::1] targets, f64[::1] scratch):
    """Shared-column counts and dot products between row ``source`` and each target row.

    ``scratch`` is a zeroed dense buffer of length n_cols, restored on return.
    """
    cdef Py_ssize_t n = targets.shape[0], j, k, t
    cdef i64 shared_c
    cdef f64 dot, w
    shared = np.zeros(n, dtype=np.int64)
    dots = np.zeros(n, dtype=np.float64)
    cdef i64[::1] sv = shared
    cdef f64[::1] dv = dots
    with nogil:
        for k in range(indptr[source], indptr[source + 1]):
            scratch[indices[k]] = data[k]
        for j in range(n):
            t = targets[j]
            shared_c = 0
            dot = 0.0
            for k in range(indptr[t], indptr[t + 1]):
                w = scratch[indices[k]]
                if w != 0.0:
                    shared_c += 1
                    dot += w * data[k]
            sv[j] = shared_c
            dv[j] = dot
        for k in range(indptr[source], indptr[source + 1]):
            scratch[indices[k]] = 0.0
    return shared, dots


cdef inline Py_ssize_t _bisect_right(const f64[::1] cum, f64 x) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = cum.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if x < cum[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


def draw_distinct(const f64[::1] cum, const i64[::1] n_draw, const i64[::1] offsets,
                  i64[::1] out, const f64[::1] uniforms, i64[::1] stamp,
                  i64[::1] state, i64 budget):
    """Successive weighted draws without replacement by rejection.

    ``state`` = (owner, drawn so far for owner, next uniform).  Returns 0 when
    every owner is served, 1 when ``uniforms`` ran out, 2 when the current
    draw exceeded ``budget`` consecutive rejections.
    """
    cdef Py_ssize_t owner = state[0], j = state[1], upos = state[2]
    cdef Py_ssize_t n_owners = n_draw.shape[0], n_vals = cum.shape[0], t
    cdef Py_ssize_t n_unif = uniforms.shape[0]
    cdef f64 total = cum[n_vals - 1]
    cdef i64 rej
    cdef int status = 0
    with nogil:
        while owner < n_owners:
            while j < n_draw[owner]:
                rej = 0
                while True:
                    if upos >= n_unif:
                        status = 1
                        break
                    t = _bisect_right(cum, uniforms[upos] * total)
                    upos += 1
                    if t >= n_vals:
                        t = n_vals - 1
                    if stamp[t] != owner:
                        break
                    rej += 1
                    if rej > budget:
                        status = 2
                        break
                if status != 0:
                    break
                stamp[t] = owner
                out[offsets[owner] + j] = t
                j += 1
            if status != 0:
                break
            owner += 1
            j = 0
    state[0] = owner
    state[1] = j
    state[2] = upos
    return status
