"""Hot loops with a compiled backend and a numpy fallback.

The compiled module ``folklink._kernels`` is used when it imports; set
``FOLKLINK_BACKEND=python`` to force the fallback.  :func:`use_backend`
switches at runtime (tests and the benchmark run both).
"""

from __future__ import annotations

import logging
import os
from contextlib import contextmanager

import numpy as np

from . import _fallback
from .errors import ImpossibleDrawError

log = logging.getLogger(__name__)

try:  # pragma: no cover - depends on the build
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = _fallback
if _compiled is not None and os.environ.get("FOLKLINK_BACKEND", "").lower() not in ("python", "fallback"):
    _active = _compiled


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def backend_name() -> str:
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def set_backend(name: str) -> None:
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}") from None


@contextmanager
def use_backend(name: str):
    previous = backend_name()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


class BfsScratch:
    """Reusable buffers for repeated BFS on one graph."""

    def __init__(self, n_nodes: int):
        self.dist = np.full(n_nodes, -1, dtype=np.int32)
        self.queue = np.empty(max(n_nodes, 1), dtype=np.int64)


def bfs_levels(indptr, indices, source: int, dmax: int, scratch: BfsScratch | None = None):
    """(nodes, distances) of everything within ``dmax`` hops, source excluded, BFS order."""
    if scratch is None:
        scratch = BfsScratch(len(indptr) - 1)
    return _active.bfs_levels(indptr, indices, int(source), int(dmax), scratch.dist, scratch.queue)


def pair_overlap(indptr, indices, data, source: int, targets, scratch: np.ndarray | None = None):
    """Per target row: number of columns shared with row ``source`` and the dot product."""
    if scratch is None:
        scratch = np.zeros(int(indices.max()) + 1 if len(indices) else 1, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.int64)
    return _active.pair_overlap(indptr, indices, data, int(source), targets, scratch)


_CHUNK = 1 << 16
_BUDGET = 64


def draw_distinct(weights, n_draw, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Weighted sampling without replacement, independently for many owners.

    Owner ``o`` receives ``n_draw[o]`` distinct values drawn by successive
    sampling: each draw picks value ``v`` with probability proportional to
    ``weights[v]`` among values not yet drawn by that owner.  Returns
    ``(values, offsets)`` with owner ``o``'s draws, in draw order, at
    ``values[offsets[o]:offsets[o + 1]]``.

    Draws are made by rejection against the full weight table.  When an
    owner has already drawn most of the mass (many consecutive rejections)
    its remaining draws switch to exponential keys over the values still
    available, which continues the same successive-sampling law.
    """
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    n_draw = np.ascontiguousarray(n_draw, dtype=np.int64)
    positive = int(np.count_nonzero(weights > 0))
    if len(n_draw) and n_draw.max(initial=0) > positive:
        raise ImpossibleDrawError(f"cannot draw {int(n_draw.max())} distinct values from {positive}")
    offsets = np.zeros(len(n_draw) + 1, dtype=np.int64)
    np.cumsum(n_draw, out=offsets[1:])
    out = np.empty(int(offsets[-1]), dtype=np.int64)
    if not len(out):
        return out, offsets
    cum = np.cumsum(weights)
    stamp = np.full(len(weights), -1, dtype=np.int64)
    state = np.zeros(3, dtype=np.int64)
    uniforms = rng.random(_CHUNK)
    while True:
        status = _active.draw_distinct(cum, n_draw, offsets, out, uniforms, stamp, state, _BUDGET)
        if status == 0:
            break
        if status == 1:
            uniforms = rng.random(_CHUNK)
            state[2] = 0
            continue
        owner, j = int(state[0]), int(state[1])
        base = int(offsets[owner])
        avail = np.flatnonzero((stamp != owner) & (weights > 0))
        keys = rng.exponential(size=len(avail)) / weights[avail]
        need = int(n_draw[owner]) - j
        pick = avail[np.argsort(keys, kind="stable")[:need]]
        out[base + j : base + j + need] = pick
        stamp[pick] = owner
        state[0], state[1] = owner + 1, 0
    return out, offsets
