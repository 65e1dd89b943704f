"""Time the compiled kernels against the numpy fallback on a synthetic dataset.

    python3 benchmarks/bench_kernels.py --users 20000 --repeat 3
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from folklink import kernels
from folklink.synth import SynthConfig, generate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(data, sources, dmax):
    g, f = data.graph, data.folksonomy
    indptr, indices = g.indptr, g.indices
    m = f.user_tag
    rng = np.random.default_rng(0)
    picks = rng.choice(g.node_count, size=min(sources, g.node_count), replace=False)
    scratch = kernels.BfsScratch(g.node_count)
    n_t = m.row_lengths()
    targets = np.arange(f.user_count, dtype=np.int64)
    overlap_scratch = np.zeros(f.tag_count, dtype=np.float64)

    def bfs():
        for s in picks:
            kernels.bfs_levels(indptr, indices, int(s), dmax, scratch)

    def overlap():
        for s in picks[:50]:
            kernels.pair_overlap(m.indptr, m.indices, m.data, int(s) % f.user_count, targets, overlap_scratch)

    def draw():
        kernels.draw_distinct(f.tag_use, n_t, np.random.default_rng(1))

    return {f"bfs x{len(picks)} (dmax={dmax})": bfs, "pair_overlap x50": overlap, "draw_distinct (all users)": draw}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--users", type=int, default=20000)
    ap.add_argument("--sources", type=int, default=200)
    ap.add_argument("--dmax", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    data = generate(SynthConfig(user_count=args.users, seed=0))
    print(f"{args.users} users, {data.graph.edge_count} edges, {int(data.folksonomy.assignments.sum())} triples")
    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled kernels not built; timing the fallback only")
    timings = {}
    for name in backends:
        with kernels.use_backend(name):
            for label, fn in cases(data, args.sources, args.dmax).items():
                timings[(label, name)] = best_of(fn, args.repeat)
    labels = list(dict.fromkeys(label for label, _ in timings))
    print(f"{'kernel':32} " + " ".join(f"{b:>10}" for b in backends) + ("    speedup" if len(backends) > 1 else ""))
    for label in labels:
        row = " ".join(f"{timings[(label, b)]:9.4f}s" for b in backends)
        extra = ""
        if len(backends) > 1:
            extra = f"  {timings[(label, 'python')] / timings[(label, 'compiled')]:8.1f}x"
        print(f"{label:32} {row}{extra}")


if __name__ == "__main__":
    main()
