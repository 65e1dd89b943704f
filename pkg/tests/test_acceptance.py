"""Acceptance suite: one test per criterion, each recording a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v``; the summary block at the end
lists every criterion with its measured values.
"""

import os
import random
import resource
import subprocess
import sys
import time
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from folklink import kernels
from folklink.alignment import AlignmentConfig, alignment_profile
from folklink.core import Annotation, Folksonomy, GroupMembership
from folklink.metrics import nn_mixing_curve
from folklink.null_model import shuffle_groups, shuffle_tags
from folklink.prediction import compare_measures, neighbor_lists_from_scores, roc, sample_pairs
from folklink.similarity import ALL_SPECS, SimilarityIndex, apply_delta, similarity, tag_probabilities
from folklink.synth import SynthConfig, generate, synthetic_baseline
from harness import double_edge_swap, spearman
from oracles import mann_whitney_auc
from oracles import similarity as oracle_similarity

SEEDS = range(20)


# ---------------------------------------------------------------------------
# 1. null-model exactness and speed
# ---------------------------------------------------------------------------


def user_signature(f: Folksonomy):
    return {u: (len(fr), sum(fr.values()), sorted(fr.values())) for u, fr in f.tag_freq.items()}


def group_counts(m: GroupMembership):
    return {u: len(gs) for u, gs in m.membership.items()}


def test_null_model_exactness(acceptance):
    mismatches = 0
    for seed in range(100):
        rng = random.Random(seed)
        data = generate(SynthConfig(user_count=rng.randint(20, 300), homophily=rng.random(), seed=seed))
        f, m = data.folksonomy, data.groups
        fs, _ = shuffle_tags(f, seed)
        ms, _ = shuffle_groups(m, seed)
        same = (
            user_signature(fs) == user_signature(f)
            and np.array_equal(fs.distinct_tags, f.distinct_tags)
            and np.array_equal(fs.assignments, f.assignments)
            and group_counts(ms) == group_counts(m)
        )
        mismatches += not same

    big = generate(SynthConfig(user_count=10_000, tags_per_activity=3.7, groups_per_activity=5.6, seed=0))
    n_triples = int(big.folksonomy.assignments.sum())
    n_pairs = sum(len(g) for g in big.groups.membership.values())
    timings = {}
    for backend in ("compiled", "python"):
        if backend not in kernels.available_backends():
            continue
        with kernels.use_backend(backend):
            t0 = time.perf_counter()
            shuffle_tags(big.folksonomy, 1)
            t1 = time.perf_counter()
            shuffle_groups(big.groups, 1)
            t2 = time.perf_counter()
        timings[backend] = (t1 - t0, t2 - t1)
    slowest = max(max(t) for t in timings.values())
    ok = mismatches == 0 and slowest < 1.0 and n_triples >= 100_000 and n_pairs >= 100_000
    detail = f"{100 - mismatches}/100 exact; {n_triples} triples / {n_pairs} memberships, " + ", ".join(
        f"{b} tags {t[0]:.3f}s groups {t[1]:.3f}s" for b, t in timings.items()
    )
    assert acceptance(1, "null-model exactness", ok, detail), detail


# ---------------------------------------------------------------------------
# 2. null-model weighting
# ---------------------------------------------------------------------------


def test_null_model_weighting(acceptance):
    # u1 uses "a" on three items, u2 uses "b" on one: tag weights 3:1
    f = Folksonomy.from_triples([("u1", "r1", "a"), ("u1", "r2", "a"), ("u1", "r3", "a"), ("u2", "r4", "b")])
    n = 10_000
    drawn = Counter()
    for seed in range(n):
        out, _ = shuffle_tags(f, seed)
        drawn[("u1", next(iter(out.vocab["u1"])))] += 1
        drawn[("u2", next(iter(out.vocab["u2"])))] += 1
    tol = 3 * np.sqrt(0.75 * 0.25 / n)
    share_u1 = drawn[("u1", "a")] / n
    share_u2 = drawn[("u2", "a")] / n
    ok = abs(share_u1 - 0.75) < tol and abs(share_u2 - 0.75) < tol
    detail = f"P(draw a) u1={share_u1:.4f} u2={share_u2:.4f}, target 0.75 +/- {tol:.4f}"
    assert acceptance(2, "null-model weighting", ok, detail), detail


# ---------------------------------------------------------------------------
# 3. homophily detection and flat null curve
# ---------------------------------------------------------------------------


def test_homophily_detection(acceptance):
    t0 = time.perf_counter()
    real, null = [], []
    for seed in SEEDS:
        data = generate(SynthConfig(user_count=2000, homophily=0.8, seed=seed))
        cfg = AlignmentConfig(sources=2000, dmax=3, seed=seed)
        p = alignment_profile(data.folksonomy, data.graph, data.groups, cfg)
        shuffled, _ = shuffle_tags(data.folksonomy, seed)
        q = alignment_profile(shuffled, data.graph, data.groups, cfg)
        assert p.d == (1, 2, 3) and q.d == (1, 2, 3)
        real.append(p.mean_sigma_tags)
        null.append(q.mean_sigma_tags)
    elapsed = time.perf_counter() - t0
    real, null = np.mean(real, axis=0), np.mean(null, axis=0)
    ratio = real[0] / real[2]
    flatness = null.max() / null.min()
    ok = ratio >= 2.0 and flatness < 1.3 and elapsed < 120
    detail = f"d1/d3={ratio:.2f} (>=2), null max/min={flatness:.3f} (<1.3), {elapsed:.1f}s"
    assert acceptance(3, "homophily detection", ok, detail), detail


# ---------------------------------------------------------------------------
# 4. measure-oracle equivalence
# ---------------------------------------------------------------------------


def random_folksonomy(rng):
    n_users, n_tags, n_items = rng.randint(2, 10), rng.randint(1, 15), rng.randint(1, 15)
    return {
        (f"u{rng.randrange(n_users)}", f"r{rng.randrange(n_items)}", f"t{rng.randrange(n_tags)}")
        for _ in range(rng.randint(2, 80))
    }


def test_measure_oracle_equivalence(acceptance):
    worst, checks = 0.0, 0
    for seed in range(200):
        triples = random_folksonomy(random.Random(10_000 + seed))
        f = Folksonomy.from_triples(triples)
        probs = tag_probabilities(f)
        users = f.users
        for spec in ALL_SPECS:
            for i, u in enumerate(users):
                for v in users[i + 1 :]:
                    got = similarity(spec, f, probs, u, v)
                    exp = oracle_similarity(triples, spec.kernel, spec.aggregation, spec.projection, u, v)
                    worst = max(worst, abs(got - exp))
                    checks += 1
    ok = worst <= 1e-12
    detail = f"{checks} pair scores over 24 specs, max |diff| = {worst:.2e} (<=1e-12)"
    assert acceptance(4, "measure-oracle equivalence", ok, detail), detail


# ---------------------------------------------------------------------------
# 5. incremental equivalence
# ---------------------------------------------------------------------------


def test_incremental_equivalence(acceptance):
    universe = [(f"u{u}", f"r{r}", f"t{t}") for u in range(50) for r in range(8) for t in range(8)]
    worst, steps = 0.0, 0
    for spec in (s for s in ALL_SPECS if s.collaborative):
        rng = random.Random(str(spec))
        present = set(rng.sample(universe, 300))
        index = SimilarityIndex(spec, Folksonomy.from_triples(present))
        absent = [x for x in universe if x not in present]
        for _ in range(1000):
            if rng.random() < 0.5 and present:
                tr = rng.choice(sorted(present))
                present.discard(tr)
                absent.append(tr)
                apply_delta(index, ("remove", Annotation(*tr)))
            else:
                tr = absent.pop(rng.randrange(len(absent)))
                present.add(tr)
                apply_delta(index, ("add", Annotation(*tr)))
            fresh = SimilarityIndex(spec, Folksonomy.from_triples(present)).totals
            got = index.totals
            for pair in set(fresh) | set(got):
                worst = max(worst, abs(got.get(pair, 0.0) - fresh.get(pair, 0.0)))
            steps += 1
    ok = worst <= 1e-9 and steps == 12_000
    detail = f"{steps} delta steps over 12 specs, max |diff| = {worst:.2e} (<=1e-9)"
    assert acceptance(5, "incremental equivalence", ok, detail), detail


# ---------------------------------------------------------------------------
# 6. ROC correctness
# ---------------------------------------------------------------------------


def test_roc_correctness(acceptance):
    rng = np.random.default_rng(6)
    worst, complement_ok, float_gap = 0.0, True, 0.0
    for _ in range(500):
        n = int(rng.integers(2, 200))
        labels = rng.random(n) < rng.uniform(0.1, 0.9)
        labels[0], labels[1] = True, False
        scores = rng.integers(0, int(rng.integers(2, 50)), n) / 7.0  # plenty of ties
        r = roc((scores, labels))
        worst = max(worst, abs(r.auc - mann_whitney_auc(scores.tolist(), labels.tolist())))
        flipped = roc((-scores, labels))
        complement_ok &= r.auc_exact + flipped.auc_exact == 1
        float_gap = max(float_gap, abs(r.auc + flipped.auc - 1.0))
    labels = rng.random(100_000) < 0.5
    random_auc = roc((rng.random(100_000), labels)).auc
    perfect = roc(([2.0, 1.5, 1.0, 0.2, 0.1], [True, True, True, False, False]))
    ok = (
        worst <= 1e-12
        and abs(random_auc - 0.5) <= 0.02
        and perfect.auc == 1.0
        and perfect.auc_exact == Fraction(1)
        and complement_ok
        and float_gap <= 2**-52
    )
    detail = (
        f"max |auc - Mann-Whitney| = {worst:.1e}, random 1e5 = {random_auc:.4f}, perfect = {perfect.auc}, "
        f"AUC(s)+AUC(-s)=1 exact: {complement_ok} (float gap {float_gap:.1e})"
    )
    assert acceptance(6, "ROC correctness", ok, detail), detail


# ---------------------------------------------------------------------------
# 7. end-to-end prediction ordering
# ---------------------------------------------------------------------------


def test_prediction_ordering(acceptance):
    measure_wins = baseline_wins = 0
    aucs = []
    for seed in SEEDS:
        data = generate(SynthConfig(user_count=2000, homophily=0.8, seed=seed))
        f, g = data.folksonomy, data.graph
        base = synthetic_baseline(f, g, seed=seed)
        sample = sample_pairs(f, g, neighbor_lists_from_scores(base), "most_active", 1000, seed)
        rows = {r.name: r for r in compare_measures(f, g, None, sample, ["mip:distributional:items"], base)}
        labels = [g.has_edge(*p) for p in sample.pairs]
        random_auc = roc((np.random.default_rng(seed).random(len(labels)), labels)).auc
        mip, baseline = rows["mip:distributional:items"], rows["baseline"]
        measure_wins += mip.rel_improvement > 0
        baseline_wins += baseline.auc > random_auc
        aucs.append((mip.auc, baseline.auc, random_auc))
    mean = np.mean(aucs, axis=0)
    ok = measure_wins >= 18 and baseline_wins >= 18
    detail = (
        f"mip > baseline in {measure_wins}/20, baseline > random in {baseline_wins}/20 "
        f"(mean AUC mip {mean[0]:.3f}, baseline {mean[1]:.3f}, random {mean[2]:.3f})"
    )
    assert acceptance(7, "prediction ordering", ok, detail), detail


# ---------------------------------------------------------------------------
# 8. degree mixing curve before and after rewiring
# ---------------------------------------------------------------------------


def test_mixing_curve(acceptance):
    original, rewired = [], []
    for seed in SEEDS:
        data = generate(SynthConfig(user_count=5000, homophily=0.8, activity_mixing=0.5, degree_cap=30, seed=seed))
        f, g, m = data.folksonomy, data.graph, data.groups
        curve = nn_mixing_curve(f, g, m, "k")
        original.append(spearman(curve.x, curve.y))
        shuffled = double_edge_swap(g, 10 * g.edge_count, seed + 100)
        assert np.array_equal(np.sort(shuffled.degrees), np.sort(g.degrees))
        curve = nn_mixing_curve(f, shuffled, m, "k")
        rewired.append(spearman(curve.x, curve.y))
    before, after = float(np.mean(original)), float(np.mean(rewired))
    ok = before > 0.3 and abs(after) < 0.1
    detail = (
        f"mean Spearman {before:.3f} (>0.3), after rewiring {after:+.3f} (|.|<0.1; "
        f"per-seed sd {np.std(rewired):.2f}, mean of |rho| {np.mean(np.abs(rewired)):.2f})"
    )
    assert acceptance(8, "mixing curve", ok, detail), detail


# ---------------------------------------------------------------------------
# 9. performance envelope
# ---------------------------------------------------------------------------


def cli(*argv):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "folklink", *argv], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return time.perf_counter() - t0


def count_lines(path):
    with open(path, "rb") as fh:
        return sum(1 for _ in fh)


@pytest.mark.slow
def test_performance_envelope(acceptance, tmp_path):
    data = tmp_path / "data"
    cli(
        "synth", "--users", "100000", "--tags", "50000", "--items", "200000", "--group-universe", "20000",
        "--mean-degree", "10.3", "--tags-per-activity", "3.72", "--baseline", "--baseline-users", "3000",
        "--seed", "1", "--out", str(data),
    )
    n_triples, n_edges = count_lines(data / "triples.tsv"), count_lines(data / "edges.tsv")
    inputs = ["--triples", str(data / "triples.tsv"), "--edges", str(data / "edges.tsv")]
    t_align = cli("align", *inputs, "--groups", str(data / "groups.tsv"), "--sources", "1000", "--dmax", "4",
                  "--seed", "1", "--out", str(tmp_path / "align"))
    t_predict = cli("predict", *inputs, "--baseline", str(data / "baseline.tsv"), "--spec", "all", "--m", "1000",
                    "--out", str(tmp_path / "predict"))
    peak_gb = resource.getrusage(resource.RUSAGE_CHILDREN).ru_maxrss / 2**20  # KiB on Linux
    rows = count_lines(tmp_path / "predict" / "comparison.csv")
    total = t_align + t_predict
    ok = (
        n_triples >= 1_000_000
        and n_edges >= 500_000
        and rows == 26  # header, baseline, 24 specs
        and total < 600
        and peak_gb < 8
    )
    detail = (
        f"{n_triples} triples, 100000 users, {n_edges} edges: align {t_align:.1f}s + predict {t_predict:.1f}s "
        f"= {total:.1f}s (<600s), peak RSS {peak_gb:.2f} GB (<8), {os.cpu_count()} CPU"
    )
    assert acceptance(9, "performance envelope", ok, detail), detail
