import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from folklink.core import Folksonomy, SocialGraph
from folklink.errors import DataError, DegenerateLabelsError, DomainError
from folklink.prediction import (
    ScoredPair,
    compare_measures,
    label_pairs,
    load_baseline,
    neighbor_lists_from_scores,
    relative_improvement,
    roc,
    sample_pairs,
)
from oracles import mann_whitney_auc


def scored(scores, labels):
    return [ScoredPair((f"a{i}", f"b{i}"), s, y) for i, (s, y) in enumerate(zip(scores, labels))]


def test_roc_examples():
    r = roc(scored([0.9, 0.8, 0.7, 0.1], [True, False, True, False]))
    assert r.auc == 0.75 and r.auc_exact == Fraction(3, 4)
    assert roc(scored([3, 2, 1, 0], [True, True, False, False])).auc == 1.0
    assert roc(scored([1, 1, 1, 1], [True, False, True, False])).auc == 0.5
    with pytest.raises(DegenerateLabelsError):
        roc(scored([1, 2], [True, True]))


def test_roc_points_shape():
    r = roc(([0.5, 0.5, 0.2, 0.9], [True, False, False, True]))
    assert r.points[0] == (0.0, 0.0) and r.points[-1] == (1.0, 1.0)
    xs, ys = zip(*r.points)
    assert list(xs) == sorted(xs) and list(ys) == sorted(ys)
    # the tie at 0.5 is one diagonal step
    assert (0.5, 1.0) in r.points and (0.0, 0.5) in r.points


labels_st = st.lists(st.booleans(), min_size=2, max_size=60).filter(lambda ls: any(ls) and not all(ls))


@settings(max_examples=200)
@given(labels_st, st.data())
def test_roc_matches_mann_whitney(labels, data):
    scores = data.draw(st.lists(st.integers(-5, 5), min_size=len(labels), max_size=len(labels)))
    r = roc((scores, labels))
    assert abs(r.auc - mann_whitney_auc(scores, labels)) <= 1e-12
    neg = roc(([-s for s in scores], labels))
    assert r.auc_exact + neg.auc_exact == 1
    # strictly increasing transform keeps the AUC
    assert roc(([np.exp(s) * 3 + 1 for s in scores], labels)).auc == r.auc


def test_relative_improvement():
    assert relative_improvement(0.685, 0.5) == pytest.approx(0.37)
    assert relative_improvement(0.6, 0.6) == 0.0
    with pytest.raises(DomainError):
        relative_improvement(0.6, 0.0)


def test_load_baseline(tmp_path):
    p = tmp_path / "b.tsv"
    p.write_text("u\tv\t0.5\n# comment\nu\tw\t1e-3\nx\tx\t9\n")
    assert load_baseline(p) == {("u", "v"): 0.5, ("u", "w"): 0.001}
    p.write_text("u\tv\thigh\n")
    with pytest.raises(DataError):
        load_baseline(p)


def active(users):
    return Folksonomy.from_triples([(u, "r", "t") for u in users])


def test_sample_pairs_takes_first_candidates():
    f = active(["u", "a", "b", "c"])
    s = sample_pairs(f, None, {"u": ["a", "b", "c"]}, "most_active", 2)
    assert s.pairs == (("u", "a"), ("u", "b")) and not s.short


def test_sample_pairs_skips_inactive_and_duplicates():
    f = active(["u", "v", "b"])
    lists = {"u": ["ghost", "v", "b", "u"], "v": ["u", "b"]}
    with pytest.warns(UserWarning):
        s = sample_pairs(f, None, lists, "most_active", 10)
    assert s.pairs == (("u", "v"), ("u", "b"), ("v", "b")) and s.short


def test_sample_pairs_all_inactive_is_empty_with_warning():
    f = active(["u"])
    with pytest.warns(UserWarning):
        s = sample_pairs(f, None, {"u": ["x", "y"]}, "random", 3)
    assert s.pairs == () and s.short


def test_sample_pairs_criteria_order():
    f = Folksonomy.from_triples([("a", "r", "t"), ("b", "r", "t"), ("b", "s", "t"), ("c", "r", "t")])
    g = SocialGraph.from_edges([("c", "a"), ("c", "b"), ("c", "x")])
    lists = {"a": ["b"], "b": ["c"], "c": ["a"]}
    assert sample_pairs(f, g, lists, "most_active", 1).pairs == (("b", "c"),)
    assert sample_pairs(f, g, lists, "most_connected", 1).pairs == (("c", "a"),)
    # ties on activity broken by user id
    assert sample_pairs(f, g, {"c": ["b"], "a": ["b"]}, "most_active", 1).pairs == (("a", "b"),)
    r1 = sample_pairs(f, g, lists, "random", 2, seed=4)
    assert r1 == sample_pairs(f, g, lists, "random", 2, seed=4)
    with pytest.raises(DomainError):
        sample_pairs(f, g, lists, "loudest", 2)


@settings(max_examples=60)
@given(st.dictionaries(st.sampled_from("abcdefgh"), st.lists(st.sampled_from("abcdefghxyz"), max_size=8), min_size=1))
def test_sample_pairs_invariants(lists):
    f = active(list("abcdefgh"))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s = sample_pairs(f, None, lists, "random", 15, seed=1)
    keys = [frozenset(p) for p in s.pairs]
    assert len(keys) == len(set(keys)) <= 15
    assert all(v in f.user_index and u != v for u, v in s.pairs)


def test_neighbor_lists_from_scores():
    scores = {("u", f"v{i}"): float(i % 7) for i in range(80)}
    lists = neighbor_lists_from_scores(scores)
    assert len(lists["u"]) == 60
    assert lists["u"][0][1] == 6.0


def fixture():
    f = Folksonomy.from_triples(
        [("a", "r1", "x"), ("b", "r1", "x"), ("b", "r2", "y"), ("c", "r2", "y"), ("d", "r3", "z"), ("a", "r3", "y")]
    )
    g = SocialGraph.from_edges([("a", "b"), ("b", "c")], nodes=["d"])
    base = {("a", "b"): 0.2, ("b", "c"): 0.9, ("a", "d"): 0.5, ("c", "d"): 0.1, ("a", "c"): 0.3}
    return f, g, base


def test_compare_measures_has_baseline_and_spec_rows():
    f, g, base = fixture()
    sample = sample_pairs(f, g, neighbor_lists_from_scores(base), "most_active", 5)
    rows = compare_measures(f, g, None, sample, ["mip:distributional:items"], base)
    names = [r.name for r in rows]
    assert sorted(names) == ["baseline", "mip:distributional:items"]
    base_row = rows[names.index("baseline")]
    assert base_row.rel_improvement == 0.0
    labels = [g.has_edge(*p) for p in sample.pairs]
    assert base_row.auc == pytest.approx(mann_whitney_auc([base[p] for p in sample.pairs], labels))
    assert [r.rel_improvement for r in rows] == sorted((r.rel_improvement for r in rows), reverse=True)


def test_compare_measures_missing_baseline():
    f, g, base = fixture()
    sample = sample_pairs(f, g, neighbor_lists_from_scores(base), "most_active", 5)
    partial = dict(base)
    del partial[("b", "c")]
    with pytest.raises(DataError, match="b"):
        compare_measures(f, g, None, sample, ["cosine:distributional:items"], partial)


def test_label_pairs():
    _, g, _ = fixture()
    out = label_pairs(g, [("a", "b"), ("a", "c")], [1.0, 2.0])
    assert [p.label for p in out] == [True, False]


def test_random_scores_auc_near_half():
    rng = np.random.default_rng(0)
    n = 100_000
    labels = rng.random(n) < 0.3
    assert abs(roc((rng.random(n), labels)).auc - 0.5) <= 0.02
