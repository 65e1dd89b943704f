"""Command-line entry point: ``folklink <subcommand> [options]``.

Every run writes its outputs plus ``manifest.json`` (argv, input hashes,
seed, library versions) into the output directory, which defaults to
``$FOLKLINK_OUT`` or ``./folklink_out``.

Exit status: 0 on success, 1 on a usage or validation error, 2 when the
input data cannot support the request.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import platform
import sys
import warnings

import numpy as np

from . import __version__, kernels
from .alignment import QUANTITIES, AlignmentConfig, alignment_study, random_pair_baseline
from .core import activity_table, load_edges, load_groups, load_triples, _read_tsv
from .errors import DataError, DomainError, FolkError, NotFoundError
from .metrics import METRICS, activity_vs_degree, correlation_matrix, distribution, log_bin, nn_mixing_curve, summary_table
from .null_model import shuffle_groups, shuffle_tags
from .prediction import CRITERIA, compare_measures, load_baseline, neighbor_lists_from_scores, sample_pairs
from .similarity import ALL_SPECS, MeasureSpec, batch_similarity, tag_probabilities
from .synth import SynthConfig, generate, synthetic_baseline, write_dataset

OUT_ENV = "FOLKLINK_OUT"

# data-dependent failures; everything else under DomainError is a bad request
_DATA_ERRORS = (DataError, NotFoundError, OSError)
_DATA_DOMAIN = ("ImpossibleDrawError", "UndefinedCorrelationError", "EmptyStratumError", "DegenerateLabelsError")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


class _Run:
    """Tracks inputs and outputs of one invocation for the manifest."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.out = args.out or os.environ.get(OUT_ENV) or "folklink_out"
        self.inputs: dict[str, dict] = {}
        self.outputs: list[str] = []
        os.makedirs(self.out, exist_ok=True)

    def input(self, role, path):
        with open(path, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        self.inputs[role] = {"path": os.fspath(path), "sha256": digest}
        return path

    def path(self, name):
        self.outputs.append(name)
        return os.path.join(self.out, name)

    def csv(self, name, header, rows):
        with open(self.path(name), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    def json(self, name, obj):
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def manifest(self):
        opts = {k: v for k, v in sorted(vars(self.args).items()) if k not in ("func",)}
        doc = {
            "command": self.args.command,
            "argv": self.argv,
            "options": opts,
            "seed": getattr(self.args, "seed", None),
            "inputs": self.inputs,
            "outputs": sorted(self.outputs),
            "versions": {
                "folklink": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            "backend": kernels.backend_name(),
        }
        with open(os.path.join(self.out, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def _load_core(run, args, need_edges=True, need_groups=False):
    f = load_triples(run.input("triples", args.triples))
    g = load_edges(run.input("edges", args.edges)) if getattr(args, "edges", None) else None
    if need_edges and g is None:
        raise UsageError("--edges is required")
    m = None
    if getattr(args, "groups", None):
        m = load_groups(run.input("groups", args.groups))
    elif need_groups:
        raise UsageError("--groups is required")
    return f, g, m


def _curve_rows(curve):
    return [(x, y, c) for x, y, c in zip(curve.x, curve.y, curve.count)]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_stats(run, args):
    f, g, m = _load_core(run, args)
    table = activity_table(f, g, m)
    run.csv("summary.csv", ["metric", "mean", "fluctuation"], [(r.metric, r.mean, r.fluctuation) for r in summary_table(table)])
    for name in METRICS:
        dist = distribution(table.column(name))
        run.csv(f"distribution_{name}.csv", ["value", "mass"], list(zip(dist.support, dist.probability)))
        if name != "k":
            run.csv(f"vs_degree_{name}.csv", ["value", "mean", "count"], _curve_rows(activity_vs_degree(table, name)))
        if g.edge_count:
            curve = nn_mixing_curve(f, g, m, name)
            run.csv(f"mixing_{name}.csv", ["value", "mean", "count"], _curve_rows(curve))
            if args.log_bin:
                binned = log_bin(curve, args.log_bin)
                run.csv(f"mixing_{name}_logbin.csv", ["value", "mean", "count"], _curve_rows(binned))
    corr = correlation_matrix(table)
    run.json("correlations.json", {f"{a},{b}": v for (a, b), v in sorted(corr.items())})


def cmd_align(run, args):
    f, g, m = _load_core(run, args, need_groups=True)
    cfg = AlignmentConfig(sources=args.sources, dmax=args.dmax, seed=args.seed, exhaustive_d2=args.exhaustive_d2)
    study = alignment_study(f, g, m, cfg, histogram_distances=args.hist, bin_width=args.bin_width)
    p = study.profile
    for q in QUANTITIES:
        run.csv(f"align_{q}.csv", ["distance", "mean", "count"], list(zip(p.d, p.column(q), p.pair_count)))
    for (d, q), dist in sorted(study.histograms.items()):
        run.csv(f"hist_d{d}_{q}.csv", ["bin", "mass"], list(zip(dist.support, dist.probability)))
    if args.random_pairs:
        run.json("random_pairs.json", random_pair_baseline(f, args.random_pairs, seed=args.seed, m=m))


def cmd_shuffle(run, args):
    report = {}
    if args.triples:
        f = load_triples(run.input("triples", args.triples))
        out, rep = shuffle_tags(f, args.seed)
        out.write_tsv(run.path("triples.tsv"))
        report["tags"] = json.loads(rep.to_json())
    if args.groups:
        m = load_groups(run.input("groups", args.groups))
        out, rep = shuffle_groups(m, args.seed)
        out.write_tsv(run.path("groups.tsv"))
        report["groups"] = json.loads(rep.to_json())
    if not report:
        raise UsageError("shuffle needs --triples and/or --groups")
    run.json("shuffle_report.json", report)


def _specs(values):
    if not values or any(v.lower() == "all" for v in values):
        return list(ALL_SPECS)
    return [MeasureSpec.parse(v) for v in values]


def _spec_file(spec):
    return str(spec).replace(":", "_")


def cmd_score(run, args):
    f = load_triples(run.input("triples", args.triples))
    pairs = [(a, b) for _, (a, b) in _read_tsv(run.input("pairs", args.pairs), 2)]
    probs = tag_probabilities(f)
    for spec in _specs(args.spec):
        scores = batch_similarity(spec, f, probs, pairs)
        run.csv(f"scores_{_spec_file(spec)}.csv", ["userA", "userB", "score"], [(a, b, s) for (a, b), s in scores])


def cmd_predict(run, args):
    f, g, _ = _load_core(run, args)
    base = load_baseline(run.input("baseline", args.baseline))
    sample = sample_pairs(f, g, neighbor_lists_from_scores(base), args.criterion, args.m, seed=args.seed)
    specs = _specs(args.spec)
    rows = compare_measures(f, g, tag_probabilities(f), sample, specs, base)
    run.csv("pairs.csv", ["userA", "userB", "linked"], [(a, b, int(g.has_edge(a, b))) for a, b in sample.pairs])
    run.csv("comparison.csv", ["spec", "auc", "rel_improvement"], [(r.name, r.auc, r.rel_improvement) for r in rows])
    for r in rows:
        run.csv(f"roc_{_spec_file(r.name)}.csv", ["fpr", "tpr"], list(r.roc.points))


def cmd_synth(run, args):
    cfg = SynthConfig(
        user_count=args.users,
        tag_universe=args.tags,
        item_universe=args.items,
        group_universe=args.group_universe,
        homophily=args.homophily,
        community_count=args.communities,
        mean_degree=args.mean_degree,
        degree_cap=args.degree_cap,
        activity_mixing=args.activity_mixing,
        tags_per_activity=args.tags_per_activity,
        activity_cap=args.activity_cap,
        seed=args.seed,
    )
    data = generate(cfg)
    base = None
    if args.baseline:
        owners = None
        if args.baseline_users:
            # the most active users are the ones pair sampling reaches first
            order = np.argsort(-data.folksonomy.assignments, kind="stable")[: args.baseline_users]
            owners = [data.folksonomy.users[i] for i in order.tolist()]
        base = synthetic_baseline(data.folksonomy, data.graph, seed=args.seed, users=owners)
    for path in write_dataset(data, run.out, base).values():
        run.outputs.append(os.path.basename(path))
    run.json("synth_config.json", cfg.as_dict())


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _distances(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="folklink", description="Folksonomy analytics and tag-based link prediction.")
    p.add_argument("--version", action="version", version=f"folklink {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True):
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./folklink_out)")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("stats", help="activity tables, distributions and mixing curves")
    sp.add_argument("--triples", required=True)
    sp.add_argument("--edges", required=True)
    sp.add_argument("--groups")
    sp.add_argument("--log-bin", type=int, default=0, metavar="N", help="also write mixing curves in N log bins per decade")
    common(sp)
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("align", help="alignment per social distance")
    sp.add_argument("--triples", required=True)
    sp.add_argument("--edges", required=True)
    sp.add_argument("--groups", required=True)
    sp.add_argument("--sources", type=int, default=20000)
    sp.add_argument("--dmax", type=int, default=6)
    sp.add_argument("--exhaustive-d2", action="store_true", help="use every node as a source for d <= 2")
    sp.add_argument("--hist", type=_distances, default=(), help="distances to histogram, e.g. 1,3")
    sp.add_argument("--bin-width", type=float, default=0.02)
    sp.add_argument("--random-pairs", type=int, default=0, help="also measure this many random pairs")
    common(sp)
    sp.set_defaults(func=cmd_align)

    sp = sub.add_parser("shuffle", help="null-model copies of tags and/or groups")
    sp.add_argument("--triples")
    sp.add_argument("--groups")
    common(sp)
    sp.set_defaults(func=cmd_shuffle)

    sp = sub.add_parser("score", help="similarity scores for listed pairs")
    sp.add_argument("--triples", required=True)
    sp.add_argument("--pairs", required=True, help="TSV of userA<TAB>userB")
    sp.add_argument("--spec", action="append", help="kernel:aggregation:projection, repeatable, or 'all'")
    common(sp)
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("predict", help="pair sampling, ROC/AUC and comparison with a baseline")
    sp.add_argument("--triples", required=True)
    sp.add_argument("--edges", required=True)
    sp.add_argument("--baseline", required=True, help="TSV of userA<TAB>userB<TAB>affinity")
    sp.add_argument("--spec", action="append", help="kernel:aggregation:projection, repeatable, or 'all'")
    sp.add_argument("--criterion", default="most_active", choices=CRITERIA)
    sp.add_argument("--m", type=int, default=1000, help="number of pairs")
    common(sp)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("synth", help="generate a synthetic dataset")
    d = SynthConfig()
    sp.add_argument("--users", type=int, default=d.user_count)
    sp.add_argument("--tags", type=int, default=d.tag_universe)
    sp.add_argument("--items", type=int, default=d.item_universe)
    sp.add_argument("--group-universe", type=int, default=d.group_universe)
    sp.add_argument("--homophily", type=float, default=d.homophily)
    sp.add_argument("--communities", type=int, default=d.community_count)
    sp.add_argument("--mean-degree", type=float, default=d.mean_degree)
    sp.add_argument("--degree-cap", type=int, default=d.degree_cap)
    sp.add_argument("--activity-mixing", type=float, default=d.activity_mixing)
    sp.add_argument("--tags-per-activity", type=float, default=d.tags_per_activity)
    sp.add_argument("--activity-cap", type=int, default=d.activity_cap)
    sp.add_argument("--baseline", action="store_true", help="also write a noisy-degree baseline.tsv")
    sp.add_argument("--baseline-users", type=int, default=0, help="list candidates only for this many most active users")
    common(sp)
    sp.set_defaults(func=cmd_synth)
    return p


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        r = _Run(args, argv)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            args.func(r, args)
        r.manifest()
    except UsageError as exc:
        print(f"folklink {args.command}: {exc}", file=sys.stderr)
        return 1
    except _DATA_ERRORS as exc:
        print(f"folklink {args.command}: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"folklink {args.command}: {exc}", file=sys.stderr)
        return 2 if type(exc).__name__ in _DATA_DOMAIN else 1
    except FolkError as exc:
        print(f"folklink {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
