"""Activity statistics and nearest-neighbor mixing curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import METRIC_ALIASES, ActivityProfile, ActivityTable, Folksonomy, GroupMembership, SocialGraph, activity_table
from .errors import DomainError, UndefinedCorrelationError

__all__ = [
    "Distribution",
    "MixingCurve",
    "SummaryRow",
    "METRICS",
    "distribution",
    "summary_table",
    "activity_vs_degree",
    "pearson",
    "correlation_matrix",
    "neighbor_means",
    "nn_mixing_curve",
    "log_bin",
]

METRICS = ("k", "n_t", "n_g", "a")


@dataclass(frozen=True)
class Distribution:
    support: tuple
    probability: tuple
    sample_count: int

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probability))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probability)


@dataclass(frozen=True)
class MixingCurve:
    metric: str
    x: tuple
    y: tuple
    count: tuple

    def __len__(self):
        return len(self.x)

    def rows(self):
        return list(zip(self.x, self.y, self.count))


@dataclass(frozen=True)
class SummaryRow:
    metric: str
    mean: float
    fluctuation: float | None  # <x^2>/<x>; None when <x> == 0


def _metric_name(metric: str) -> str:
    try:
        return METRIC_ALIASES[metric]
    except KeyError:
        raise DomainError(f"unknown metric {metric!r}; expected one of {sorted(METRIC_ALIASES)}") from None


def _as_table(profiles) -> ActivityTable:
    if isinstance(profiles, ActivityTable):
        return profiles
    return ActivityTable.from_profiles(list(profiles))


def distribution(values: Sequence) -> Distribution:
    """Empirical probability mass function."""
    arr = np.asarray(values)
    if arr.size == 0:
        raise DomainError("distribution of an empty sample")
    support, counts = np.unique(arr, return_counts=True)
    probs = counts / counts.sum()
    return Distribution(tuple(support.tolist()), tuple(probs.tolist()), int(arr.size))


def summary_table(profiles: Sequence[ActivityProfile] | ActivityTable) -> list[SummaryRow]:
    """Mean and <x^2>/<x> for each activity metric."""
    table = _as_table(profiles)
    if len(table) == 0:
        raise DomainError("summary of zero profiles")
    rows = []
    for name in METRICS:
        x = table.column(name).astype(np.float64)
        mean = float(x.mean())
        second = float((x * x).mean())
        rows.append(SummaryRow(name, mean, second / mean if mean > 0 else None))
    return rows


def _class_means(classes: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, inverse, counts = np.unique(classes, return_inverse=True, return_counts=True)
    sums = np.bincount(inverse, weights=values.astype(np.float64), minlength=len(x))
    return x, sums / counts, counts


def activity_vs_degree(profiles: Sequence[ActivityProfile] | ActivityTable, metric: str) -> MixingCurve:
    """Average of ``metric`` over the users of each degree class."""
    table = _as_table(profiles)
    if len(table) == 0:
        raise DomainError("activity_vs_degree of zero profiles")
    name = _metric_name(metric)
    x, y, c = _class_means(table.k, table.column(name))
    return MixingCurve(name, tuple(x.tolist()), tuple(y.tolist()), tuple(c.tolist()))


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise DomainError("pearson needs two sequences of equal length")
    if len(xa) < 2:
        raise DomainError("pearson needs at least two observations")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for a constant sequence")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def correlation_matrix(table: ActivityTable) -> dict[tuple[str, str], float | None]:
    """Pearson coefficient for every pair of activity metrics (raw values)."""
    out = {}
    for i, a in enumerate(METRICS):
        for b in METRICS[i + 1 :]:
            try:
                out[(a, b)] = pearson(table.column(a), table.column(b))
            except UndefinedCorrelationError:
                out[(a, b)] = None
    return out


def neighbor_means(g: SocialGraph, values: np.ndarray) -> np.ndarray:
    """Per node, the mean of ``values`` over its neighbors (NaN for isolated nodes)."""
    deg = g.degrees
    rows = np.repeat(np.arange(len(deg)), deg)
    sums = np.bincount(rows, weights=values[g.indices].astype(np.float64), minlength=len(deg))
    out = np.full(len(deg), np.nan)
    nz = deg > 0
    out[nz] = sums[nz] / deg[nz]
    return out


def nn_mixing_curve(
    f: Folksonomy | None, g: SocialGraph, m: GroupMembership | None, metric: str
) -> MixingCurve:
    """Two-stage average: per-user neighbor mean of ``metric``, then mean per metric class.

    Users without neighbors are left out.
    """
    name = _metric_name(metric)
    if g.edge_count == 0:
        raise DomainError("mixing curve of a graph without edges")
    table = activity_table(f, g, m, g.users)
    values = table.column(name)
    per_user = neighbor_means(g, values)
    keep = g.degrees > 0
    x, y, c = _class_means(values[keep], per_user[keep])
    return MixingCurve(name, tuple(x.tolist()), tuple(y.tolist()), tuple(c.tolist()))


def log_bin(curve: MixingCurve, bins_per_decade: int = 5) -> MixingCurve:
    """Count-weighted logarithmic binning, for plotting only."""
    x = np.asarray(curve.x, dtype=np.float64)
    y = np.asarray(curve.y, dtype=np.float64)
    c = np.asarray(curve.count, dtype=np.float64)
    pos = x > 0
    out_x, out_y, out_c = [], [], []
    if (~pos).any():
        out_x.append(0.0)
        out_y.append(float((y[~pos] * c[~pos]).sum() / c[~pos].sum()))
        out_c.append(int(c[~pos].sum()))
    if pos.any():
        idx = np.floor(np.log10(x[pos]) * bins_per_decade + 1e-9).astype(np.int64)
        for b in np.unique(idx):
            sel = idx == b
            w = c[pos][sel]
            out_x.append(float((x[pos][sel] * w).sum() / w.sum()))
            out_y.append(float((y[pos][sel] * w).sum() / w.sum()))
            out_c.append(int(w.sum()))
    return MixingCurve(curve.metric, tuple(out_x), tuple(out_y), tuple(out_c))
