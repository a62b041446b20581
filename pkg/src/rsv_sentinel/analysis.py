"""Exploratory statistics over the weekly panel.

Correlation matrix with collinearity pruning down to the 15 modeling
predictors, distribution summaries, and plot-ready weekly trend extracts.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    EmptyInput,
    LengthMismatch,
    UnknownGroup,
    UnresolvedGroup,
    ZeroVariance,
)


def pearson(x, y) -> float:
    """Pearson product-moment correlation of two equal-length vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise LengthMismatch(f"{x.shape} vs {y.shape}")
    if x.size < 3:
        raise ValueError("need at least 3 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVariance("constant input vector")
    r = float(dx @ dy) / (sx * sy)
    return min(1.0, max(-1.0, r))


@dataclass
class CorrelationMatrix:
    """Symmetric Pearson matrix; undefined cells are NaN with a flag."""

    variables: tuple
    values: np.ndarray
    undefined: np.ndarray  # boolean mask of cells with zero variance

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.variables.index(a),
                                 self.variables.index(b)])


def correlation_matrix(panel_rows, variables: Sequence[str],
                       rate: bool = True) -> CorrelationMatrix:
    """Pairwise Pearson over the panel.

    `variables` name panel features; with `rate` set, the response column
    is prepended as "Rate". Cells whose pair has a constant vector are
    flagged undefined instead of failing the whole matrix.
    """
    columns = {}
    if rate:
        columns["Rate"] = np.array([r.rate for r in panel_rows])
    for name in variables:
        columns[name] = np.array([r.features[name] for r in panel_rows])
    names = tuple(columns)
    if len(panel_rows) < 3:
        raise EmptyInput("need at least 3 panel rows")

    p = len(names)
    values = np.eye(p)
    undefined = np.zeros((p, p), dtype=bool)
    for i in range(p):
        for j in range(i + 1, p):
            try:
                r = pearson(columns[names[i]], columns[names[j]])
            except ZeroVariance:
                values[i, j] = values[j, i] = np.nan
                undefined[i, j] = undefined[j, i] = True
                continue
            values[i, j] = values[j, i] = r
    return CorrelationMatrix(names, values, undefined)


def collinearity_prune(matrix: CorrelationMatrix, threshold: float,
                       preferences: Sequence[str]) -> list[str]:
    """Keep one variable per high-correlation group.

    Groups are connected components of the graph whose edges join variables
    with |r| >= threshold. From each multi-member group the first variable
    listed in `preferences` is kept; a group none of whose members appear
    there raises UnresolvedGroup. Output preserves matrix column order.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    names = matrix.variables
    p = len(names)
    adjacency = {name: set() for name in names}
    for i in range(p):
        for j in range(i + 1, p):
            v = matrix.values[i, j]
            if not np.isnan(v) and abs(v) >= threshold:
                adjacency[names[i]].add(names[j])
                adjacency[names[j]].add(names[i])

    seen: set = set()
    keep: set = set()
    for name in sorted(names):
        if name in seen:
            continue
        group = _component(name, adjacency)
        seen |= group
        if len(group) == 1:
            keep.add(name)
            continue
        preferred = next((p_ for p_ in preferences if p_ in group), None)
        if preferred is None:
            raise UnresolvedGroup(
                f"no preference rule for group {sorted(group)}")
        keep.add(preferred)
    return [name for name in names if name in keep]


def _component(start: str, adjacency: dict) -> set:
    stack, group = [start], {start}
    while stack:
        for neighbor in adjacency[stack.pop()]:
            if neighbor not in group:
                group.add(neighbor)
                stack.append(neighbor)
    return group


KEEP_PREFERENCES = ("T2M", "WS10M")
PRUNE_THRESHOLD = 0.85
EXTRA_METEO = ("T2MDEW", "T2MWET", "TS", "WS2M")


def select_model_predictors(panel_rows, meteo_weekly: dict,
                            threshold: float = PRUNE_THRESHOLD,
                            preferences: Sequence[str] = KEEP_PREFERENCES):
    """Collinearity pruning over the full ingested variable set.

    Joins the four meteorology variables excluded from the panel back in
    (per state-week), builds the correlation matrix, and keeps one
    variable per high-correlation group. With the default preferences the
    temperature block collapses to T2M and the wind pair to WS10M,
    reproducing the 15 modeling predictors.
    """
    keyed = []
    for row in panel_rows:
        extra = meteo_weekly.get((row.state, row.week), {})
        if all(v in extra for v in EXTRA_METEO):
            keyed.append((row, extra))
    if len(keyed) < 3:
        raise EmptyInput("too few rows with the full meteorology block")

    base = [n for n in keyed[0][0].features if n != "rsv_season"]
    columns = {name: np.array([row.features[name] for row, _ in keyed])
               for name in base}
    for name in EXTRA_METEO:
        columns[name] = np.array([extra[name] for _, extra in keyed])

    names = tuple(base + list(EXTRA_METEO))
    p = len(names)
    values = np.eye(p)
    undefined = np.zeros((p, p), dtype=bool)
    for i in range(p):
        for j in range(i + 1, p):
            try:
                r = pearson(columns[names[i]], columns[names[j]])
            except ZeroVariance:
                values[i, j] = values[j, i] = np.nan
                undefined[i, j] = undefined[j, i] = True
                continue
            values[i, j] = values[j, i] = r
    matrix = CorrelationMatrix(names, values, undefined)
    selected = collinearity_prune(matrix, threshold, preferences)
    return matrix, selected + ["rsv_season"]


# -- distributions -------------------------------------------------------------

@dataclass
class DistributionSummary:
    variable: str
    quantiles: dict   # min, q1, median, q3, max
    mean: float
    sd: float
    skewness: float
    histogram: list   # (bin_lo, bin_hi, count)


def skewness(values) -> float:
    """Adjusted Fisher-Pearson standardized third moment; 0 for constants."""
    x = np.asarray(values, dtype=np.float64)
    n = x.size
    if n < 3:
        return 0.0
    m = x.mean()
    s = x.std(ddof=0)
    if s == 0.0:
        return 0.0
    g1 = float(((x - m) ** 3).mean() / s**3)
    return g1 * math.sqrt(n * (n - 1)) / (n - 2)


def distribution_summary(panel_rows, variable: str,
                         bins: int = 40) -> DistributionSummary:
    """Quantiles, moments, and fixed-width histogram for one panel variable."""
    if variable == "Rate":
        x = np.array([r.rate for r in panel_rows], dtype=np.float64)
    else:
        x = np.array([r.features[variable] for r in panel_rows],
                     dtype=np.float64)
    if x.size == 0:
        raise EmptyInput(f"no values for {variable}")
    q = np.quantile(x, [0.0, 0.25, 0.5, 0.75, 1.0])
    counts, edges = np.histogram(x, bins=bins)
    histogram = [(float(edges[i]), float(edges[i + 1]), int(counts[i]))
                 for i in range(len(counts))]
    return DistributionSummary(
        variable=variable,
        quantiles={"min": float(q[0]), "q1": float(q[1]),
                   "median": float(q[2]), "q3": float(q[3]),
                   "max": float(q[4])},
        mean=float(x.mean()),
        sd=float(x.std(ddof=1)) if x.size > 1 else 0.0,
        skewness=skewness(x),
        histogram=histogram,
    )


# -- time trends -----------------------------------------------------------------

_GROUP_FIELDS = {"sex": "sex", "age": "age_group", "race": "race",
                 "state": "state"}


def time_trend_extract(records, group_by: str) -> dict:
    """Per-group weekly rate series from raw RSV-NET records.

    For demographic groupings the complementary dimensions are held at
    "Overall"; for state grouping all three demographics are "Overall".
    Within a group and week, multiple records (e.g. several states) are
    averaged. Returns {group_level: [(EpiWeek, rate), ...]} sorted by week.
    """
    if group_by not in _GROUP_FIELDS:
        raise UnknownGroup(f"cannot group by {group_by!r}")
    field_name = _GROUP_FIELDS[group_by]

    def _in_scope(rec):
        for dim, attr in (("sex", "sex"), ("age", "age_group"),
                          ("race", "race")):
            if dim != group_by and getattr(rec, attr) != "Overall":
                return False
        return True

    acc: dict = {}
    for rec in records:
        if not _in_scope(rec):
            continue
        level = getattr(rec, field_name)
        acc.setdefault(level, {}).setdefault(rec.week, []).append(rec.rate)

    series = {}
    for level, weeks in acc.items():
        series[level] = [(week, sum(vals) / len(vals))
                         for week, vals in sorted(weeks.items())]
    return series


# -- CSV emitters ------------------------------------------------------------------

def write_correlation_csv(matrix: CorrelationMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("variable",) + matrix.variables)
        for i, name in enumerate(matrix.variables):
            row = [name]
            for j in range(len(matrix.variables)):
                v = matrix.values[i, j]
                row.append("" if np.isnan(v) else f"{v:.6f}")
            writer.writerow(row)


def write_distributions_csv(summaries: Sequence[DistributionSummary],
                            path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("variable", "min", "q1", "median", "q3", "max",
                         "mean", "sd", "skewness"))
        for s in summaries:
            writer.writerow((s.variable, s.quantiles["min"], s.quantiles["q1"],
                             s.quantiles["median"], s.quantiles["q3"],
                             s.quantiles["max"], s.mean, s.sd, s.skewness))


def write_trend_csv(series: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("group", "week_ending", "rate"))
        for level in sorted(series):
            for week, rate in series[level]:
                writer.writerow((level, week.end_date.isoformat(), repr(rate)))
