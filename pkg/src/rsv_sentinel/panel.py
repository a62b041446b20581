"""Modeling panel for the 0-4 age group.

Joins the normalized sources into weekly state-level rows, derives the
3-level risk label and the season flag, and produces the stratified
train/test split.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import json
import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ClassTooSmall,
    EmptyInput,
    EmptyPanel,
    NegativeRate,
)
from .weeks import EpiWeek

ALERT_THRESHOLD = 5.0     # rate above this is at least Alert
EPIDEMIC_THRESHOLD = 20.0  # rate at or above this is Epidemic

SEASON_MONTHS = {11, 12, 1, 2, 3, 4}  # November through April


class RiskClass(enum.IntEnum):
    """Ordered risk label; higher value means more severe."""

    LOW_RISK = 0
    ALERT = 1
    EPIDEMIC = 2

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "RiskClass":
        for member, text in _LABELS.items():
            if text == label:
                return member
        raise ValueError(f"unknown risk class {label!r}")


_LABELS = {RiskClass.LOW_RISK: "LowRisk", RiskClass.ALERT: "Alert",
           RiskClass.EPIDEMIC: "Epidemic"}

N_CLASSES = len(RiskClass)


def classify_rate(rate: float) -> RiskClass:
    """Map a weekly per-100k rate to its risk class.

    Boundaries: rate <= 5 is LowRisk (the low band is inclusive), rate >= 20
    is Epidemic, anything between is Alert.
    """
    if not math.isfinite(rate) or rate < 0:
        raise NegativeRate(f"invalid rate {rate!r}")
    if rate <= ALERT_THRESHOLD:
        return RiskClass.LOW_RISK
    if rate < EPIDEMIC_THRESHOLD:
        return RiskClass.ALERT
    return RiskClass.EPIDEMIC


def derive_rsv_season(week: EpiWeek) -> bool:
    """True when the week's ending Saturday falls in November through April."""
    return week.end_date.month in SEASON_MONTHS


# -- feature schema -----------------------------------------------------------

@dataclass(frozen=True)
class FeatureSchema:
    """Ordered predictor list persisted with every trained model."""

    names: tuple
    units: dict
    categorical_mask: dict

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def to_dict(self) -> dict:
        return {"names": list(self.names),
                "units": dict(self.units),
                "categorical_mask": dict(self.categorical_mask)}

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureSchema":
        return cls(tuple(data["names"]), dict(data["units"]),
                   dict(data["categorical_mask"]))


FEATURE_UNITS = {
    "WVAL": "unitless", "PRECTOTCORR": "mm/day", "PS": "kPa",
    "QV2M": "g/kg", "RH2M": "%", "T2M": "degC", "WD10M": "degrees",
    "WS10M": "m/s", "CO": "ppm", "NO2": "ppm", "Ozone": "ppm",
    "PM10": "ug/m3", "PM2.5": "ug/m3", "SO2": "ppb", "rsv_season": "0/1",
}


def default_schema() -> FeatureSchema:
    """The 15 modeling predictors, in panel column order."""
    names = tuple(FEATURE_UNITS)
    return FeatureSchema(names, dict(FEATURE_UNITS),
                         {name: name == "rsv_season" for name in names})


# -- panel rows -----------------------------------------------------------------

@dataclass(frozen=True)
class WeeklyPanelRow:
    """One state-week observation with response, label, and all predictors."""

    state: str
    week: EpiWeek
    rate: float
    label: RiskClass
    features: dict  # feature name -> float (rsv_season stored as 0.0/1.0)

    def vector(self, schema: FeatureSchema) -> list[float]:
        return [self.features[name] for name in schema.names]


@dataclass(frozen=True)
class CompletenessGap:
    state: str
    week: EpiWeek
    missing_fields: tuple


def build_panel(rates, wastewater: dict, meteo_weekly: dict, air_weekly: dict,
                roster: Sequence[str], age_group: str = "0-4",
                sex: str = "Overall", race: str = "Overall",
                exclude_states: Sequence[str] = ()) -> tuple:
    """Inner-join the sources on (state, week) for the target age group.

    Returns (rows, gaps): rows sorted by (state, week); gaps lists
    state-weeks that had a response but lacked at least one predictor.
    Rows without a response are simply out of scope of the join.
    """
    roster_set = set(roster) - set(exclude_states)
    responses = {}
    for rec in rates:
        if (rec.state in roster_set and rec.age_group == age_group
                and rec.sex == sex and rec.race == race):
            responses[(rec.state, rec.week)] = rec.rate

    meteo_names = ("PRECTOTCORR", "PS", "QV2M", "RH2M", "T2M", "WD10M", "WS10M")
    air_names = ("CO", "NO2", "Ozone", "PM10", "PM2.5", "SO2")

    rows, gaps = [], []
    for (state, week), rate in sorted(responses.items()):
        features = {}
        missing = []
        wval = wastewater.get((state, week))
        if wval is None:
            missing.append("WVAL")
        else:
            features["WVAL"] = wval
        meteo = meteo_weekly.get((state, week), {})
        for name in meteo_names:
            if name in meteo:
                features[name] = meteo[name]
            else:
                missing.append(name)
        air = air_weekly.get((state, week), {})
        for name in air_names:
            if name in air:
                features[name] = air[name]
            else:
                missing.append(name)
        if missing:
            gaps.append(CompletenessGap(state, week, tuple(missing)))
            continue
        features["rsv_season"] = 1.0 if derive_rsv_season(week) else 0.0
        rows.append(WeeklyPanelRow(state, week, rate, classify_rate(rate),
                                   features))
    if not rows:
        raise EmptyPanel("join produced no rows")
    return rows, gaps


def panel_to_xy(rows: Sequence[WeeklyPanelRow],
                schema: Optional[FeatureSchema] = None):
    """Materialize the panel as (X, y) numpy arrays in schema order."""
    schema = schema or default_schema()
    X = np.array([row.vector(schema) for row in rows], dtype=np.float64)
    y = np.array([int(row.label) for row in rows], dtype=np.int64)
    return X, y


# -- stratified split ----------------------------------------------------------

@dataclass
class SplitPair:
    train: list
    test: list
    seed: int
    train_fraction: float


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(panel: Sequence[WeeklyPanelRow], train_fraction: float,
                     seed: int) -> SplitPair:
    """Seeded split preserving class proportions within one sample per class.

    Per class, round(train_fraction * n_class) rows are drawn without
    replacement into train; the remainder goes to test.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    by_class: dict = {}
    for i, row in enumerate(panel):
        by_class.setdefault(row.label, []).append(i)
    for cls, idx in by_class.items():
        if len(idx) < 2:
            raise ClassTooSmall(f"class {cls.label} has {len(idx)} row(s)")

    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for cls in sorted(by_class):
        idx = np.array(by_class[cls])
        rng.shuffle(idx)
        n_train = _round_half_up(train_fraction * len(idx))
        train_idx.extend(idx[:n_train].tolist())
        test_idx.extend(idx[n_train:].tolist())
    train_idx.sort()
    test_idx.sort()
    return SplitPair([panel[i] for i in train_idx],
                     [panel[i] for i in test_idx], seed, train_fraction)


# -- summaries -------------------------------------------------------------------

def summarize_panel(rows: Sequence[WeeklyPanelRow]) -> dict:
    """Table-style summary: level percentages for categoricals, mean and
    sample SD (n-1) for numerics."""
    if not rows:
        raise EmptyInput("empty panel")
    n = len(rows)
    label_counts = {cls.label: 0 for cls in RiskClass}
    season_counts = {"Yes": 0, "No": 0}
    for row in rows:
        label_counts[row.label.label] += 1
        season_counts["Yes" if row.features["rsv_season"] else "No"] += 1

    numeric = {}
    schema = default_schema()
    for name in schema.names:
        if name == "rsv_season":
            continue
        values = np.array([row.features[name] for row in rows])
        numeric[name] = {"mean": float(values.mean()),
                         "sd": float(values.std(ddof=1)) if n > 1 else 0.0}
    return {
        "n": n,
        "label_percent": {k: 100.0 * v / n for k, v in label_counts.items()},
        "season_percent": {k: 100.0 * v / n for k, v in season_counts.items()},
        "numeric": numeric,
    }


# -- persistence ------------------------------------------------------------------

PANEL_COLUMNS = ("state", "week_ending", "rate", "label",
                 "WVAL", "PRECTOTCORR", "PS", "QV2M", "RH2M", "T2M", "WD10M",
                 "WS10M", "CO", "NO2", "Ozone", "PM10", "PM2.5", "SO2",
                 "rsv_season")


def write_panel(rows: Sequence[WeeklyPanelRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PANEL_COLUMNS)
        for row in rows:
            record = [row.state, row.week.end_date.isoformat(),
                      repr(row.rate), row.label.label]
            record += [repr(row.features[c]) for c in PANEL_COLUMNS[4:-1]]
            record.append(int(row.features["rsv_season"]))
            writer.writerow(record)


def read_panel(path) -> list[WeeklyPanelRow]:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for record in csv.DictReader(fh):
            week = EpiWeek.from_end_date(
                dt.date.fromisoformat(record["week_ending"]))
            features = {c: float(record[c]) for c in PANEL_COLUMNS[4:]}
            rate = float(record["rate"])
            rows.append(WeeklyPanelRow(record["state"], week, rate,
                                       classify_rate(rate), features))
    return rows


def write_completeness(gaps: Sequence[CompletenessGap], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("state", "week_ending", "missing_fields"))
        for gap in gaps:
            writer.writerow((gap.state, gap.week.end_date.isoformat(),
                             ";".join(gap.missing_fields)))


def write_split(split: SplitPair, out_dir) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    train_path = os.path.join(out_dir, "train.csv")
    test_path = os.path.join(out_dir, "test.csv")
    manifest_path = os.path.join(out_dir, "split_manifest.json")
    write_panel(split.train, train_path)
    write_panel(split.test, test_path)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump({"seed": split.seed, "train_fraction": split.train_fraction,
                   "n_train": len(split.train), "n_test": len(split.test)},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"train": train_path, "test": test_path, "manifest": manifest_path}
