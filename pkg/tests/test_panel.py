import datetime as dt

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rsv_sentinel.errors import ClassTooSmall, EmptyInput, EmptyPanel, NegativeRate
from rsv_sentinel.ingest import RawRateRecord
from rsv_sentinel.panel import (
    RiskClass,
    WeeklyPanelRow,
    build_panel,
    classify_rate,
    default_schema,
    derive_rsv_season,
    read_panel,
    stratified_split,
    summarize_panel,
    write_panel,
)
from rsv_sentinel.weeks import EpiWeek


def test_classify_rate_table():
    assert classify_rate(3.0) == RiskClass.LOW_RISK
    assert classify_rate(12.0) == RiskClass.ALERT
    assert classify_rate(20.0) == RiskClass.EPIDEMIC
    assert classify_rate(5.0) == RiskClass.LOW_RISK  # inclusive low band
    assert classify_rate(0.0) == RiskClass.LOW_RISK
    assert classify_rate(5.0001) == RiskClass.ALERT
    assert classify_rate(19.999) == RiskClass.ALERT


def test_classify_rate_rejects_invalid():
    with pytest.raises(NegativeRate):
        classify_rate(-0.1)
    with pytest.raises(NegativeRate):
        classify_rate(float("nan"))


@given(st.floats(min_value=0, max_value=1000), st.floats(min_value=0, max_value=1000))
def test_classify_rate_monotone(a, b):
    lo, hi = sorted([a, b])
    assert classify_rate(lo) <= classify_rate(hi)


def test_rsv_season_months():
    assert derive_rsv_season(EpiWeek.from_end_date(dt.date(2023, 12, 16)))
    assert not derive_rsv_season(EpiWeek.from_end_date(dt.date(2023, 7, 8)))
    # a Saturday falling on Nov 1: the end-date month rules
    assert derive_rsv_season(EpiWeek.from_end_date(dt.date(2025, 11, 1)))
    assert not derive_rsv_season(EpiWeek.from_end_date(dt.date(2025, 5, 3)))


WEEK = EpiWeek(2023, 48)
METEO_NAMES = ("PRECTOTCORR", "PS", "QV2M", "RH2M", "T2M", "WD10M", "WS10M")
AIR_NAMES = ("CO", "NO2", "Ozone", "PM10", "PM2.5", "SO2")


def _sources(states=("CO",), weeks=(WEEK,), drop_wval=(), drop_t2m=()):
    rates, wastewater, meteo, air = [], {}, {}, {}
    for s in states:
        for w in weeks:
            rates.append(RawRateRecord(s, w, "0-4", "Overall", "Overall", 22.0))
            rates.append(RawRateRecord(s, w, "5-17", "Overall", "Overall", 2.0))
            if (s, w) not in drop_wval:
                wastewater[(s, w)] = 4.2
            cells = {n: 1.0 for n in METEO_NAMES}
            if (s, w) in drop_t2m:
                del cells["T2M"]
            meteo[(s, w)] = cells
            air[(s, w)] = {n: 0.5 for n in AIR_NAMES}
    return rates, wastewater, meteo, air


def test_build_panel_joins_and_labels():
    rows, gaps = build_panel(*_sources(), roster=("CO",))
    assert len(rows) == 1 and not gaps
    row = rows[0]
    assert row.label == classify_rate(row.rate) == RiskClass.EPIDEMIC
    assert row.features["WVAL"] == 4.2
    assert row.features["rsv_season"] == 1.0
    assert len(row.vector(default_schema())) == 15


def test_build_panel_missing_predictor_goes_to_gaps():
    rows, gaps = build_panel(
        *_sources(states=("CO", "NM"), drop_wval={("NM", WEEK)}),
        roster=("CO", "NM"))
    assert [r.state for r in rows] == ["CO"]
    assert len(gaps) == 1
    assert gaps[0].state == "NM" and gaps[0].missing_fields == ("WVAL",)


def test_build_panel_row_order_independent():
    rates, ww, meteo, air = _sources(states=("CO", "NM", "UT"))
    a, _ = build_panel(rates, ww, meteo, air, roster=("CO", "NM", "UT"))
    b, _ = build_panel(list(reversed(rates)), ww, meteo, air,
                       roster=("CO", "NM", "UT"))
    assert a == b


def test_build_panel_empty_raises():
    rates, ww, meteo, air = _sources()
    with pytest.raises(EmptyPanel):
        build_panel(rates, {}, meteo, air, roster=("CO",))


def test_build_panel_exclude_states():
    rates, ww, meteo, air = _sources(states=("CO", "NM"))
    rows, _ = build_panel(rates, ww, meteo, air, roster=("CO", "NM"),
                          exclude_states=("CO",))
    assert {r.state for r in rows} == {"NM"}


def _panel_with_counts(counts):
    """Synthetic panel with `counts[k]` rows of class k."""
    rates = {RiskClass.LOW_RISK: 1.0, RiskClass.ALERT: 10.0,
             RiskClass.EPIDEMIC: 30.0}
    rows = []
    week = EpiWeek(2023, 1)
    for cls, n in counts.items():
        for i in range(n):
            rows.append(WeeklyPanelRow(
                f"S{i}", week, rates[cls], cls,
                {**{n_: 0.0 for n_ in default_schema().names}}))
            week = week.next()
    return rows


def test_stratified_split_worked_example():
    panel = _panel_with_counts({RiskClass.LOW_RISK: 60, RiskClass.ALERT: 19,
                                RiskClass.EPIDEMIC: 21})
    split = stratified_split(panel, 0.8, seed=1)
    train_counts = np.bincount([int(r.label) for r in split.train], minlength=3)
    test_counts = np.bincount([int(r.label) for r in split.test], minlength=3)
    assert list(train_counts) == [48, 15, 17]
    assert list(test_counts) == [12, 4, 4]


def test_stratified_split_partition_and_determinism():
    panel = _panel_with_counts({RiskClass.LOW_RISK: 37, RiskClass.ALERT: 11,
                                RiskClass.EPIDEMIC: 13})
    a = stratified_split(panel, 0.8, seed=7)
    b = stratified_split(panel, 0.8, seed=7)
    assert a.train == b.train and a.test == b.test
    merged = sorted(a.train + a.test, key=id)
    assert len(a.train) + len(a.test) == len(panel)
    assert {id(r) for r in merged} == {id(r) for r in panel}
    c = stratified_split(panel, 0.8, seed=8)
    assert c.train != a.train


def test_stratified_split_single_class():
    panel = _panel_with_counts({RiskClass.ALERT: 10})
    split = stratified_split(panel, 0.8, seed=0)
    assert {r.label for r in split.train} == {RiskClass.ALERT}
    assert {r.label for r in split.test} == {RiskClass.ALERT}
    assert len(split.train) == 8 and len(split.test) == 2


def test_stratified_split_class_too_small():
    panel = _panel_with_counts({RiskClass.LOW_RISK: 5, RiskClass.ALERT: 1})
    with pytest.raises(ClassTooSmall):
        stratified_split(panel, 0.8, seed=0)


def test_summarize_panel_moments():
    panel = _panel_with_counts({RiskClass.LOW_RISK: 3})
    for row, v in zip(panel, (1.0, 2.0, 3.0)):
        row.features.update({n: v for n in default_schema().names
                             if n != "rsv_season"})
        row.features["rsv_season"] = 0.0
    summary = summarize_panel(panel)
    assert summary["numeric"]["WVAL"]["mean"] == pytest.approx(2.0)
    assert summary["numeric"]["WVAL"]["sd"] == pytest.approx(1.0)
    assert summary["label_percent"]["LowRisk"] == 100.0
    with pytest.raises(EmptyInput):
        summarize_panel([])


def test_summarize_constant_column():
    panel = _panel_with_counts({RiskClass.LOW_RISK: 4})
    summary = summarize_panel(panel)
    assert summary["numeric"]["PS"]["sd"] == 0.0


def test_panel_round_trip(tmp_path, panel_rows):
    path = tmp_path / "panel.csv"
    write_panel(panel_rows[:50], path)
    back = read_panel(path)
    assert back == panel_rows[:50]
    for row in back:
        assert row.label == classify_rate(row.rate)


def test_panel_state_week_unique(panel_rows):
    keys = [(r.state, r.week) for r in panel_rows]
    assert len(keys) == len(set(keys))
