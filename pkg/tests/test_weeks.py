import datetime as dt

import pytest
from hypothesis import given, strategies as st

from rsv_sentinel.weeks import EpiWeek, week_range, weeks_in_year

# anchors checked by hand against the CDC week convention
ANCHORS = [
    (dt.date(2023, 12, 2), 2023, 48),
    (dt.date(2022, 1, 1), 2021, 52),   # only 1 day of 2022 in that week
    (dt.date(2021, 1, 2), 2020, 53),   # 2020 is a 53-week year
    (dt.date(2023, 1, 7), 2023, 1),
    (dt.date(2022, 1, 8), 2022, 1),
    (dt.date(2020, 1, 4), 2020, 1),
]


@pytest.mark.parametrize("end,year,week", ANCHORS)
def test_mmwr_anchors(end, year, week):
    w = EpiWeek.from_end_date(end)
    assert (w.year, w.week) == (year, week)
    assert w.end_date == end


def test_weeks_in_year():
    assert weeks_in_year(2020) == 53
    assert weeks_in_year(2021) == 52
    assert weeks_in_year(2022) == 52
    assert weeks_in_year(2023) == 52


def test_end_date_is_saturday_requirement():
    with pytest.raises(ValueError):
        EpiWeek.from_end_date(dt.date(2023, 12, 3))  # a Sunday


def test_week_bounds_validated():
    with pytest.raises(ValueError):
        EpiWeek(2021, 53)
    with pytest.raises(ValueError):
        EpiWeek(2020, 54)
    EpiWeek(2020, 53)


def test_ordering_and_next():
    a = EpiWeek(2022, 52)
    b = a.next()
    assert b == EpiWeek(2023, 1)
    assert a < b
    assert sorted([b, a]) == [a, b]


def test_week_range_inclusive():
    weeks = week_range(EpiWeek(2022, 50), EpiWeek(2023, 2))
    assert [str(w) for w in weeks] == ["2022W50", "2022W51", "2022W52",
                                       "2023W01", "2023W02"]


@given(st.dates(min_value=dt.date(2015, 1, 1), max_value=dt.date(2030, 12, 31)))
def test_from_date_window_contains_day(day):
    w = EpiWeek.from_date(day)
    assert w.start_date <= day <= w.end_date
    assert w.end_date.weekday() == 5
    assert (w.end_date - w.start_date).days == 6
    assert EpiWeek.from_end_date(w.end_date) == w
