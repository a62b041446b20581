"""MMWR epidemiological weeks (Sunday through Saturday, CDC convention).

Week 1 of a year is the week containing at least four days of January,
i.e. the week whose ending Saturday falls on or after January 4. Daily
records are binned by the Saturday that ends their week.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from functools import total_ordering

_SATURDAY = 5  # datetime.weekday() numbering, Monday=0


def _week_ending_saturday(day: dt.date) -> dt.date:
    return day + dt.timedelta(days=(_SATURDAY - day.weekday()) % 7)


def _first_saturday(year: int) -> dt.date:
    """Saturday ending MMWR week 1 of `year`."""
    return _week_ending_saturday(dt.date(year, 1, 4))


def weeks_in_year(year: int) -> int:
    """52 or 53, depending on where the year boundary falls."""
    span = (_first_saturday(year + 1) - _first_saturday(year)).days
    return span // 7


@total_ordering
@dataclass(frozen=True)
class EpiWeek:
    """One MMWR week, identified by (year, week) with its ending Saturday."""

    year: int
    week: int

    def __post_init__(self):
        if not 1 <= self.week <= weeks_in_year(self.year):
            raise ValueError(
                f"week {self.week} out of range for MMWR year {self.year}"
            )

    @property
    def end_date(self) -> dt.date:
        return _first_saturday(self.year) + dt.timedelta(weeks=self.week - 1)

    @property
    def start_date(self) -> dt.date:
        return self.end_date - dt.timedelta(days=6)

    @classmethod
    def from_date(cls, day: dt.date) -> "EpiWeek":
        """Week containing `day`."""
        sat = _week_ending_saturday(day)
        year = sat.year
        first = _first_saturday(year)
        if sat < first:
            year -= 1
            first = _first_saturday(year)
        return cls(year, (sat - first).days // 7 + 1)

    @classmethod
    def from_end_date(cls, end: dt.date) -> "EpiWeek":
        """Week ending exactly on `end`, which must be a Saturday."""
        if end.weekday() != _SATURDAY:
            raise ValueError(f"{end.isoformat()} is not a Saturday")
        return cls.from_date(end)

    def next(self) -> "EpiWeek":
        return EpiWeek.from_date(self.end_date + dt.timedelta(days=7))

    def __lt__(self, other: "EpiWeek") -> bool:
        return (self.year, self.week) < (other.year, other.week)

    def __str__(self) -> str:
        return f"{self.year}W{self.week:02d}"


def week_range(first: EpiWeek, last: EpiWeek) -> list[EpiWeek]:
    """All weeks from `first` through `last`, inclusive."""
    weeks = []
    w = first
    while w <= last:
        weeks.append(w)
        w = w.next()
    return weeks
