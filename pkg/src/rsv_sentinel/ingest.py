"""Ingestion of the four source snapshots.

Parses CSV snapshots (RSV-NET rates, NWSS wastewater, daily meteorology,
daily air quality), normalizes units and invalid values, and aggregates
daily series to MMWR weeks. Every input row is either accepted or recorded
in a rejects report; nothing is silently dropped.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import (
    InsufficientCoverage,
    MissingColumn,
    NoData,
    NonFinite,
    RejectRateExceeded,
)
from .weeks import EpiWeek

METEO_VARS = (
    "PRECTOTCORR", "PS", "QV2M", "RH2M", "T2M",
    "T2MDEW", "T2MWET", "TS", "WD10M", "WS10M", "WS2M",
)
# CSV column -> canonical variable name
AIR_VARS = {"CO": "CO", "NO2": "NO2", "Ozone": "Ozone",
            "PM10": "PM10", "PM25": "PM2.5", "SO2": "SO2"}

REQUIRED_COLUMNS = {
    "rsvnet": ("state", "week_ending_date", "age_category", "sex", "race", "rate"),
    "nwss": ("state", "week_ending_date", "wval"),
    "meteo": ("state", "date") + METEO_VARS,
    "airquality": ("state", "date") + tuple(AIR_VARS),
}


@dataclass(frozen=True)
class RawRateRecord:
    state: str
    week: EpiWeek
    age_group: str
    sex: str
    race: str
    rate: float


@dataclass(frozen=True)
class RawWastewaterRecord:
    state: str
    week: EpiWeek
    wval: float
    coverage_population: Optional[int] = None


@dataclass(frozen=True)
class RawMeteoDaily:
    state: str
    date: dt.date
    values: dict  # variable name -> float or None when the cell is blank


@dataclass(frozen=True)
class RawAirQualityDaily:
    state: str
    date: dt.date
    values: dict  # canonical pollutant name -> float or None


@dataclass(frozen=True)
class Reject:
    file: str
    line: int
    reason: str


@dataclass
class ParseResult:
    records: list
    rejects: list[Reject]
    total_rows: int

    @property
    def reject_rate(self) -> float:
        return len(self.rejects) / self.total_rows if self.total_rows else 0.0


def impute_nonnegative(x: float) -> float:
    """Clamp instrument-error negatives to zero; NaN/inf is an error."""
    if not math.isfinite(x):
        raise NonFinite(f"cannot impute non-finite value {x!r}")
    return x if x > 0.0 else 0.0


def _parse_float(text: str) -> Optional[float]:
    """Blank cells become None; anything unparseable or non-finite raises."""
    text = text.strip()
    if not text:
        return None
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {text!r}")
    return value


def _parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text.strip())


def parse_source(kind: str, stream, roster: Sequence[str],
                 source_name: str = "<stream>") -> ParseResult:
    """Parse one snapshot file into raw records of the matching type.

    `stream` is a text or binary file object (UTF-8 CSV with a header row).
    Rows with unparseable required fields or states outside `roster` go to
    the rejects list; a missing required column aborts with MissingColumn.
    Row order is preserved.
    """
    if kind not in REQUIRED_COLUMNS:
        raise ValueError(f"unknown source kind {kind!r}")
    if isinstance(stream, (bytes, bytearray)):
        stream = io.StringIO(stream.decode("utf-8"))
    elif hasattr(stream, "read") and isinstance(stream.read(0), bytes):
        stream = io.TextIOWrapper(stream, encoding="utf-8")

    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    missing = [c for c in REQUIRED_COLUMNS[kind] if c not in header]
    if missing:
        raise MissingColumn(f"{source_name}: missing column(s) {', '.join(missing)}")

    roster_set = set(roster)
    records: list = []
    rejects: list[Reject] = []
    total = 0
    for row in reader:
        total += 1
        line = reader.line_num
        state = (row["state"] or "").strip()
        if state not in roster_set:
            rejects.append(Reject(source_name, line, f"unknown state {state!r}"))
            continue
        try:
            records.append(_ROW_PARSERS[kind](state, row))
        except (ValueError, KeyError, TypeError) as exc:
            rejects.append(Reject(source_name, line, str(exc)))
    return ParseResult(records, rejects, total)


def _parse_rsvnet_row(state: str, row: dict) -> RawRateRecord:
    end = _parse_date(row["week_ending_date"])
    rate = _parse_float(row["rate"])
    if rate is None:
        raise ValueError("missing rate")
    if rate < 0:
        raise ValueError(f"negative rate {rate}")
    return RawRateRecord(
        state=state,
        week=EpiWeek.from_end_date(end),
        age_group=row["age_category"].strip(),
        sex=row["sex"].strip(),
        race=row["race"].strip(),
        rate=rate,
    )


def _parse_nwss_row(state: str, row: dict) -> RawWastewaterRecord:
    end = _parse_date(row["week_ending_date"])
    wval = _parse_float(row["wval"])
    if wval is None:
        raise ValueError("missing wval")
    if wval < 0:
        raise ValueError(f"negative wval {wval}")
    pop_text = (row.get("population_served") or "").strip()
    population = None
    if pop_text:
        population = int(pop_text)
        if population <= 0:
            raise ValueError(f"non-positive population_served {population}")
    return RawWastewaterRecord(state, EpiWeek.from_end_date(end), wval, population)


def _parse_meteo_row(state: str, row: dict) -> RawMeteoDaily:
    day = _parse_date(row["date"])
    values = {var: _parse_float(row[var]) for var in METEO_VARS}
    _check_range(values, "RH2M", 0.0, 100.0)
    _check_range(values, "WD10M", 0.0, 360.0)
    for var in ("PRECTOTCORR", "WS10M", "WS2M"):
        _check_range(values, var, 0.0, None)
    return RawMeteoDaily(state, day, values)


def _parse_airquality_row(state: str, row: dict) -> RawAirQualityDaily:
    day = _parse_date(row["date"])
    # Negative concentrations are retained here; imputation is a separate op.
    values = {canon: _parse_float(row[col]) for col, canon in AIR_VARS.items()}
    return RawAirQualityDaily(state, day, values)


def _check_range(values: dict, var: str, lo, hi) -> None:
    v = values[var]
    if v is None:
        return
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        raise ValueError(f"{var}={v} out of range")


_ROW_PARSERS = {
    "rsvnet": _parse_rsvnet_row,
    "nwss": _parse_nwss_row,
    "meteo": _parse_meteo_row,
    "airquality": _parse_airquality_row,
}


# -- weekly aggregation -------------------------------------------------------

def weekly_mean(daily: Iterable[tuple[dt.date, Optional[float]]],
                week: EpiWeek, min_days: int = 4) -> float:
    """Arithmetic mean of non-missing daily values inside the week's window.

    Raises InsufficientCoverage when fewer than `min_days` values fall in
    the week; the caller turns that into a missing weekly cell.
    """
    lo, hi = week.start_date, week.end_date
    values = [v for d, v in daily
              if lo <= d <= hi and v is not None and math.isfinite(v)]
    if len(values) < min_days:
        raise InsufficientCoverage(
            f"{week}: {len(values)} values, need {min_days}")
    return sum(values) / len(values)


def aggregate_wastewater(records: Sequence[RawWastewaterRecord],
                         state: str, week: EpiWeek) -> float:
    """State-week WVAL: population-weighted mean of site values.

    Weights apply only when every matching record carries a
    coverage_population; otherwise the plain mean is used.
    """
    matches = [r for r in records if r.state == state and r.week == week]
    if not matches:
        raise NoData(f"no wastewater records for {state} {week}")
    if all(r.coverage_population is not None for r in matches):
        total = sum(r.coverage_population for r in matches)
        return sum(r.wval * r.coverage_population for r in matches) / total
    return sum(r.wval for r in matches) / len(matches)


def _daily_state_means(records, variables, impute: bool = False) -> dict:
    """Average multiple monitoring points per (state, day) before weekly
    aggregation; with `impute`, clamp each negative measurement to zero
    first (instrument-error convention)."""
    acc: dict = {}
    for rec in records:
        sums, counts = acc.setdefault((rec.state, rec.date),
                                      ({v: 0.0 for v in variables},
                                       {v: 0 for v in variables}))
        for var in variables:
            val = rec.values.get(var)
            if val is not None:
                sums[var] += impute_nonnegative(val) if impute else val
                counts[var] += 1
    out = {}
    for key, (sums, counts) in acc.items():
        out[key] = {v: (sums[v] / counts[v] if counts[v] else None)
                    for v in variables}
    return out


def weekly_table(records, variables, min_days: int = 4,
                 impute: bool = False) -> dict:
    """Aggregate daily records to {(state, week): {var: value}}.

    Cells that fail the coverage floor are simply absent from the inner
    dict. With `impute` set, negative measurements are clamped to zero
    before any averaging (air quality convention).
    """
    daily = _daily_state_means(records, variables, impute)
    by_state: dict = {}
    for (state, day), values in daily.items():
        week = EpiWeek.from_date(day)
        for var, val in values.items():
            by_state.setdefault((state, week), {}).setdefault(var, []).append(
                (day, val))
    table: dict = {}
    for (state, week), per_var in sorted(by_state.items(),
                                         key=lambda kv: (kv[0][0], kv[0][1])):
        cells = {}
        for var in variables:
            try:
                cells[var] = weekly_mean(per_var.get(var, []), week, min_days)
            except InsufficientCoverage:
                continue
        table[(state, week)] = cells
    return table


def wastewater_weekly(records: Sequence[RawWastewaterRecord]) -> dict:
    """{(state, week): aggregated WVAL} over all keys present in `records`."""
    keys = sorted({(r.state, r.week) for r in records})
    return {key: aggregate_wastewater(records, *key) for key in keys}


# -- snapshot orchestration ---------------------------------------------------

@dataclass
class IngestResult:
    rates: list[RawRateRecord]
    wastewater: dict           # (state, week) -> wval
    meteo_weekly: dict         # (state, week) -> {var: value}
    air_weekly: dict           # (state, week) -> {var: value}
    rejects: list[Reject] = field(default_factory=list)


def ingest_snapshot(paths: dict, roster: Sequence[str], min_days: int = 4,
                    max_reject_rate: float = 0.05) -> IngestResult:
    """Parse and aggregate all four snapshot files.

    `paths` maps the source kind to a CSV path. A file whose reject share
    exceeds `max_reject_rate` aborts the run.
    """
    parsed = {}
    rejects: list[Reject] = []
    for kind in ("rsvnet", "nwss", "meteo", "airquality"):
        path = paths[kind]
        with open(path, encoding="utf-8", newline="") as fh:
            result = parse_source(kind, fh, roster, os.path.basename(str(path)))
        if result.total_rows and result.reject_rate > max_reject_rate:
            raise RejectRateExceeded(
                f"{path}: {len(result.rejects)}/{result.total_rows} rows rejected "
                f"(ceiling {max_reject_rate:.0%})")
        parsed[kind] = result.records
        rejects.extend(result.rejects)

    return IngestResult(
        rates=parsed["rsvnet"],
        wastewater=wastewater_weekly(parsed["nwss"]),
        meteo_weekly=weekly_table(parsed["meteo"], METEO_VARS, min_days),
        air_weekly=weekly_table(parsed["airquality"], tuple(AIR_VARS.values()),
                                min_days, impute=True),
        rejects=rejects,
    )


# -- persistence of normalized tables ----------------------------------------

def serialize_records(kind: str, records) -> str:
    """Re-serialize parsed records to canonical CSV (lossless round trip)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if kind == "rsvnet":
        writer.writerow(REQUIRED_COLUMNS["rsvnet"])
        for r in records:
            writer.writerow([r.state, r.week.end_date.isoformat(),
                             r.age_group, r.sex, r.race, repr(r.rate)])
    elif kind == "nwss":
        writer.writerow(REQUIRED_COLUMNS["nwss"] + ("population_served",))
        for r in records:
            writer.writerow([r.state, r.week.end_date.isoformat(), repr(r.wval),
                             "" if r.coverage_population is None
                             else r.coverage_population])
    elif kind == "meteo":
        writer.writerow(REQUIRED_COLUMNS["meteo"])
        for r in records:
            writer.writerow([r.state, r.date.isoformat()] +
                            [_cell(r.values[v]) for v in METEO_VARS])
    elif kind == "airquality":
        writer.writerow(REQUIRED_COLUMNS["airquality"])
        for r in records:
            writer.writerow([r.state, r.date.isoformat()] +
                            [_cell(r.values[c]) for c in AIR_VARS.values()])
    else:
        raise ValueError(f"unknown source kind {kind!r}")
    return out.getvalue()


def _cell(value: Optional[float]) -> str:
    return "" if value is None else repr(value)


def write_normalized(result: IngestResult, out_dir) -> dict:
    """Write the normalized per-source tables plus the rejects report.

    Returns {name: path} for everything written.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    def _write(name, header, rows):
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        paths[name] = path
        return path

    _write("rates_weekly.csv",
           ("state", "week_ending", "age_category", "sex", "race", "rate"),
           [(r.state, r.week.end_date.isoformat(), r.age_group, r.sex, r.race,
             repr(r.rate)) for r in result.rates])
    _write("wastewater_weekly.csv", ("state", "week_ending", "wval"),
           [(s, w.end_date.isoformat(), repr(v))
            for (s, w), v in sorted(result.wastewater.items())])
    _write("meteo_weekly.csv", ("state", "week_ending") + METEO_VARS,
           [[s, w.end_date.isoformat()] +
            [_cell(cells.get(v)) for v in METEO_VARS]
            for (s, w), cells in sorted(result.meteo_weekly.items())])
    air_cols = tuple(AIR_VARS.values())
    _write("airquality_weekly.csv", ("state", "week_ending") + air_cols,
           [[s, w.end_date.isoformat()] +
            [_cell(cells.get(v)) for v in air_cols]
            for (s, w), cells in sorted(result.air_weekly.items())])
    _write("rejects.csv", ("file", "line", "reason"),
           [(r.file, r.line, r.reason) for r in result.rejects])
    return paths


def read_normalized(out_dir) -> IngestResult:
    """Reload the tables written by `write_normalized`."""
    def _rows(name):
        with open(os.path.join(out_dir, name), encoding="utf-8", newline="") as fh:
            yield from csv.DictReader(fh)

    rates = [RawRateRecord(row["state"],
                           EpiWeek.from_end_date(_parse_date(row["week_ending"])),
                           row["age_category"], row["sex"], row["race"],
                           float(row["rate"]))
             for row in _rows("rates_weekly.csv")]
    wastewater = {(row["state"],
                   EpiWeek.from_end_date(_parse_date(row["week_ending"]))):
                  float(row["wval"]) for row in _rows("wastewater_weekly.csv")}

    def _table(name, variables):
        table = {}
        for row in _rows(name):
            key = (row["state"],
                   EpiWeek.from_end_date(_parse_date(row["week_ending"])))
            table[key] = {v: float(row[v]) for v in variables if row[v] != ""}
        return table

    meteo = _table("meteo_weekly.csv", METEO_VARS)
    air = _table("airquality_weekly.csv", tuple(AIR_VARS.values()))
    rejects = [Reject(row["file"], int(row["line"]), row["reason"])
               for row in _rows("rejects.csv")]
    return IngestResult(rates, wastewater, meteo, air, rejects)
