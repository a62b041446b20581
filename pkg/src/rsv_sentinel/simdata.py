"""Deterministic simulated snapshot of the four data sources.

Real surveillance snapshots are downloaded files and cannot be fetched
here, so integration tests and demos run on a simulator calibrated to the
published summary statistics of the combined dataset: seasonal winter
epidemics strongest in young children, a skewed wastewater signal that
tracks the hospitalization rate, temperature variables that move together,
bimodal surface pressure separating the three high-altitude states
(CO/NM/UT, which also run higher rates), and pollutant series with
occasional negative instrument errors.

Everything derives from one integer seed; the same seed reproduces the
same CSV bytes.
"""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .weeks import EpiWeek, week_range

# RSV-NET surveillance roster (13 states).
DEFAULT_ROSTER = ("CA", "CO", "CT", "GA", "MD", "MI", "MN", "NC", "NM",
                  "NY", "OR", "TN", "UT")

HIGH_ALTITUDE = ("CO", "NM", "UT")

# state -> (surface pressure kPa, mean annual T2M degC, seasonal T2M swing,
#           humidity offset %, wind base m/s, wind direction base deg,
#           precipitation scale, urban pollution factor, rate multiplier)
STATE_PROFILES = {
    "CA": (98.3, 14.5, 9.5, -2.0, 2.8, 262.0, 0.85, 1.25, 1.0),
    "CO": (79.9, 9.0, 13.5, -18.0, 3.9, 200.0, 0.55, 0.9, 3.1),
    "CT": (98.8, 11.0, 13.5, 5.0, 3.4, 222.0, 1.2, 1.05, 1.0),
    "GA": (98.5, 14.5, 11.0, 6.0, 2.9, 178.0, 1.25, 1.1, 1.0),
    "MD": (99.0, 13.0, 12.5, 3.0, 3.2, 235.0, 1.15, 1.2, 1.0),
    "MI": (98.4, 10.5, 14.0, 5.0, 4.1, 240.0, 1.0, 1.0, 1.0),
    "MN": (98.2, 10.0, 15.0, 1.0, 4.4, 205.0, 0.9, 0.95, 1.0),
    "NC": (98.7, 14.0, 11.5, 4.0, 3.0, 192.0, 1.2, 1.0, 1.0),
    "NM": (80.8, 13.5, 12.0, -26.0, 4.1, 168.0, 0.4, 0.7, 2.9),
    "NY": (98.6, 11.5, 13.0, 2.0, 3.6, 248.0, 1.1, 1.25, 1.0),
    "OR": (98.9, 12.0, 10.0, 6.0, 3.1, 150.0, 1.3, 0.9, 1.0),
    "TN": (98.35, 14.0, 12.0, 4.0, 2.9, 214.0, 1.2, 1.05, 1.0),
    "UT": (81.3, 11.0, 14.0, -22.0, 3.7, 188.0, 0.45, 1.05, 3.0),
}

# weekly rate multipliers for the demographic marginals RSV-NET reports
AGE_FACTORS = {"0-4": 1.0, "5-17": 0.10, "18-49": 0.035, "50-64": 0.08,
               "65+": 0.38, "0-17": 0.55, "18+": 0.12, "Overall": 0.24}
SEX_FACTORS = {"Male": 1.04, "Female": 0.96}
RACE_FACTORS = {"AI/AN, non-Hispanic": 2.6, "White, non-Hispanic": 0.92,
                "Black, non-Hispanic": 1.15, "A/PI, non-Hispanic": 0.55,
                "Hispanic": 1.05}

# seasonal epidemic shape
PEAK_DAY_OF_YEAR = 357      # late December
PEAK_WIDTH_DAYS = 37.8
PEAK_HEIGHT = 34.2
OFF_SEASON_BASE = 0.55
WVAL_SCALE = 2.08
WVAL_NOISE_SD = 0.46


@dataclass
class SimulationConfig:
    seed: int = 20240611
    roster: tuple = DEFAULT_ROSTER
    start: dt.date = dt.date(2022, 4, 2)   # first week-ending Saturday
    n_weeks: int = 109                     # through the end of April 2024
    nwss_missing_share: float = 0.02
    stray_rows: int = 4  # unknown-state rows per file, exercising rejects

    def weeks(self) -> list[EpiWeek]:
        first = EpiWeek.from_end_date(self.start)
        out = [first]
        for _ in range(self.n_weeks - 1):
            out.append(out[-1].next())
        return out


@dataclass
class Snapshot:
    paths: dict
    snapshot_id: str
    truth: list = field(default_factory=list)  # (state, week, rate, wval_core)


def _seasonal_bump(day: dt.date, shift_days: float = 0.0) -> float:
    doy = day.timetuple().tm_yday
    peak = PEAK_DAY_OF_YEAR + shift_days
    delta = min((doy - peak) % 365.25, (peak - doy) % 365.25)
    return math.exp(-0.5 * (delta / PEAK_WIDTH_DAYS) ** 2)


def _season_year(day: dt.date) -> int:
    # epidemic seasons straddle the new year; key them by their July start
    return day.year if day.month >= 7 else day.year - 1


def generate_snapshot(out_dir, config: SimulationConfig = SimulationConfig()
                      ) -> Snapshot:
    """Write the four CSV snapshot files; returns paths and a content id."""
    rng = np.random.default_rng(config.seed)
    weeks = config.weeks()
    os.makedirs(out_dir, exist_ok=True)

    amplitude = {}
    timing_shift = {}
    for state in config.roster:
        for season in range(2021, 2026):
            amplitude[(state, season)] = float(rng.lognormal(0.0, 0.12))
            timing_shift[(state, season)] = float(rng.normal(0.0, 8.0))

    rate_rows = []
    nwss_rows = []
    meteo_rows = []
    air_rows = []
    truth = []

    for state in config.roster:
        (ps_base, t_mid, t_amp, rh_off, ws_base, wd_base, precip_scale,
         urban, rate_mult) = STATE_PROFILES[state]

        for week in weeks:
            end = week.end_date
            # weekly weather cores drive both the environment tables and
            # the severity modulation below
            doy = end.timetuple().tm_yday
            season_cos = math.cos(2.0 * math.pi * (doy - 15.0) / 365.25)
            t2m_anomaly = float(rng.normal(0, 2.2))
            t2m_core = t_mid - t_amp * season_cos + t2m_anomaly
            qv_anomaly = float(rng.normal(0, 2.5))
            qv_core = max(0.3, 2.5 + 0.33 * t2m_core + qv_anomaly)
            winter = max(0.0, season_cos)  # 1 in mid-January, 0 in summer
            no2_anomaly = float(rng.normal(0, 3.2))
            no2_core = max(0.2, 7.2 * urban + 8.0 * winter + no2_anomaly)

            season = _season_year(end)
            bump = _seasonal_bump(end, timing_shift[(state, season)])
            amp = amplitude[(state, season)]
            # Infection intensity in the community; wastewater tracks
            # `infection` while the observed hospitalization rate also
            # carries outcome modifiers: altitude (hence the surface
            # pressure signal), plus smooth dry-air / cold-air /
            # pollution effects. The modifiers sit on top of WVAL, which
            # is what a single pruned tree underfits and an ensemble
            # recovers.
            infection = OFF_SEASON_BASE * 0.35 + PEAK_HEIGHT * amp * bump
            # anomalies, not levels: an unusually dry, cold, or polluted
            # week for that place and season worsens outcomes, with no
            # persistent state advantage for any variable to proxy
            dry_boost = min(1.20, max(0.84, 1.0 - 0.040 * qv_anomaly))
            cold_boost = min(1.16, max(0.86, 1.0 - 0.014 * t2m_anomaly))
            poll_boost = min(1.12, max(0.90, 1.0 + 0.010 * no2_anomaly))
            core = rate_mult * dry_boost * cold_boost * poll_boost * infection
            observed = core * float(rng.lognormal(0.0, 0.29))
            observed = max(0.0, observed + float(rng.normal(0.0, 0.25)))
            rate = round(observed, 1)

            # wastewater tracks the latent intensity, not the noisy rate
            wval_core = WVAL_SCALE * math.sqrt(infection)
            wval = wval_core * float(rng.lognormal(0.0, WVAL_NOISE_SD))
            wval = max(0.0, wval + float(rng.normal(0.0, 0.15)))

            truth.append((state, week, rate, core))

            # RSV-NET weekly rows: marginal series per demographic table
            def _emit(age, sex, race, value):
                rate_rows.append((state, end.isoformat(), age, sex, race,
                                  round(max(0.0, value), 1)))

            _emit("0-4", "Overall", "Overall", rate)
            overall = observed * AGE_FACTORS["Overall"]
            for age, f in AGE_FACTORS.items():
                if age in ("0-4", "Overall"):
                    continue
                _emit(age, "Overall", "Overall",
                      observed * f * float(rng.lognormal(0.0, 0.08)))
            _emit("Overall", "Overall", "Overall", overall)
            for sex, f in SEX_FACTORS.items():
                _emit("Overall", sex, "Overall",
                      overall * f * float(rng.lognormal(0.0, 0.05)))
            for race, f in RACE_FACTORS.items():
                _emit("Overall", "Overall", race,
                      overall * f * float(rng.lognormal(0.0, 0.10)))

            # NWSS: two sites per state, population-weighted back to wval
            if float(rng.random()) >= config.nwss_missing_share:
                code = sum(ord(c) for c in state)
                pop_a = 180_000 + (code % 7) * 60_000
                pop_b = 420_000 + (code % 5) * 90_000
                delta = float(rng.normal(0.0, 0.07))
                site_a = max(0.0, wval * (1.0 + delta))
                site_b = max(0.0, wval * (1.0 - delta * pop_a / pop_b))
                nwss_rows.append((state, end.isoformat(),
                                  round(site_a, 3), pop_a))
                nwss_rows.append((state, end.isoformat(),
                                  round(site_b, 3), pop_b))

            # remaining weekly cores for the daily environmental series
            rh_core = 66.5 + rh_off + 5.0 * season_cos \
                + float(rng.normal(0, 8.0))
            ws_core = max(0.4, ws_base + 0.40 * season_cos
                          + float(rng.normal(0, 0.95)))
            wd_core = wd_base + float(rng.normal(0, 34.0))
            ps_core = ps_base + float(rng.normal(0, 0.30))
            precip_core = precip_scale * float(rng.gamma(1.0, 2.2))

            co_core = max(0.02, 0.25 * urban + 0.21 * winter
                          + float(rng.normal(0, 0.07)))
            ozone_core = max(0.004, 0.0325 - 0.012 * season_cos
                             + float(rng.normal(0, 0.005)))
            pm10_core = max(2.0, 19.0 + 6.0 * (1.4 - precip_scale)
                            + float(rng.normal(0, 9.0)))
            pm25_core = max(0.8, 7.0 + 3.0 * winter
                            + float(rng.normal(0, 4.0)))
            so2_core = max(0.02, 0.50 * urban + 0.18 * winter
                           + float(rng.normal(0, 0.38)))

            for offset in range(6, -1, -1):
                day = end - dt.timedelta(days=offset)
                t2m = t2m_core + float(rng.normal(0, 1.4))
                rh = min(100.0, max(3.0, rh_core + float(rng.normal(0, 5.0))))
                qv2m = max(0.1, qv_core + float(rng.normal(0, 0.5)))
                ws10 = max(0.2, ws_core + float(rng.normal(0, 0.5)))
                ws2 = max(0.1, 0.72 * ws10 + float(rng.normal(0, 0.16)))
                wd = min(360.0, max(0.0, wd_core + float(rng.normal(0, 14.0))))
                precip = precip_core * float(rng.gamma(1.2, 1 / 1.2))
                meteo_rows.append((
                    state, day.isoformat(), round(precip, 2),
                    round(ps_core + float(rng.normal(0, 0.12)), 2),
                    round(qv2m, 2), round(rh, 1), round(t2m, 2),
                    round(t2m - 3.6 + float(rng.normal(0, 1.1)), 2),  # dew
                    round(t2m - 1.7 + float(rng.normal(0, 0.8)), 2),  # wet bulb
                    round(1.02 * t2m + 0.4 + float(rng.normal(0, 1.0)), 2),
                    round(wd, 1), round(ws10, 2), round(ws2, 2)))

                def _noisy(core_value, sd, negatives=False):
                    value = core_value + float(rng.normal(0, sd))
                    if not negatives:
                        value = max(0.0, value)
                    return value

                air_rows.append((
                    state, day.isoformat(),
                    round(_noisy(co_core, 0.035, negatives=True), 3),
                    round(_noisy(no2_core, 1.3, negatives=True), 2),
                    round(_noisy(ozone_core, 0.003), 4),
                    round(_noisy(pm10_core, 3.0), 1),
                    round(_noisy(pm25_core, 1.2), 1),
                    round(_noisy(so2_core, 0.12, negatives=True), 3)))

    for i in range(config.stray_rows):
        end = weeks[i * 9 % len(weeks)].end_date.isoformat()
        rate_rows.append(("XX", end, "0-4", "Overall", "Overall", 1.0))
        nwss_rows.append(("PR", end, 1.0, 100_000))
        meteo_rows.append(("XX", end, 0, 100, 5, 50, 10, 7, 8, 11, 180, 3, 2))
        air_rows.append(("XX", end, 0.3, 9, 0.03, 20, 8, 0.5))

    paths = {
        "rsvnet": os.path.join(out_dir, "rsvnet.csv"),
        "nwss": os.path.join(out_dir, "nwss.csv"),
        "meteo": os.path.join(out_dir, "meteo.csv"),
        "airquality": os.path.join(out_dir, "airquality.csv"),
    }
    _write_csv(paths["rsvnet"],
               ("state", "week_ending_date", "age_category", "sex", "race",
                "rate"), rate_rows)
    _write_csv(paths["nwss"],
               ("state", "week_ending_date", "wval", "population_served"),
               nwss_rows)
    _write_csv(paths["meteo"],
               ("state", "date", "PRECTOTCORR", "PS", "QV2M", "RH2M", "T2M",
                "T2MDEW", "T2MWET", "TS", "WD10M", "WS10M", "WS2M"),
               meteo_rows)
    _write_csv(paths["airquality"],
               ("state", "date", "CO", "NO2", "Ozone", "PM10", "PM25", "SO2"),
               air_rows)

    digest = hashlib.sha256()
    for kind in sorted(paths):
        with open(paths[kind], "rb") as fh:
            digest.update(fh.read())
    return Snapshot(paths=paths, snapshot_id=digest.hexdigest()[:16],
                    truth=truth)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def main(argv=None) -> int:
    """Small helper for demos: write a snapshot to a directory."""
    import argparse

    parser = argparse.ArgumentParser(
        description="generate a simulated four-source snapshot")
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int, default=SimulationConfig.seed)
    parser.add_argument("--weeks", type=int, default=SimulationConfig.n_weeks)
    args = parser.parse_args(argv)
    snapshot = generate_snapshot(
        args.out, SimulationConfig(seed=args.seed, n_weeks=args.weeks))
    print(f"snapshot {snapshot.snapshot_id} written to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
