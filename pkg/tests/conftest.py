"""Shared fixtures: small on-disk households for end-to-end CLI runs."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pytest

from synth import START_TS

HOUR = 3600


def _iso(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%S")


def _stamp(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d %H:%M:%S")


def write_household_fixture(
    root: Path,
    n_days: int = 20,
    missing_temp_cells: int = 3,
    malformed_rows: int = 1,
    constant_aggregate: bool = False,
    seed: int = 0,
) -> Path:
    """REFIT-style load CSV + weather CSV + price CSV + config JSON.

    Appliance1 is a shiftable washing machine used on alternating days
    (hours 13-14); Appliance2 is an always-on fridge. Load samples arrive
    half-hourly. Returns the config path.
    """
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    n_hours = n_days * 24

    wm = np.zeros(n_hours)
    fridge = np.full(n_hours, 90.0)
    for day in range(n_days):
        if day % 2 == 0:
            wm[day * 24 + 13] = 1800.0
            wm[day * 24 + 14] = 1200.0

    hod = np.arange(n_hours) % 24
    dow = (np.arange(n_hours) // 24 + 0) % 7  # fixture starts on a Monday
    weekday_home = ((hod >= 7) & (hod <= 9)) | ((hod >= 17) & (hod <= 23))
    weekend_home = (hod >= 9) & (hod <= 23)
    home = np.where(dow >= 5, weekend_home, weekday_home)
    base = 70.0 + 350.0 * home + rng.integers(0, 20, n_hours)
    aggregate = np.full(n_hours, 100.0) if constant_aggregate else base + wm + fridge

    load_path = root / "house.csv"
    with load_path.open("w") as fh:
        fh.write("Time,Unix,Aggregate,Appliance1,Appliance2\n")
        wrote_bad = 0
        for h in range(n_hours):
            ts = START_TS + h * HOUR
            for half in (0, 1800):
                fh.write(
                    f"{_stamp(ts + half)},{ts + half},{int(aggregate[h])},"
                    f"{int(wm[h])},{int(fridge[h])}\n"
                )
            if wrote_bad < malformed_rows and h == 5:
                fh.write(f"{_stamp(ts + 2700)},oops,100,0,90\n")
                wrote_bad += 1

    temp = 8.0 + 4.0 * np.sin(2 * np.pi * (hod - 14) / 24) + rng.normal(0, 0.3, n_hours)
    missing_at = set(int(i) for i in rng.choice(n_hours - 48, missing_temp_cells, replace=False) + 24)
    weather_path = root / "weather.csv"
    with weather_path.open("w") as fh:
        fh.write("time,temp,dwpt,rhum,wdir,wspd\n")
        for h in range(n_hours):
            ts = START_TS + h * HOUR
            t = "" if h in missing_at else f"{temp[h]:.2f}"
            fh.write(
                f"{_iso(ts)},{t},{temp[h] - 2.0:.2f},{70 + (h % 11):.1f},"
                f"{(120 + 3 * h) % 360:.1f},{8 + (h % 5):.1f}\n"
            )

    prices_path = root / "prices.csv"
    with prices_path.open("w") as fh:
        fh.write("time,price_per_kwh\n")
        for h in range(n_hours):
            ts = START_TS + h * HOUR
            tier = 0.10 if hod[h] < 7 else (0.30 if hod[h] < 17 else (0.40 if hod[h] < 22 else 0.15))
            fh.write(f"{_iso(ts)},{tier:.2f}\n")

    config = {
        "household_id": "house_t",
        "paths": {
            "refit": str(load_path),
            "weather": str(weather_path),
            "prices": str(prices_path),
            "workdir": str(root / "out"),
        },
        "appliances": [
            {"id": 1, "column": "Appliance1", "name": "washing machine", "shiftable": True},
            {"id": 2, "column": "Appliance2", "name": "fridge", "shiftable": False},
        ],
        "thresholds": {"usage": 0.5, "availability": 0.5},
        "labels": {"availability_watts": None, "active_watts": 20.0},
        "seed": 0,
        "background_size": 30,
        "explainer": "kernel_shap",
        "explain_eval_days": 2,
        "lime_perturbations": 600,
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config, indent=2))
    return config_path


@pytest.fixture
def cli_household(tmp_path):
    return write_household_fixture(tmp_path)


@pytest.fixture
def prepared_household(tmp_path):
    """Fixture with `prepare` already run."""
    from loadshift.cli import main

    config_path = write_household_fixture(tmp_path)
    assert main(["--config", str(config_path), "prepare"]) == 0
    return config_path
