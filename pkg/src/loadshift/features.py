"""Ground-truth labels and feature matrices for the two prediction tasks.

Availability is an hourly binary state (aggregate load above a per-household
threshold); usage is a daily binary state per device (any hour at or above an
active-watts floor). Every feature of a row is computable from strictly
earlier rows plus same-time weather, so a chronological split is leakage-free.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import DataError, InputError
from .ingest import DAY, HOUR, HourlyTable

HISTORY_DAYS = 8  # minimum history before a row becomes usable
DEFAULT_ACTIVE_WATTS = 20.0

AVAILABILITY_FEATURES = [
    "hour_sin",
    "hour_cos",
    "day_of_week",
    "is_weekend",
    "available_same_hour_yesterday",
    "available_same_hour_last_week",
    "availability_rate_7d",
    "temperature",
    "dew_point",
    "rel_humidity",
    "wind_dir",
    "wind_speed",
]

USAGE_FEATURES = [
    "day_of_week",
    "is_weekend",
    "month_sin",
    "month_cos",
    "used_yesterday",
    "use_count_7d",
    "days_since_last_use",
    "temperature_daily_mean",
    "dew_point_daily_mean",
    "rel_humidity_daily_mean",
    "wind_dir_daily_mean",
    "wind_speed_daily_mean",
]

# columns of HourlyTable.weather, reordered to match the feature lists
# (table order is dew_point, rel_humidity, temperature, wind_dir, wind_speed)
_WEATHER_COLUMN_ORDER = [2, 0, 1, 3, 4]

WEATHER_GROUP = "weather"
NON_WEATHER_GROUP = "non_weather"

DAYS_SINCE_USE_CAP = 30


@dataclass
class LabeledMatrix:
    feature_names: list[str]
    groups: list[str]  # per feature: "weather" | "non_weather"
    X: np.ndarray  # (n, M)
    y: np.ndarray  # (n,) in {0, 1}
    timestamps: np.ndarray  # (n,) int64

    def __len__(self) -> int:
        return len(self.y)

    def weather_mask(self) -> np.ndarray:
        return np.array([g == WEATHER_GROUP for g in self.groups])

    def drop_weather(self) -> "LabeledMatrix":
        keep = ~self.weather_mask()
        return LabeledMatrix(
            feature_names=[n for n, k in zip(self.feature_names, keep) if k],
            groups=[g for g, k in zip(self.groups, keep) if k],
            X=self.X[:, keep],
            y=self.y,
            timestamps=self.timestamps,
        )


def _groups_for(names: list[str]) -> list[str]:
    weather_names = set(AVAILABILITY_FEATURES[7:]) | set(USAGE_FEATURES[7:])
    return [WEATHER_GROUP if n in weather_names else NON_WEATHER_GROUP for n in names]


def day_of_week(ts: int) -> int:
    """0 = Monday .. 6 = Sunday, UTC."""
    return int((ts // DAY + 3) % 7)


def _month(ts: int) -> int:
    return datetime.fromtimestamp(int(ts), tz=timezone.utc).month


def label_availability(table: HourlyTable, absolute_threshold: float | None = None):
    """Hourly binary availability labels from the aggregate load.

    With no absolute threshold the policy is per-household:
    Q25 + 0.25 * (Q75 - Q25) of the hourly aggregate means. An hour exactly
    at the threshold counts as available. Returns ``(labels, threshold)``.
    """
    agg = table.aggregate
    if absolute_threshold is not None:
        threshold = float(absolute_threshold)
    else:
        q25, q75 = np.quantile(agg, [0.25, 0.75])
        if q25 == q75:
            raise DataError(
                "aggregate load quantiles are degenerate (Q25 == Q75); "
                "set an explicit absolute availability threshold"
            )
        threshold = float(q25 + 0.25 * (q75 - q25))
    labels = (agg >= threshold).astype(np.int64)
    return labels, threshold


def full_day_starts(table: HourlyTable) -> np.ndarray:
    """Midnight timestamps of days fully covered by the table (24 rows)."""
    first_day = -(-int(table.timestamps[0]) // DAY)  # ceil to next midnight
    last_end = (int(table.timestamps[-1]) + HOUR) // DAY  # exclusive
    days = np.arange(first_day, last_end, dtype=np.int64) * DAY
    return days


def label_usage(table: HourlyTable, device: int, active_watts: float = DEFAULT_ACTIVE_WATTS):
    """Daily binary usage labels for one device.

    A day is labeled 1 iff any of its hours has device load >= active_watts.
    Days not fully covered by the table are excluded. Returns
    ``(day_start_timestamps, labels)``.
    """
    if device < 0 or device >= table.device_loads.shape[1]:
        raise InputError(f"device index {device} out of range")
    if active_watts <= 0:
        raise InputError("active_watts must be > 0")
    days = full_day_starts(table)
    loads = table.device_loads[:, device]
    t0 = int(table.timestamps[0])
    labels = np.zeros(len(days), dtype=np.int64)
    for i, d in enumerate(days):
        a = (int(d) - t0) // HOUR
        labels[i] = int(np.any(loads[a : a + 24] >= active_watts))
    return days, labels


def _row_index(table: HourlyTable, ts: int) -> int:
    idx = (ts - int(table.timestamps[0])) // HOUR
    if idx < 0 or idx >= len(table) or table.timestamps[idx] != ts:
        raise DataError(f"timestamp {ts} not covered by the hourly table")
    return int(idx)


def availability_features(table: HourlyTable, labels: np.ndarray, target_hour_ts: int) -> np.ndarray:
    """Feature vector for the hourly availability task at one target hour.

    Calendar encodings and same-hour lag labels come from strictly earlier
    rows; the five weather features are read at the target hour itself.
    """
    t = _row_index(table, int(target_hour_ts))
    if t < HISTORY_DAYS * 24:
        raise DataError(f"need {HISTORY_DAYS} days of history before the target hour")
    ts = int(table.timestamps[t])
    hour = (ts // HOUR) % 24
    angle = 2.0 * math.pi * hour / 24.0
    dow = day_of_week(ts)
    rate = float(np.mean([labels[t - 24 * i] for i in range(1, 8)]))
    vec = [
        math.sin(angle),
        math.cos(angle),
        float(dow),
        1.0 if dow >= 5 else 0.0,
        float(labels[t - 24]),
        float(labels[t - 168]),
        rate,
    ]
    vec.extend(float(table.weather[t, j]) for j in _WEATHER_COLUMN_ORDER)
    return np.asarray(vec)


def availability_matrix(table: HourlyTable, labels: np.ndarray) -> LabeledMatrix:
    """Availability rows for every hour with enough history, in time order."""
    start = HISTORY_DAYS * 24
    if len(table) <= start:
        raise DataError("table too short to build availability features")
    idx = np.arange(start, len(table))
    ts = table.timestamps[idx]
    hours = (ts // HOUR) % 24
    angle = 2.0 * np.pi * hours / 24.0
    dows = (ts // DAY + 3) % 7
    lag1 = labels[idx - 24].astype(float)
    lag7 = labels[idx - 168].astype(float)
    rate = np.mean([labels[idx - 24 * i] for i in range(1, 8)], axis=0)
    X = np.column_stack(
        [
            np.sin(angle),
            np.cos(angle),
            dows.astype(float),
            (dows >= 5).astype(float),
            lag1,
            lag7,
            rate,
        ]
        + [table.weather[idx, j] for j in _WEATHER_COLUMN_ORDER]
    )
    return LabeledMatrix(
        feature_names=list(AVAILABILITY_FEATURES),
        groups=_groups_for(AVAILABILITY_FEATURES),
        X=X,
        y=labels[idx].astype(np.int64),
        timestamps=ts.astype(np.int64),
    )


def _daily_weather_means(table: HourlyTable, day_start: int) -> list[float]:
    a = _row_index(table, int(day_start))
    block = table.weather[a : a + 24]
    return [float(np.mean(block[:, j])) for j in _WEATHER_COLUMN_ORDER]


def usage_features(
    table: HourlyTable,
    day_starts: np.ndarray,
    usage_labels: np.ndarray,
    target_day_ts: int,
) -> np.ndarray:
    """Feature vector for the daily usage task at one target day.

    History features look only at days before the target; weather features
    are the target day's daily means (recorded actuals standing in for a
    forecast).
    """
    pos = np.searchsorted(day_starts, int(target_day_ts))
    if pos >= len(day_starts) or day_starts[pos] != int(target_day_ts):
        raise DataError(f"day {target_day_ts} is not a fully covered table day")
    if pos < HISTORY_DAYS:
        raise DataError(f"need {HISTORY_DAYS} days of history before the target day")
    ts = int(target_day_ts)
    dow = day_of_week(ts)
    month = _month(ts)
    mangle = 2.0 * math.pi * (month - 1) / 12.0
    used_yesterday = float(usage_labels[pos - 1])
    count7 = float(np.sum(usage_labels[pos - 7 : pos]))
    days_since = DAYS_SINCE_USE_CAP
    for back in range(1, min(pos, DAYS_SINCE_USE_CAP) + 1):
        if usage_labels[pos - back]:
            days_since = back
            break
    vec = [
        float(dow),
        1.0 if dow >= 5 else 0.0,
        math.sin(mangle),
        math.cos(mangle),
        used_yesterday,
        count7,
        float(days_since),
    ]
    vec.extend(_daily_weather_means(table, ts))
    return np.asarray(vec)


def usage_matrix(
    table: HourlyTable, device: int, active_watts: float = DEFAULT_ACTIVE_WATTS
) -> LabeledMatrix:
    """Usage rows for every fully covered day with enough history."""
    day_starts, labels = label_usage(table, device, active_watts)
    if len(day_starts) <= HISTORY_DAYS:
        raise DataError("table too short to build usage features")
    rows, ys, ts_out = [], [], []
    for pos in range(HISTORY_DAYS, len(day_starts)):
        d = int(day_starts[pos])
        rows.append(usage_features(table, day_starts, labels, d))
        ys.append(int(labels[pos]))
        ts_out.append(d)
    return LabeledMatrix(
        feature_names=list(USAGE_FEATURES),
        groups=_groups_for(USAGE_FEATURES),
        X=np.asarray(rows),
        y=np.asarray(ys, dtype=np.int64),
        timestamps=np.asarray(ts_out, dtype=np.int64),
    )


def chronological_split(matrix: LabeledMatrix, train_fraction: float):
    """First ceil(fraction*N) rows train, the rest test; no shuffling."""
    if not 0.0 < train_fraction < 1.0:
        raise InputError("train_fraction must be in (0, 1)")
    n = len(matrix)
    n_train = math.ceil(train_fraction * n - 1e-9)
    if n_train < 1 or n_train >= n:
        raise DataError(f"split of {n} rows at fraction {train_fraction} leaves an empty side")

    def take(sl):
        return LabeledMatrix(
            feature_names=list(matrix.feature_names),
            groups=list(matrix.groups),
            X=matrix.X[sl],
            y=matrix.y[sl],
            timestamps=matrix.timestamps[sl],
        )

    return take(slice(0, n_train)), take(slice(n_train, n))


def matrix_to_csv(matrix: LabeledMatrix, path) -> None:
    """Export for offline inspection: feature columns + label + timestamp."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(matrix.feature_names + ["label", "timestamp"])
        for i in range(len(matrix)):
            row = [repr(float(v)) for v in matrix.X[i]]
            row.append(int(matrix.y[i]))
            row.append(int(matrix.timestamps[i]))
            writer.writerow(row)
