"""Parse household load, weather, and price files into one hourly table.

All timestamps are seconds since epoch, UTC. Loads are mean watts per
hour. Missing weather cells survive until ``knn_impute`` fills them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import DataError, InputError

WEATHER_FEATURES = ("dew_point", "rel_humidity", "temperature", "wind_dir", "wind_speed")

# weather CSV column -> internal feature name
_WEATHER_CSV_COLUMNS = {
    "dwpt": "dew_point",
    "rhum": "rel_humidity",
    "temp": "temperature",
    "wdir": "wind_dir",
    "wspd": "wind_speed",
}

HOUR = 3600
DAY = 86400


@dataclass
class DeviceLoadSeries:
    device_id: int
    device_name: str
    timestamps: np.ndarray  # int64 epoch seconds, strictly increasing
    loads: np.ndarray  # watts, >= 0


@dataclass
class WeatherSeries:
    timestamps: np.ndarray  # int64, hour-aligned, strictly increasing
    values: np.ndarray  # (n, 5) in WEATHER_FEATURES order, NaN = missing


@dataclass
class PriceSeries:
    timestamps: np.ndarray  # int64, hour-aligned, strictly increasing
    prices: np.ndarray  # currency per kWh, finite, > 0


@dataclass
class ParseReport:
    dropped: int = 0  # rows with unparseable timestamp or load values
    dropped_unordered: int = 0  # rows whose timestamp did not increase


@dataclass
class HourlyTable:
    household_id: str
    timestamps: np.ndarray  # int64, hour-aligned, consecutive, no gaps
    device_ids: list[int]
    device_names: list[str]
    device_loads: np.ndarray  # (n, n_devices) mean watts
    aggregate: np.ndarray  # (n,) mean watts
    weather: np.ndarray  # (n, 5), NaN = missing
    price: np.ndarray  # (n,), NaN where no price known
    imputation_flags: np.ndarray  # (n, 5) bool, True where the cell was/needs imputing

    def __len__(self) -> int:
        return len(self.timestamps)

    def hour_of_day(self) -> np.ndarray:
        return (self.timestamps // HOUR) % 24

    def validate(self) -> None:
        n = len(self.timestamps)
        if n == 0:
            raise DataError("hourly table is empty")
        diffs = np.diff(self.timestamps)
        if n > 1 and not np.all(diffs == HOUR):
            raise DataError("hourly table has gaps or unordered rows")
        if np.any(self.timestamps % HOUR != 0):
            raise DataError("hourly table timestamps are not hour-aligned")
        if np.any(self.aggregate < 0):
            raise DataError("aggregate load must be non-negative")


@dataclass
class ColumnMap:
    """Maps CSV headers of a household load file to series.

    Defaults follow the REFIT layout: ``Time,Unix,Aggregate,Appliance1..9``.
    """

    unix_col: str = "Unix"
    aggregate_col: str = "Aggregate"
    # (device_id, csv column, display name)
    appliances: list[tuple[int, str, str]] = field(default_factory=list)

    @classmethod
    def refit_default(cls, n_appliances: int = 9) -> "ColumnMap":
        apps = [(i, f"Appliance{i}", f"appliance {i}") for i in range(1, n_appliances + 1)]
        return cls(appliances=apps)


def load_household(path, column_map: ColumnMap | None = None):
    """Parse a household load CSV into per-appliance series plus the aggregate.

    Rows with an unparseable timestamp or load value are dropped and counted;
    rows whose timestamp does not strictly increase are dropped separately.
    Returns ``(devices, aggregate_series, report)``.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"household load file not found: {path}")
    cmap = column_map or ColumnMap.refit_default()

    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        needed = [cmap.unix_col, cmap.aggregate_col] + [c for _, c, _ in cmap.appliances]
        for col in needed:
            if col not in header:
                raise InputError(f"column '{col}' not found in {path} (header: {header})")

        report = ParseReport()
        ts_list: list[int] = []
        agg_list: list[float] = []
        app_lists: list[list[float]] = [[] for _ in cmap.appliances]
        last_ts = None
        for row in reader:
            try:
                ts = int(row[cmap.unix_col])
                agg = float(row[cmap.aggregate_col])
                vals = [float(row[c]) for _, c, _ in cmap.appliances]
            except (ValueError, TypeError):
                report.dropped += 1
                continue
            if not math.isfinite(agg) or not all(math.isfinite(v) for v in vals):
                report.dropped += 1
                continue
            if last_ts is not None and ts <= last_ts:
                report.dropped_unordered += 1
                continue
            last_ts = ts
            ts_list.append(ts)
            agg_list.append(agg)
            for lst, v in zip(app_lists, vals):
                lst.append(v)

    if not ts_list:
        raise DataError(f"no parseable rows in {path}")

    timestamps = np.asarray(ts_list, dtype=np.int64)
    devices = [
        DeviceLoadSeries(dev_id, name, timestamps, np.asarray(vals, dtype=float))
        for (dev_id, _, name), vals in zip(cmap.appliances, app_lists)
    ]
    aggregate = DeviceLoadSeries(0, "aggregate", timestamps, np.asarray(agg_list, dtype=float))
    return devices, aggregate, report


def _parse_iso_hour(text: str) -> int:
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def load_weather(path) -> WeatherSeries:
    """Parse a weather CSV (header ``time,temp,dwpt,rhum,wdir,wspd``).

    Empty cells become NaN for later imputation.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"weather file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in ("time", *_WEATHER_CSV_COLUMNS):
            if col not in header:
                raise InputError(f"column '{col}' not found in {path} (header: {header})")
        ts_list: list[int] = []
        rows: list[list[float]] = []
        for row in reader:
            ts = _parse_iso_hour(row["time"])
            vals = []
            for csv_col, _ in _WEATHER_CSV_COLUMNS.items():
                cell = (row[csv_col] or "").strip()
                vals.append(float(cell) if cell else math.nan)
            # reorder into WEATHER_FEATURES order
            by_name = dict(zip(_WEATHER_CSV_COLUMNS.values(), vals))
            ts_list.append(ts)
            rows.append([by_name[name] for name in WEATHER_FEATURES])
    if not ts_list:
        raise DataError(f"no rows in {path}")
    timestamps = np.asarray(ts_list, dtype=np.int64)
    if np.any(np.diff(timestamps) <= 0):
        raise DataError(f"weather timestamps not strictly increasing in {path}")
    if np.any(timestamps % HOUR != 0):
        raise DataError(f"weather timestamps not hour-aligned in {path}")
    return WeatherSeries(timestamps, np.asarray(rows, dtype=float))


def load_prices(path) -> PriceSeries:
    """Parse a price CSV (header ``time,price_per_kwh``)."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"price file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in ("time", "price_per_kwh"):
            if col not in header:
                raise InputError(f"column '{col}' not found in {path} (header: {header})")
        ts_list: list[int] = []
        price_list: list[float] = []
        for row in reader:
            ts_list.append(_parse_iso_hour(row["time"]))
            price_list.append(float(row["price_per_kwh"]))
    if not ts_list:
        raise DataError(f"no rows in {path}")
    timestamps = np.asarray(ts_list, dtype=np.int64)
    prices = np.asarray(price_list, dtype=float)
    if np.any(np.diff(timestamps) <= 0):
        raise DataError(f"price timestamps not strictly increasing in {path}")
    if np.any(~np.isfinite(prices)) or np.any(prices <= 0):
        raise DataError(f"prices must be finite and positive in {path}")
    return PriceSeries(timestamps, prices)


def resample_hourly(timestamps: np.ndarray, values: np.ndarray):
    """Reduce an irregular series to hourly means.

    Each output hour h holds the arithmetic mean of samples in [h, h+1);
    hours with no samples between the first and last covered hour are NaN.
    Returns ``(hour_timestamps, hourly_values)``.
    """
    if len(timestamps) == 0:
        raise DataError("cannot resample an empty series")
    hours = np.asarray(timestamps, dtype=np.int64) // HOUR
    first, last = int(hours[0]), int(hours[-1])
    n = last - first + 1
    sums = np.zeros(n)
    counts = np.zeros(n)
    np.add.at(sums, hours - first, values)
    np.add.at(counts, hours - first, 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = sums / counts
    means[counts == 0] = np.nan
    out_ts = (first + np.arange(n, dtype=np.int64)) * HOUR
    return out_ts, means


@dataclass
class BuildReport:
    load_gap_hours_filled: int = 0


def build_hourly_table(
    household_id: str,
    devices: list,  # (device_id, device_name, hour_ts, hourly_values)
    aggregate,  # (hour_ts, hourly_values)
    weather: WeatherSeries,
    prices: PriceSeries | None = None,
):
    """Align hourly load, weather, and price series into one table.

    The table covers the intersection of the load and weather time ranges.
    Hours where the load sources had no samples are filled with 0 W and
    counted; weather cells absent at a given hour are flagged for
    imputation. Returns ``(table, report)``.
    """
    agg_ts, agg_vals = aggregate
    lo = max(int(agg_ts[0]), int(weather.timestamps[0]))
    hi = min(int(agg_ts[-1]), int(weather.timestamps[-1]))
    if lo > hi:
        raise DataError("load and weather time ranges do not overlap")
    n = (hi - lo) // HOUR + 1
    timestamps = lo + np.arange(n, dtype=np.int64) * HOUR

    report = BuildReport()

    def align_load(ts, vals):
        out = np.full(n, np.nan)
        idx = (ts - lo) // HOUR
        keep = (idx >= 0) & (idx < n)
        out[idx[keep]] = vals[keep]
        gaps = int(np.sum(~np.isfinite(out)))
        out[~np.isfinite(out)] = 0.0
        report.load_gap_hours_filled += gaps
        return out

    agg_aligned = align_load(agg_ts, agg_vals)
    dev_ids, dev_names, dev_cols = [], [], []
    for dev_id, dev_name, ts, vals in devices:
        dev_ids.append(dev_id)
        dev_names.append(dev_name)
        dev_cols.append(align_load(ts, vals))
    device_loads = (
        np.column_stack(dev_cols) if dev_cols else np.zeros((n, 0))
    )

    wx = np.full((n, len(WEATHER_FEATURES)), np.nan)
    widx = (weather.timestamps - lo) // HOUR
    keep = (widx >= 0) & (widx < n)
    wx[widx[keep]] = weather.values[keep]
    flags = ~np.isfinite(wx)

    price = np.full(n, np.nan)
    if prices is not None:
        pidx = (prices.timestamps - lo) // HOUR
        keep = (pidx >= 0) & (pidx < n)
        price[pidx[keep]] = prices.prices[keep]

    table = HourlyTable(
        household_id=household_id,
        timestamps=timestamps,
        device_ids=dev_ids,
        device_names=dev_names,
        device_loads=device_loads,
        aggregate=agg_aligned,
        weather=wx,
        price=price,
        imputation_flags=flags,
    )
    table.validate()
    return table, report


def knn_impute(table: HourlyTable, k: int = 5, feature_scaling: bool = True):
    """Fill missing weather cells from the k nearest complete rows.

    Distance is Euclidean over the query row's observed weather features
    (standardized when ``feature_scaling``) plus the sin/cos encoding of
    hour-of-day; ties break toward the earlier timestamp. Each missing cell
    becomes the mean of that feature over the k neighbors. Returns
    ``(table, imputed_counts_per_feature)``.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    wx = table.weather
    missing = ~np.isfinite(wx)
    counts = {name: int(missing[:, j].sum()) for j, name in enumerate(WEATHER_FEATURES)}
    if not missing.any():
        return table, counts

    complete = ~missing.any(axis=1)
    n_complete = int(complete.sum())
    if n_complete < k:
        raise DataError(f"need at least k={k} complete weather rows, have {n_complete}")

    if feature_scaling:
        mean = np.nanmean(wx, axis=0)
        std = np.nanstd(wx, axis=0)
        std[std == 0] = 1.0
    else:
        mean = np.zeros(wx.shape[1])
        std = np.ones(wx.shape[1])
    scaled = (wx - mean) / std

    hours = table.hour_of_day()
    angle = 2.0 * np.pi * hours / 24.0
    clock = np.column_stack([np.sin(angle), np.cos(angle)])

    comp_idx = np.where(complete)[0]  # already in timestamp order
    comp_scaled = scaled[comp_idx]
    comp_clock = clock[comp_idx]

    filled = wx.copy()
    for i in np.where(missing.any(axis=1))[0]:
        observed = np.isfinite(wx[i])
        d2 = np.sum((comp_scaled[:, observed] - scaled[i, observed]) ** 2, axis=1)
        d2 += np.sum((comp_clock - clock[i]) ** 2, axis=1)
        # stable sort keeps earlier timestamps first among exact ties
        nearest = comp_idx[np.argsort(d2, kind="stable")[:k]]
        for j in np.where(~observed)[0]:
            filled[i, j] = float(np.mean(wx[nearest, j]))

    out = HourlyTable(
        household_id=table.household_id,
        timestamps=table.timestamps,
        device_ids=list(table.device_ids),
        device_names=list(table.device_names),
        device_loads=table.device_loads,
        aggregate=table.aggregate,
        weather=filled,
        price=table.price,
        imputation_flags=table.imputation_flags,
    )
    return out, counts


# ---------------------------------------------------------------------------
# canonical on-disk form of the hourly table


def table_to_csv(table: HourlyTable, path) -> None:
    """Write the canonical hourly CSV; floats use repr so reloads are exact."""
    path = Path(path)
    header = (
        ["unix"]
        + [f"device_{d}" for d in table.device_ids]
        + ["aggregate", *WEATHER_FEATURES, "price", "imputed_mask"]
    )
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["household", table.household_id])
        writer.writerow(["device_names"] + list(table.device_names))
        writer.writerow(header)
        masks = np.sum(table.imputation_flags * (1 << np.arange(5)), axis=1)
        for i in range(len(table)):
            row = [int(table.timestamps[i])]
            row += [repr(float(v)) for v in table.device_loads[i]]
            row.append(repr(float(table.aggregate[i])))
            row += [repr(float(v)) for v in table.weather[i]]
            p = table.price[i]
            row.append("" if not np.isfinite(p) else repr(float(p)))
            row.append(int(masks[i]))
            writer.writerow(row)


def table_from_csv(path) -> HourlyTable:
    path = Path(path)
    if not path.exists():
        raise InputError(f"hourly table not found: {path} (run 'prepare' first)")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        head = next(reader)
        household_id = head[1]
        names_row = next(reader)
        device_names = names_row[1:]
        header = next(reader)
        device_cols = [c for c in header if c.startswith("device_")]
        device_ids = [int(c.split("_", 1)[1]) for c in device_cols]
        rows = list(reader)
    n = len(rows)
    nd = len(device_ids)
    timestamps = np.empty(n, dtype=np.int64)
    device_loads = np.empty((n, nd))
    aggregate = np.empty(n)
    weather = np.empty((n, 5))
    price = np.full(n, np.nan)
    flags = np.zeros((n, 5), dtype=bool)
    for i, row in enumerate(rows):
        timestamps[i] = int(row[0])
        for j in range(nd):
            device_loads[i, j] = float(row[1 + j])
        aggregate[i] = float(row[1 + nd])
        for j in range(5):
            weather[i, j] = float(row[2 + nd + j])
        cell = row[7 + nd]
        if cell:
            price[i] = float(cell)
        mask = int(row[8 + nd])
        for j in range(5):
            flags[i, j] = bool(mask & (1 << j))
    table = HourlyTable(
        household_id=household_id,
        timestamps=timestamps,
        device_ids=device_ids,
        device_names=device_names,
        device_loads=device_loads,
        aggregate=aggregate,
        weather=weather,
        price=price,
        imputation_flags=flags,
    )
    table.validate()
    return table
