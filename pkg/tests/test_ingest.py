import numpy as np
import pytest

from loadshift.errors import DataError, InputError
from loadshift.ingest import (
    ColumnMap,
    HOUR,
    WEATHER_FEATURES,
    WeatherSeries,
    PriceSeries,
    build_hourly_table,
    knn_impute,
    load_household,
    resample_hourly,
    table_from_csv,
    table_to_csv,
)
from synth import START_TS, make_table

TWO_APPLIANCE_MAP = ColumnMap(
    appliances=[(1, "Appliance1", "washing machine"), (2, "Appliance2", "fridge")]
)


def _write_load(path, rows, header="Time,Unix,Aggregate,Appliance1,Appliance2"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return path


class TestLoadHousehold:
    def test_three_row_aggregate(self, tmp_path):
        rows = [f"t,{START_TS + i * 60},{100 * (i + 1)},0,0" for i in range(3)]
        path = _write_load(tmp_path / "h.csv", rows)
        devices, aggregate, report = load_household(path, TWO_APPLIANCE_MAP)
        assert len(aggregate.loads) == 3
        assert aggregate.loads.tolist() == [100.0, 200.0, 300.0]
        assert report.dropped == 0

    def test_malformed_timestamp_dropped(self, tmp_path):
        rows = [f"t,{START_TS + i * 60},{i},0,0" for i in range(10)]
        rows[4] = "t,notatime,50,0,0"
        path = _write_load(tmp_path / "h.csv", rows)
        devices, aggregate, report = load_household(path, TWO_APPLIANCE_MAP)
        assert len(aggregate.loads) == 9
        assert report.dropped == 1

    def test_refit_layout_yields_nine_devices(self, tmp_path):
        header = "Time,Unix," + ",".join(["Aggregate"] + [f"Appliance{i}" for i in range(1, 10)])
        rows = [f"t,{START_TS + i * 8},{200}," + ",".join(["5"] * 9) for i in range(4)]
        path = _write_load(tmp_path / "refit.csv", rows, header=header)
        devices, aggregate, report = load_household(path)
        assert len(devices) == 9
        assert [d.device_id for d in devices] == list(range(1, 10))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            load_household(tmp_path / "absent.csv", TWO_APPLIANCE_MAP)

    def test_missing_mapped_column(self, tmp_path):
        path = _write_load(tmp_path / "h.csv", [f"t,{START_TS},1,2,3"])
        bad_map = ColumnMap(appliances=[(1, "Appliance7", "x")])
        with pytest.raises(InputError):
            load_household(path, bad_map)

    def test_zero_parseable_rows(self, tmp_path):
        path = _write_load(tmp_path / "h.csv", ["t,nope,1,2,3"])
        with pytest.raises(DataError):
            load_household(path, TWO_APPLIANCE_MAP)

    def test_unordered_rows_dropped_separately(self, tmp_path):
        rows = [
            f"t,{START_TS},10,0,0",
            f"t,{START_TS + 60},20,0,0",
            f"t,{START_TS + 30},30,0,0",  # goes backwards
            f"t,{START_TS + 120},40,0,0",
        ]
        path = _write_load(tmp_path / "h.csv", rows)
        _, aggregate, report = load_household(path, TWO_APPLIANCE_MAP)
        assert len(aggregate.loads) == 3
        assert report.dropped_unordered == 1


class TestResampleHourly:
    def test_mean_of_two_samples(self):
        ts = np.array([START_TS, START_TS + 1800], dtype=np.int64)
        out_ts, vals = resample_hourly(ts, np.array([100.0, 300.0]))
        assert vals.tolist() == [200.0]
        assert out_ts.tolist() == [START_TS]

    def test_single_sample_identity(self):
        out_ts, vals = resample_hourly(np.array([START_TS + 120]), np.array([77.0]))
        assert vals.tolist() == [77.0]

    def test_gap_hour_is_missing(self):
        ts = np.array([START_TS, START_TS + 2 * HOUR], dtype=np.int64)
        out_ts, vals = resample_hourly(ts, np.array([10.0, 30.0]))
        assert len(vals) == 3
        assert vals[0] == 10.0 and vals[2] == 30.0
        assert np.isnan(vals[1])

    def test_uniform_hour_conserves_value(self):
        ts = START_TS + np.arange(0, 3600, 300, dtype=np.int64)
        _, vals = resample_hourly(ts, np.full(len(ts), 42.5))
        assert vals.tolist() == [42.5]

    def test_empty_input(self):
        with pytest.raises(DataError):
            resample_hourly(np.array([], dtype=np.int64), np.array([]))


def _weather(n, start=START_TS, missing_at=()):
    ts = start + np.arange(n, dtype=np.int64) * HOUR
    vals = np.column_stack(
        [
            np.full(n, 5.0),
            np.full(n, 70.0),
            10.0 + np.arange(n, dtype=float) % 7,
            np.full(n, 180.0),
            np.full(n, 12.0),
        ]
    )
    for (i, j) in missing_at:
        vals[i, j] = np.nan
    return WeatherSeries(ts, vals)


def _hourly_load(n, value=100.0, start=START_TS):
    ts = start + np.arange(n, dtype=np.int64) * HOUR
    return ts, np.full(n, value)


class TestBuildHourlyTable:
    def test_range_intersection(self):
        # load covers hours 0..239, weather 96..479 -> table 96..239
        agg = _hourly_load(240)
        weather = _weather(384, start=START_TS + 96 * HOUR)
        table, _ = build_hourly_table("h", [], agg, weather)
        assert len(table) == 144
        assert table.timestamps[0] == START_TS + 96 * HOUR
        assert table.timestamps[-1] == START_TS + 239 * HOUR

    def test_aligned_sources_no_flags(self):
        agg = _hourly_load(48)
        table, report = build_hourly_table("h", [], agg, _weather(48))
        assert len(table) == 48
        assert not table.imputation_flags.any()
        assert report.load_gap_hours_filled == 0

    def test_missing_weather_flagged(self):
        missing = [(3, 2), (9, 2), (20, 0)]
        table, _ = build_hourly_table("h", [], _hourly_load(48), _weather(48, missing_at=missing))
        assert int(table.imputation_flags.sum()) == 3
        assert table.imputation_flags[3, 2] and table.imputation_flags[20, 0]

    def test_empty_intersection(self):
        agg = _hourly_load(24)
        weather = _weather(24, start=START_TS + 100 * HOUR)
        with pytest.raises(DataError):
            build_hourly_table("h", [], agg, weather)

    def test_prices_joined_where_present(self):
        ts = START_TS + np.arange(10, dtype=np.int64) * HOUR
        prices = PriceSeries(ts[:5], np.full(5, 0.25))
        table, _ = build_hourly_table("h", [], _hourly_load(10), _weather(10), prices)
        assert np.all(table.price[:5] == 0.25)
        assert np.all(np.isnan(table.price[5:]))


class TestKnnImpute:
    def test_nearest_identical_row_copies_value(self):
        # row 25 shares row 1's hour of day and observed features exactly
        table = make_table(26)
        table.weather[25, 2] = np.nan
        table.imputation_flags[25, 2] = True
        table.weather[25, [0, 1, 3, 4]] = table.weather[1, [0, 1, 3, 4]]
        table.weather[1, 2] = 12.0
        filled, counts = knn_impute(table, k=1)
        assert filled.weather[25, 2] == 12.0
        assert counts["temperature"] == 1

    def test_mean_of_two_equidistant_neighbors(self):
        table = make_table(49)
        w = table.weather
        w[:, :] = 50.0
        w[24, 1] = np.nan  # rel_humidity missing at hour 0 of day 2
        w[0, 1] = 10.0  # same hour of day, all other features equal
        w[48, 1] = 20.0
        table.imputation_flags[24, 1] = True
        filled, counts = knn_impute(table, k=2)
        # oracle: exhaustive distance scan over complete rows
        complete = [i for i in range(49) if i != 24]
        hour = lambda i: (int(table.timestamps[i]) // HOUR) % 24
        import math

        def dist(i):
            d = sum(
                (w[i, j] - w[24, j]) ** 2 for j in (0, 2, 3, 4)
            )  # feature 1 unobserved in the query row
            d += (math.sin(2 * math.pi * hour(i) / 24) - math.sin(2 * math.pi * hour(24) / 24)) ** 2
            d += (math.cos(2 * math.pi * hour(i) / 24) - math.cos(2 * math.pi * hour(24) / 24)) ** 2
            return d

        nearest = sorted(complete, key=lambda i: (dist(i), table.timestamps[i]))[:2]
        assert sorted(nearest) == [0, 48]
        assert filled.weather[24, 1] == pytest.approx(15.0, abs=1e-12)
        assert counts["rel_humidity"] == 1

    def test_complete_table_unchanged(self):
        table = make_table(30)
        filled, counts = knn_impute(table, k=3)
        assert filled is table
        assert all(v == 0 for v in counts.values())

    def test_too_few_complete_rows(self):
        table = make_table(5)
        table.weather[:4, 0] = np.nan
        with pytest.raises(DataError):
            knn_impute(table, k=2)

    def test_flags_preserved(self):
        table = make_table(30)
        table.weather[10, 3] = np.nan
        table.imputation_flags[10, 3] = True
        filled, _ = knn_impute(table, k=3)
        assert filled.imputation_flags[10, 3]
        assert np.isfinite(filled.weather).all()


class TestCsvRoundTrip:
    def test_byte_identical_and_exact(self, tmp_path):
        table = make_table(40, aggregate=np.linspace(0, 900.7, 40), device=np.linspace(0, 50, 40))
        table.price[5] = np.nan
        table.imputation_flags[7, 1] = True
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        table_to_csv(table, p1)
        table_to_csv(table, p2)
        assert p1.read_bytes() == p2.read_bytes()
        back = table_from_csv(p1)
        assert np.array_equal(back.timestamps, table.timestamps)
        assert np.array_equal(back.aggregate, table.aggregate)
        assert np.array_equal(back.device_loads, table.device_loads)
        assert np.array_equal(back.weather, table.weather)
        assert np.array_equal(np.isnan(back.price), np.isnan(table.price))
        assert np.array_equal(back.imputation_flags, table.imputation_flags)
        assert back.device_names == table.device_names
