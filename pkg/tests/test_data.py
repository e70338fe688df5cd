import numpy as np
import pytest

from rclstm.data import (
    SplitSpec,
    load_csv,
    make_windows,
    normalize,
    split,
    synth_traffic,
)


class TestLoadCsv:
    def test_parses_plain_values(self, tmp_path):
        f = tmp_path / "series.csv"
        f.write_text("1.0\n2.5\n")
        assert load_csv(f) == [1.0, 2.5]

    def test_skips_header(self, tmp_path):
        f = tmp_path / "series.csv"
        f.write_text("traffic\n1.0\n2.5\n")
        assert load_csv(f) == [1.0, 2.5]

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "absent.csv")

    def test_empty_file(self, tmp_path):
        f = tmp_path / "series.csv"
        f.write_text("")
        with pytest.raises(ValueError, match="empty series"):
            load_csv(f)

    def test_malformed_row_names_row_number(self, tmp_path):
        f = tmp_path / "series.csv"
        f.write_text("1.0\n2.0\noops\n4.0\n")
        with pytest.raises(ValueError, match="row 3"):
            load_csv(f)

    def test_long_export_round_trip(self, tmp_path):
        values = synth_traffic(7289, seed=4)
        f = tmp_path / "series.csv"
        f.write_text("".join(f"{v!r}\n" for v in values))
        assert load_csv(f) == values
        assert len(load_csv(f)) == 7289


class TestSynthTraffic:
    def test_length_and_finiteness(self):
        values = synth_traffic(7289, seed=0)
        assert len(values) == 7289
        assert np.all(np.isfinite(values))

    def test_noiseless_period(self):
        values = np.asarray(synth_traffic(1200, seed=0, noise_std=0.0))
        assert np.max(np.abs(values[480:960] - values[:480])) < 1e-9

    def test_daily_autocorrelation(self):
        x = np.asarray(synth_traffic(7289, seed=1))
        x = x - x.mean()
        r96 = float(np.dot(x[:-96], x[96:]) / np.dot(x, x))
        assert r96 > 0.5

    def test_deterministic_per_seed(self):
        assert synth_traffic(500, seed=9) == synth_traffic(500, seed=9)
        assert synth_traffic(500, seed=9) != synth_traffic(500, seed=10)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            synth_traffic(0, seed=0)


class TestNormalize:
    def test_hand_computed_example(self):
        series = normalize([1.0, 2.0, 3.0])
        assert series.mu == 2.0
        assert series.sigma == pytest.approx(0.816496580927726, abs=1e-15)
        expected = [-1.224744871391589, 0.0, 1.224744871391589]
        assert np.max(np.abs(series.normalized - expected)) < 1e-12

    def test_mean_zero_std_one(self):
        rng = np.random.default_rng(0)
        series = normalize(rng.uniform(5, 50, size=4000))
        assert abs(float(np.mean(series.normalized))) < 1e-9
        assert abs(float(np.std(series.normalized)) - 1.0) < 1e-9

    def test_idempotent_on_standardized_input(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=2000)
        x = (x - x.mean()) / x.std()
        series = normalize(x)
        assert abs(series.mu) < 1e-9
        assert abs(series.sigma - 1.0) < 1e-9
        assert np.max(np.abs(series.normalized - x)) < 1e-9

    def test_constant_series_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            normalize([5.0, 5.0, 5.0])

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(10, 90, size=1000)
        series = normalize(x)
        back = series.denormalize(series.normalized)
        assert np.max(np.abs(back - x)) < 1e-9


class TestMakeWindows:
    def test_definition(self):
        series = normalize([1.0, 2.0, 4.0, 3.0])
        ds = make_windows(series, 2)
        assert len(ds) == 2
        n = series.normalized
        assert np.array_equal(ds.inputs[0][:, 0], n[0:2])
        assert np.array_equal(ds.inputs[1][:, 0], n[1:3])
        assert np.array_equal(ds.targets, n[2:])

    def test_boundary_single_window(self):
        series = normalize([1.0, 2.0, 4.0, 3.0])
        ds = make_windows(series, 3)
        assert len(ds) == 1

    def test_count_for_long_series(self):
        series = normalize(synth_traffic(7289, seed=0))
        ds = make_windows(series, 10)
        assert len(ds) == 7279

    def test_window_target_alignment(self):
        series = normalize(synth_traffic(300, seed=3))
        ds = make_windows(series, 7)
        for k in (0, 5, 100, len(ds) - 1):
            assert ds.targets[k] == series.normalized[k + 7]

    def test_window_too_long(self):
        series = normalize([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            make_windows(series, 3)


class TestSplit:
    def make(self, n=7289, window=10):
        return make_windows(normalize(synth_traffic(n, seed=0)), window)

    def test_default_uses_all_remaining(self):
        ds = self.make()
        train, test = split(ds, SplitSpec(test_size=1000))
        assert len(train) == 6279
        assert len(test) == 1000

    def test_train_block_immediately_precedes_test(self):
        ds = self.make()
        train, test = split(ds, SplitSpec(test_size=1000, train_size=1000))
        # train must be windows 5279..6278
        assert np.array_equal(train.inputs, ds.inputs[5279:6279])
        assert np.array_equal(test.inputs, ds.inputs[6279:])

    def test_chronological_no_overlap(self):
        ds = self.make(n=500, window=5)
        train, test = split(ds, SplitSpec(test_size=100, train_size=200))
        assert np.array_equal(train.targets, ds.targets[195:395])
        assert np.array_equal(test.targets, ds.targets[395:])

    def test_infeasible_split_rejected(self):
        ds = self.make(n=100, window=5)
        with pytest.raises(ValueError):
            split(ds, SplitSpec(test_size=95))
        with pytest.raises(ValueError):
            split(ds, SplitSpec(test_size=50, train_size=50))
