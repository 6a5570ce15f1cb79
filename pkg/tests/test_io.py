import numpy as np
import pytest

from mcrard.exceptions import InputFormatError, SeriesTooShort, \
                              DimensionMismatch, EmptyDataset
from mcrard.io import Dataset, LagSpec, load_dataset_csv, save_dataset_csv, \
                      standardize, apply_standardization, \
                      destandardize_weights, append_intercept, \
                      build_lagged_design, lagged_feature_names, \
                      load_time_series_csv, normalize_target_01, \
                      denormalize_target_01


class TestDataset:

    def test_default_names(self, noise_free):
        assert noise_free.names() == [f"x{d}" for d in range(5)]

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            Dataset(np.ones((3, 2)), np.ones(4))

    def test_empty(self):
        with pytest.raises(EmptyDataset):
            Dataset(np.ones((0, 2)), np.ones(0))

    def test_subset_keeps_names(self, noise_free):
        named = Dataset(noise_free.X, noise_free.t, list("abcde"))
        sub = named.subset([0, 2])
        assert sub.n_samples == 2
        assert sub.feature_names == list("abcde")


class TestCsv:

    def test_save_then_load(self, tmp_path, noise_free):
        path = save_dataset_csv(noise_free, str(tmp_path / "d.csv"))
        loaded = load_dataset_csv(path)
        np.testing.assert_array_equal(loaded.X, noise_free.X)
        np.testing.assert_array_equal(loaded.t, noise_free.t)
        assert loaded.feature_names == noise_free.names()

    def test_bad_cell_reports_line_and_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,target\n1,2,3\n4,oops,6\n")
        with pytest.raises(InputFormatError) as info:
            load_dataset_csv(str(path))
        assert info.value.line == 3
        assert info.value.column == 2
        assert f"{path}:3:2:" in str(info.value)

    def test_missing_target_column(self, tmp_path):
        path = tmp_path / "no_target.csv"
        path.write_text("a,b\n1,2\n3,4\n")
        with pytest.raises(InputFormatError, match="target"):
            load_dataset_csv(str(path))

    def test_custom_target_column(self, tmp_path):
        path = tmp_path / "y.csv"
        path.write_text("y,a\n1,2\n3,4\n")
        data = load_dataset_csv(str(path), target_column="y")
        np.testing.assert_array_equal(data.t, [1.0, 3.0])
        assert data.feature_names == ["a"]


class TestStandardize:

    def test_zero_mean_unit_population_sd(self, noise_free):
        data, _ = standardize(noise_free)
        np.testing.assert_allclose(data.X.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(data.X.std(axis=0), 1.0, rtol=1e-12)

    def test_constant_column_gets_unit_scale(self):
        X = np.column_stack([np.arange(4.0), np.full(4, 7.0)])
        data, params = standardize(Dataset(X, np.arange(4.0)))
        assert params.scales[1] == 1.0
        np.testing.assert_array_equal(data.X[:, 1], 0.0)

    def test_needs_two_samples(self):
        with pytest.raises(EmptyDataset):
            standardize(Dataset(np.ones((1, 2)), np.ones(1)))

    def test_destandardized_weights_reproduce_predictions(self, rng):
        X = rng.normal(3.0, 2.0, size=(30, 4))
        data = Dataset(X, rng.standard_normal(30))
        z, params = standardize(data)
        w = rng.standard_normal(4)
        w_orig, offset = destandardize_weights(w, params)
        np.testing.assert_allclose(X @ w_orig + offset, z.X @ w, rtol=1e-10,
                                   atol=1e-12)

    def test_apply_uses_training_params(self, rng):
        train = Dataset(rng.normal(1.0, 3.0, size=(20, 3)), np.zeros(20))
        test = Dataset(rng.normal(1.0, 3.0, size=(5, 3)), np.zeros(5))
        _, params = standardize(train)
        out = apply_standardization(test, params)
        np.testing.assert_allclose(out.X, (test.X - params.means) / params.scales)

    def test_append_intercept(self, noise_free):
        data = append_intercept(noise_free)
        assert data.feature_names[-1] == "intercept"
        np.testing.assert_array_equal(data.X[:, -1], 1.0)


class TestTargetNormalization:

    def test_maps_onto_unit_interval(self):
        out, t_min, t_max = normalize_target_01(np.array([2.0, 4.0, 6.0]))
        np.testing.assert_allclose(out, [0.0, 0.5, 1.0])
        assert (t_min, t_max) == (2.0, 6.0)

    def test_inverse(self, rng):
        t = rng.standard_normal(50)
        out, t_min, t_max = normalize_target_01(t)
        np.testing.assert_allclose(denormalize_target_01(out, t_min, t_max), t,
                                   rtol=1e-12)

    def test_constant_maps_to_zeros(self):
        out, _, _ = normalize_target_01(np.full(3, 5.0))
        np.testing.assert_array_equal(out, 0.0)


class TestLaggedDesign:

    def test_single_source_two_lags(self):
        series = np.arange(5.0)
        target = 10.0 + np.arange(5.0)
        data = build_lagged_design(series, target, LagSpec(n_lags=2))
        np.testing.assert_array_equal(data.X, [[0, 1], [1, 2], [2, 3], [3, 4]])
        np.testing.assert_array_equal(data.t, [11, 12, 13, 14])
        assert data.feature_names == ["src0_lag1", "src0_lag0"]

    def test_source_major_ordering_with_stride(self):
        T = 7
        series = np.column_stack([np.arange(T), 100 + np.arange(T)]).astype(float)
        data = build_lagged_design(series, np.arange(T, dtype=float),
                                   LagSpec(n_lags=3, stride=2))
        # N = T - (n_lags - 1) * stride
        assert data.n_samples == 3
        np.testing.assert_array_equal(data.X[0], [0, 2, 4, 100, 102, 104])
        np.testing.assert_array_equal(data.t, [4, 5, 6])
        assert data.feature_names[:3] == ["src0_lag2", "src0_lag1", "src0_lag0"]

    def test_default_lags_two_sources(self, rng):
        data = build_lagged_design(rng.standard_normal((40, 2)),
                                   rng.standard_normal(40))
        assert data.n_features == 42
        assert data.n_samples == 40 - 20

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            build_lagged_design(np.zeros((21, 1)), np.zeros(21), LagSpec(n_lags=21))

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            build_lagged_design(np.zeros((30, 1)), np.zeros(29), LagSpec(n_lags=3))

    def test_names(self):
        assert lagged_feature_names(2, LagSpec(n_lags=2)) == \
            ["src0_lag1", "src0_lag0", "src1_lag1", "src1_lag0"]

    def test_load_time_series_csv(self, tmp_path):
        series = tmp_path / "series.csv"
        series.write_text("time_index,c1,c2\n0,1,2\n1,3,4\n2,5,6\n")
        target = tmp_path / "target.csv"
        target.write_text("time_index,target\n0,0.5\n1,0.6\n2,0.7\n")
        X, t, sources = load_time_series_csv(str(series), str(target))
        assert sources == ["c1", "c2"]
        np.testing.assert_array_equal(X, [[1, 2], [3, 4], [5, 6]])
        np.testing.assert_array_equal(t, [0.5, 0.6, 0.7])

    def test_time_index_mismatch(self, tmp_path):
        series = tmp_path / "series.csv"
        series.write_text("time_index,c1\n0,1\n1,3\n")
        target = tmp_path / "target.csv"
        target.write_text("time_index,target\n0,0.5\n5,0.6\n")
        with pytest.raises(InputFormatError) as info:
            load_time_series_csv(str(series), str(target))
        assert info.value.line == 3
