import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bamoes.data import (
    Series,
    lag_featurize,
    load_csv,
    load_metadata,
    split_train_test,
    standardize,
    truncate_tail,
)
from bamoes.errors import ContractError, ParseError


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_interleaved_series(self, tmp_path):
        p = write(tmp_path, "series_id,t,value\na,1,1.0\nb,1,10\na,2,2.5\nb,5,11\na,3,-3e-2\n")
        out = load_csv(p, horizon=2, lag=1)
        assert [s.id for s in out] == ["a", "b"]
        np.testing.assert_array_equal(out[0].values, [1.0, 2.5, -0.03])
        np.testing.assert_array_equal(out[1].values, [10.0, 11.0])
        assert out[0].horizon_h == 2 and out[0].lag_k == 1

    def test_metadata_file_and_fallback(self, tmp_path):
        d = write(tmp_path, "series_id,t,value\na,1,1\nb,1,2\n")
        m = write(tmp_path, "series_id,horizon,lag\na,7,3\n", "m.csv")
        out = load_csv(d, metadata=m, horizon=1, lag=2)
        assert (out[0].horizon_h, out[0].lag_k) == (7, 3)
        assert (out[1].horizon_h, out[1].lag_k) == (1, 2)
        assert load_metadata(m) == {"a": (7, 3)}

    def test_column_order_is_free(self, tmp_path):
        p = write(tmp_path, "value,series_id,t\n4.5,x,0\n")
        assert load_csv(p, horizon=1, lag=1)[0].values.tolist() == [4.5]

    @pytest.mark.parametrize("text, line, fragment", [
        ("series_id,value\na,1\n", 1, "missing column"),
        ("series_id,t,value\na,1,1\na,2,abc\n", 3, "not numeric"),
        ("series_id,t,value\na,1,nan\n", 2, "not finite"),
        ("series_id,t,value\na,1,1\na,1,2\n", 3, "duplicate"),
        ("series_id,t,value\na,2,1\na,1,2\n", 3, "not increasing"),
        ("series_id,t,value\na,x,1\n", 2, "not an integer"),
        ("series_id,t,value\na,1\n", 2, "fields"),
    ])
    def test_errors_carry_line(self, tmp_path, text, line, fragment):
        with pytest.raises(ParseError) as info:
            load_csv(write(tmp_path, text), horizon=1, lag=1)
        assert info.value.line == line
        assert fragment in str(info.value)

    def test_missing_horizon(self, tmp_path):
        with pytest.raises(ParseError):
            load_csv(write(tmp_path, "series_id,t,value\na,1,1\n"))

    def test_duplicate_metadata(self, tmp_path):
        with pytest.raises(ParseError):
            load_metadata(write(tmp_path, "series_id,horizon,lag\na,1,1\na,2,2\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_csv(write(tmp_path, ""), horizon=1, lag=1)


class TestSeries:
    def test_rejects_nonfinite(self):
        with pytest.raises(ContractError):
            Series("a", [1.0, np.inf])

    def test_values_read_only(self):
        s = Series("a", [1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0


class TestTruncate:
    def test_short_series_unchanged(self):
        s = Series("a", np.arange(150.0), 1, 10)
        assert truncate_tail(s) is s

    def test_long_series_keeps_200(self):
        s = Series("a", np.arange(1000.0), 1, 10)
        t = truncate_tail(s)
        np.testing.assert_array_equal(t.values, np.arange(800.0, 1000.0))

    def test_large_lag_keeps_2k(self):
        t = truncate_tail(Series("a", np.arange(1000.0), 1, 150))
        np.testing.assert_array_equal(t.values, np.arange(700.0, 1000.0))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 600), st.integers(1, 200))
    def test_length_law(self, n, k):
        t = truncate_tail(Series("a", np.arange(float(n)), 1, k))
        assert len(t) == min(n, max(2 * k, 200))
        assert t.values[-1] == n - 1


class TestLagFeaturize:
    def test_example(self):
        X, y = lag_featurize([1.0, 2.0, 3.0, 4.0, 5.0], 2)
        np.testing.assert_array_equal(X, [[2, 1], [3, 2], [4, 3]])
        np.testing.assert_array_equal(y, [3, 4, 5])

    @settings(max_examples=50, deadline=None)
    @given(arrays(float, st.integers(2, 60), elements=st.floats(-1e6, 1e6)), st.integers(1, 10))
    def test_shift_structure(self, v, k):
        if k >= len(v):
            with pytest.raises(ContractError):
                lag_featurize(v, k)
            return
        X, y = lag_featurize(v, k)
        assert X.shape == (len(v) - k, k) and y.shape == (len(v) - k,)
        for t in range(k, len(v)):
            np.testing.assert_array_equal(X[t - k], v[t - k:t][::-1])
            assert y[t - k] == v[t]

    def test_accepts_series(self):
        X, _ = lag_featurize(Series("a", [1.0, 2.0, 3.0]), 1)
        np.testing.assert_array_equal(X, [[1], [2]])


class TestSplit:
    def test_sizes(self):
        s = Series("a", np.arange(100.0), 10, 5)
        train, test = split_train_test(s)
        assert len(train) == 85 and len(test) == 15
        assert lag_featurize(test, 5)[0].shape[0] == 10
        np.testing.assert_array_equal(np.concatenate([train.values, test.values]), s.values)

    def test_boundary(self):
        h, k = 3, 2
        ok = Series("a", np.arange(float(h + 2 * k + 1)), h, k)
        train, _ = split_train_test(ok)
        assert len(train) == k + 1
        with pytest.raises(ContractError):
            split_train_test(Series("a", np.arange(float(h + 2 * k)), h, k))

    def test_test_tail_does_not_affect_training(self):
        s = Series("a", np.arange(60.0), 5, 3)
        u = s.with_values(np.r_[s.values[:-8], np.full(8, 1e9)])
        a, _ = split_train_test(s)
        b, _ = split_train_test(u)
        np.testing.assert_array_equal(a.values, b.values)
        _, _, sa = standardize(a)
        _, _, sb = standardize(b)
        assert sa == sb


class TestStandardize:
    def test_round_trip(self, rng):
        tr, te = rng.normal(3, 2, 50), rng.normal(size=10)
        ts, (tes,), sc = standardize(tr, te)
        assert ts.mean() == pytest.approx(0, abs=1e-12) and ts.std() == pytest.approx(1)
        np.testing.assert_allclose(sc.inverse_transform(tes), te, rtol=1e-12)
        np.testing.assert_allclose(sc.inverse_std([1.0]), [tr.std()])

    def test_constant_train(self):
        ts, _, sc = standardize(np.full(5, 2.0))
        np.testing.assert_array_equal(ts, 0.0)
        assert sc.scale == 1.0

    def test_series_in_series_out(self):
        s = Series("a", [1.0, 3.0], 2, 1)
        out, _, _ = standardize(s)
        assert isinstance(out, Series) and out.horizon_h == 2
