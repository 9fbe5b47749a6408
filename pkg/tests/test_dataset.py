import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowsvm.dataset import (
    CSV_COLUMNS, TEST1, TEST2, TEST3, Dataset, FlowPattern, FlowSample, LabelScheme,
    StandardScaler, apply_scaler, fit_scaler, load_csv, relabel, save_csv,
    split_indices, stratified_folds, stratified_split,
)
from flowsvm.errors import DataError, LabelError, RowError, SchemaError
from flowsvm.synthetic import synth_generate


def sample(label="I", **kw):
    base = dict(vsl=0.1, vsg=1.0, visc_l=1e-3, visc_g=1.8e-5, dens_l=998.0, dens_g=1.2,
                surface_tension=0.072, angle=0.0, diameter=0.0254)
    base.update(kw)
    return FlowSample(**base, label=FlowPattern(label))


def write_rows(path, rows, header=",".join(CSV_COLUMNS)):
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return path


ROW = "0.1,1.0,0.001,1.8e-05,998.0,1.2,0.072,0.0,0.0254,{}"


class TestFlowPattern:
    def test_six_values_round_trip(self):
        assert len(FlowPattern) == 6
        for p in FlowPattern:
            assert FlowPattern.parse(str(p)) is p

    def test_unknown(self):
        with pytest.raises(ValueError):
            FlowPattern.parse("XX")


class TestFlowSample:
    @pytest.mark.parametrize("field,value", [
        ("vsl", 0.0), ("vsg", -1.0), ("visc_l", 0.0), ("diameter", 0.0),
        ("surface_tension", -0.1), ("angle", 90.5), ("angle", -91.0), ("vsl", math.nan),
        ("dens_g", 1000.0),
    ])
    def test_invariants(self, field, value):
        with pytest.raises(ValueError):
            sample(**{field: value})

    def test_valid(self):
        s = sample(angle=-90.0)
        assert s.feature_vector()[7] == -90.0


class TestDataset:
    def test_needs_two_labels(self):
        with pytest.raises(DataError):
            Dataset((sample("I"), sample("I")))
        with pytest.raises(DataError):
            Dataset(())

    def test_features_shape(self):
        d = Dataset((sample("I"), sample("A", vsg=20.0)))
        assert d.features.shape == (2, 9)
        assert d.features[1, 1] == 20.0


class TestLoadCsv:
    def test_three_rows_in_order(self, tmp_path):
        p = write_rows(tmp_path / "d.csv", [ROW.format("DB"), ROW.format("I"), ROW.format("SS")])
        d = load_csv(p)
        assert [str(l) for l in d.labels] == ["DB", "I", "SS"]

    def test_bad_label_names_row_and_token(self, tmp_path):
        p = write_rows(tmp_path / "d.csv", [ROW.format("DB"), ROW.format("XX")])
        with pytest.raises(LabelError) as exc:
            load_csv(p)
        assert exc.value.row == 3 and "XX" in str(exc.value)

    def test_missing_column(self, tmp_path):
        p = write_rows(tmp_path / "d.csv", ["0.1,DB"], header="vsl_m_s,label")
        with pytest.raises(SchemaError, match="vsg_m_s"):
            load_csv(p)

    def test_extra_column(self, tmp_path):
        p = write_rows(tmp_path / "d.csv", [ROW.format("DB") + ",1"], header=",".join(CSV_COLUMNS) + ",extra")
        with pytest.raises(SchemaError, match="extra"):
            load_csv(p)

    @pytest.mark.parametrize("bad", ["abc", "nan", "inf"])
    def test_non_numeric(self, tmp_path, bad):
        p = write_rows(tmp_path / "d.csv", [ROW.format("DB"), ROW.replace("0.1,", bad + ",", 1).format("I")])
        with pytest.raises(RowError, match="row 3"):
            load_csv(p)

    def test_invariant_violation_is_row_error(self, tmp_path):
        p = write_rows(tmp_path / "d.csv", [ROW.format("DB"), ROW.replace(",0.0,", ",120.0,").format("I")])
        with pytest.raises(RowError, match="angle"):
            load_csv(p)

    def test_round_trip_synthetic(self, tmp_path):
        data = synth_generate(seed=7, n=100)
        save_csv(data, tmp_path / "s.csv")
        back = load_csv(tmp_path / "s.csv")
        assert len(back) == len(data)
        for a, b in zip(data.samples, back.samples):
            assert a == b  # field-exact, floats included


class TestScaler:
    def test_constant_feature(self):
        x = np.full((4, 9), 5.0)
        s = fit_scaler(x)
        assert np.all(s.mean == 5.0) and np.all(s.scale == 1.0)
        assert np.all(apply_scaler(s, x) == 0.0)

    def test_two_values(self):
        x = np.array([[1.0] * 9, [3.0] * 9])
        s = fit_scaler(x)
        assert np.all(s.mean == 2.0) and np.all(s.scale == 1.0)

    def test_mean_sample_maps_to_zero(self):
        x = np.random.default_rng(0).normal(size=(20, 9))
        s = fit_scaler(x)
        assert np.allclose(apply_scaler(s, x.mean(axis=0)), 0.0, atol=1e-12)

    def test_identity_scaler(self):
        x = np.random.default_rng(1).normal(size=(5, 9))
        s = StandardScaler(np.zeros(9), np.ones(9))
        assert np.array_equal(apply_scaler(s, x), x)

    def test_empty(self):
        with pytest.raises(DataError):
            fit_scaler(np.empty((0, 9)))

    def test_rejects_nonpositive_scale(self):
        with pytest.raises(ValueError):
            StandardScaler(np.zeros(9), np.zeros(9))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 60))
    def test_standardized_moments_and_inverse(self, seed, n):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(n, 9)) * rng.uniform(0.01, 100, size=9) + rng.uniform(-50, 50, size=9)
        x[:, 3] = 7.25  # degenerate column
        s = fit_scaler(x)
        z = apply_scaler(s, x)
        live = [j for j in range(9) if j != 3]
        assert np.all(np.abs(z.mean(axis=0)) <= 1e-12 * max(1.0, np.abs(s.mean / s.scale).max()))
        assert np.all(np.abs(z[:, live].var(axis=0) - 1.0) <= 1e-9)
        assert np.all(z[:, 3] == 0.0)
        back = s.inverse(z)
        assert np.allclose(back, x, rtol=1e-12, atol=1e-12 * np.abs(x).max())


class TestRelabel:
    def test_examples(self):
        assert TEST2(FlowPattern.SW) == "ST"
        assert TEST3(FlowPattern.I) == "Intermittent"
        for p in FlowPattern:
            assert TEST1(p) == p.value

    @pytest.mark.parametrize("scheme,k", [(TEST1, 6), (TEST2, 5), (TEST3, 3)])
    def test_surjective_class_counts(self, scheme, k):
        images = {scheme(p) for p in FlowPattern}
        assert images == set(scheme.classes) and len(images) == k

    def test_lookup(self):
        assert LabelScheme.get("Test3") is TEST3
        with pytest.raises(ValueError):
            LabelScheme.get("test4")

    def test_size_and_features_preserved(self, small_data):
        for scheme in (TEST1, TEST2, TEST3):
            r = relabel(small_data, scheme)
            assert len(r) == len(small_data)
            assert np.array_equal(r.features, small_data.features)
        once = relabel(small_data, TEST1).labels
        assert once == tuple(TEST1(l) for l in once)  # idempotent

    def test_relabel_split_partitions(self, small_data):
        train, test = stratified_split(small_data, 0.25, seed=4)
        for scheme in (TEST2, TEST3):
            whole = Counter(zip(map(tuple, relabel(small_data, scheme).features),
                                relabel(small_data, scheme).labels))
            parts = Counter()
            for part in (train, test):
                r = relabel(part, scheme)
                parts.update(zip(map(tuple, r.features), r.labels))
            assert parts == whole


class TestSplit:
    def test_fifty_fifty(self):
        labels = ["a"] * 50 + ["b"] * 50
        train, test = split_indices(labels, 0.2, seed=0)
        assert Counter(labels[i] for i in test) == {"a": 10, "b": 10}

    def test_deterministic(self, small_data):
        a = stratified_split(small_data, 0.2, 11)
        b = stratified_split(small_data, 0.2, 11)
        assert a[0].samples == b[0].samples and a[1].samples == b[1].samples

    def test_clamping(self):
        labels = ["a"] * 2 + ["b"] * 3 + ["c"] * 40
        _, test = split_indices(labels, 0.2, 0)
        got = Counter(labels[i] for i in test)
        assert got == {"a": 1, "b": 1, "c": 8}
        _, test = split_indices(labels, 0.9, 0)
        got = Counter(labels[i] for i in test)
        assert got == {"a": 1, "b": 2, "c": 36}

    def test_singleton_class(self):
        with pytest.raises(DataError, match="class z"):
            split_indices(["a", "a", "z"], 0.5, 0)

    @pytest.mark.parametrize("f", [0.0, 1.0, -0.1])
    def test_bad_fraction(self, f):
        with pytest.raises(ValueError):
            split_indices(["a", "a", "b", "b"], f, 0)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.sampled_from("abcd"), min_size=8, max_size=80), st.floats(0.05, 0.95),
           st.integers(0, 1000))
    def test_partition(self, labels, fraction, seed):
        counts = Counter(labels)
        if min(counts.values()) < 2:
            return
        train, test = split_indices(labels, fraction, seed)
        assert not set(train) & set(test)
        assert sorted(train + test) == list(range(len(labels)))
        for c, n in counts.items():
            expect = min(max(math.floor(n * fraction + 0.5), 1), n - 1)
            assert sum(labels[i] == c for i in test) == expect

    def test_full_scale_test_size(self, full_scale):
        data, _, test = full_scale
        assert abs(len(test) - 1135) <= len(set(data.labels))


class TestFolds:
    def test_cover_once(self):
        labels = ["a"] * 17 + ["b"] * 9
        folds = stratified_folds(labels, 5, seed=2)
        flat = sorted(i for f in folds for i in f)
        assert flat == list(range(len(labels)))
        for f in folds:
            assert 3 <= sum(labels[i] == "a" for i in f) <= 4

    def test_class_too_small(self):
        with pytest.raises(DataError, match="class b"):
            stratified_folds(["a"] * 10 + ["b"] * 3, 5, 0)
