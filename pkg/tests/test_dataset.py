import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdvoice.dataset import (
    FeatureTable,
    SchemaError,
    Standardizer,
    apply_standardizer,
    build_table,
    encode_label,
    fit_standardizer,
    group_stats,
    read_csv,
    write_csv,
)
from pdvoice.features import FEATURE_NAMES, FeatureVector

from .conftest import random_table


def _vec(speaker, label, seed=0, idx=0):
    return FeatureVector(np.random.default_rng(seed).standard_normal(71), speaker, label, idx)


def test_build_table_counts():
    vecs = [_vec(f"s{i % 120}", "PD" if (i % 120) < 60 else "HC", i) for i in range(900)]
    t = build_table(vecs)
    assert t.shape == (900, 71)
    assert np.unique(t.groups).size == 120
    assert t.column_names == FEATURE_NAMES


def test_single_vector_table():
    assert build_table([_vec("a", "HC")]).shape == (1, 71)


def test_speaker_with_both_labels_rejected():
    with pytest.raises(SchemaError, match="both labels"):
        build_table([_vec("a", "PD"), _vec("a", "HC", 1)])


def test_empty_and_nonfinite_rejected():
    with pytest.raises(SchemaError):
        build_table([])
    with pytest.raises(SchemaError):
        FeatureTable(np.array([[np.nan]]), ["x"], ["a"], [1])


@pytest.mark.parametrize("raw, code", [("PD", 1), ("HC", 0), ("1", 1), ("0", 0), ("1.0", 1), (0, 0)])
def test_label_encoding(raw, code):
    assert encode_label(raw) == code


def test_bad_label():
    with pytest.raises(SchemaError):
        encode_label("maybe")


def test_standardizer_centres_fit_rows():
    t = random_table(d=4, seed=1)
    s = fit_standardizer(t)
    z = apply_standardizer(s, t).matrix
    assert np.all(np.abs(z.mean(axis=0)) < 1e-9)


def test_constant_column_passes_through_flagged():
    X = np.column_stack([np.arange(5.0), np.full(5, 3.0)])
    s = Standardizer().fit(X)
    assert s.constant_.tolist() == [False, True]
    np.testing.assert_array_equal(s.transform(X)[:, 1], X[:, 1])


def test_train_fit_leaves_test_uncentred():
    t = random_table(d=6, seed=2)
    train = np.arange(t.shape[0]) < 30
    s = fit_standardizer(t, train)
    z = s.transform(t.matrix[~train])
    assert np.any(np.abs(z.mean(axis=0)) > 1e-3)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_standardization_keeps_correlations(seed):
    X = np.random.default_rng(seed).standard_normal((30, 4)) * [1, 5, 0.1, 100] + [0, 3, -2, 50]
    Z = Standardizer().fit_transform(X)
    np.testing.assert_allclose(np.corrcoef(X.T), np.corrcoef(Z.T), atol=1e-9)


def test_group_stats_null_and_shift():
    same = random_table(n_groups=100, per_group=1, d=3, seed=4)
    # identical class distributions: mirror PD rows into HC rows
    X = same.matrix.copy()
    X[same.labels == 0] = X[same.labels == 1]
    null = group_stats(FeatureTable(X, same.column_names, same.groups, same.labels))
    assert np.all(null.p_value > 0.5)
    shifted = group_stats(random_table(n_groups=100, per_group=1, d=3, seed=5, shift=3.0))
    assert np.all(shifted.p_value < 0.001)


def test_group_stats_permutation_invariant():
    t = random_table(seed=6)
    perm = np.random.default_rng(0).permutation(t.shape[0])
    a, b = group_stats(t), group_stats(t.subset_rows(perm))
    np.testing.assert_allclose(a.p_value, b.p_value, rtol=1e-12)
    np.testing.assert_allclose(a.pd_mean, b.pd_mean, rtol=1e-12)


def test_group_stats_needs_both_classes():
    t = random_table()
    with pytest.raises(SchemaError):
        group_stats(t.subset_rows(t.labels == 1))


def test_csv_roundtrip(tmp_path):
    r = np.random.default_rng(7)
    t = FeatureTable(r.standard_normal((10, 71)) * 1e3, FEATURE_NAMES, [f"s{i}" for i in range(10)], [i % 2 for i in range(10)])
    write_csv(t, tmp_path / "t.csv")
    back = read_csv(tmp_path / "t.csv")
    assert np.max(np.abs(back.matrix - t.matrix)) < 1e-10
    assert back.column_names == t.column_names
    assert back.groups.tolist() == t.groups.tolist()


def test_missing_label_column(tmp_path):
    (tmp_path / "t.csv").write_text("speaker_id,a\nx,1\n")
    with pytest.raises(SchemaError, match="label"):
        read_csv(tmp_path / "t.csv")


def test_uci_style_width(tmp_path):
    names = ["id", "gender"] + [f"f{i}" for i in range(751)] + ["class"]
    lines = [",".join(names)]
    for i in range(4):
        lines.append(",".join([str(i)] + ["0.5"] * 752 + [str(i % 2)]))
    (tmp_path / "u.csv").write_text("\n".join(lines) + "\n")
    t = read_csv(tmp_path / "u.csv", "id", "class")
    assert t.shape == (4, 752)


def test_non_numeric_cell(tmp_path):
    (tmp_path / "t.csv").write_text("speaker_id,label,a\nx,PD,abc\n")
    with pytest.raises(SchemaError, match="non-numeric"):
        read_csv(tmp_path / "t.csv")
