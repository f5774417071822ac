import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdvoice.dataset import FeatureTable
from pdvoice.evaluation import (
    ConfusionMatrix,
    EvalReport,
    SearchSpace,
    cross_validate,
    group_kfold,
    metrics,
    nested_search,
    random_search,
    roc_auc,
    row_kfold,
    t_interval,
)
from pdvoice.learn import LearnerSpec
from pdvoice.select import mann_whitney_u

from .conftest import random_table


# -- folds -----------------------------------------------------------------------------


def test_120_groups_ten_folds():
    groups = [f"s{i}" for i in range(120)]
    plan = group_kfold(groups, [i % 2 for i in range(120)], 10, 0)
    sizes = [len(plan.test_groups(f)) for f in range(10)]
    assert sizes == [12] * 10


def test_balanced_class_groups_per_fold():
    groups = np.array([f"s{i}" for i in range(120)])
    labels = np.array([1] * 60 + [0] * 60)
    plan = group_kfold(groups, labels, 10, 3)
    fold = plan.fold_of(groups)
    for f in range(10):
        assert labels[fold == f].sum() == 6
        assert (fold == f).sum() == 12


@settings(max_examples=40, deadline=None)
@given(n_groups=st.integers(4, 40), k=st.integers(2, 4), seed=st.integers(0, 999), reps=st.integers(1, 4))
def test_plan_partitions_groups(n_groups, k, seed, reps):
    groups = np.repeat([f"g{i}" for i in range(n_groups)], reps)
    labels = np.repeat(np.random.default_rng(seed).integers(0, 2, n_groups), reps)
    plan = group_kfold(groups, labels, k, seed)
    seen = set()
    for f, (tr, te) in enumerate(plan.split(groups)):
        test_g = set(groups[te])
        assert not test_g & set(groups[tr])
        assert not test_g & seen
        seen |= test_g
    assert seen == set(groups)


def test_too_many_folds():
    with pytest.raises(ValueError):
        group_kfold(["a", "b"], [0, 1], 3)


def test_row_kfold_covers_rows():
    plan = row_kfold(25, np.arange(25) % 2, 5, 0)
    tests = np.concatenate([te for _, te in plan.split(np.arange(25).astype(str))])
    assert sorted(tests.tolist()) == list(range(25))


# -- metrics -------------------------------------------------------------------------------


def test_hand_confusion_matrix():
    m = metrics(ConfusionMatrix(tp=9, fp=2, tn=8, fn=1))
    assert m.accuracy == 17 / 20 == 0.85
    assert m.precision == 9 / 11
    assert round(m.precision, 4) == 0.8182
    assert m.recall == 0.9
    assert round(m.f1, 4) == 0.8571
    assert m.specificity == 0.8


def test_perfect_classifier():
    m = metrics(ConfusionMatrix(5, 0, 7, 0))
    assert (m.accuracy, m.precision, m.recall, m.f1, m.specificity) == (1.0,) * 5


def test_no_positives_flagged():
    m = metrics(ConfusionMatrix(tp=0, fp=3, tn=7, fn=0))
    assert m.recall == 0.0
    assert "recall:zero-division" in m.flags
    assert m.accuracy == 7 / 10


@settings(max_examples=200)
@given(*(st.integers(0, 50) for _ in range(4)))
def test_metric_identities(tp, fp, tn, fn):
    if tp + fp + tn + fn == 0:
        return
    m = metrics(ConfusionMatrix(tp, fp, tn, fn))
    assert m.accuracy == (tp + tn) / (tp + fp + tn + fn)
    if m.precision + m.recall > 0:
        assert m.f1 == pytest.approx(2 * m.precision * m.recall / (m.precision + m.recall), abs=1e-12)


# -- ROC / AUC -------------------------------------------------------------------------------


def test_separated_scores():
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])[0] == 1.0


def test_random_scores_near_half():
    r = np.random.default_rng(0)
    auc, _ = roc_auc(r.random(1000), r.integers(0, 2, 1000))
    assert abs(auc - 0.5) <= 0.05


@pytest.mark.parametrize("tied", [False, True])
def test_auc_equals_scaled_u(tied):
    r = np.random.default_rng(1 + tied)
    for _ in range(100):
        n = int(r.integers(4, 60))
        y = r.integers(0, 2, n)
        y[:2] = [0, 1]
        s = r.integers(0, 5, n).astype(float) if tied else r.standard_normal(n)
        auc, _ = roc_auc(s, y)
        n1, n2 = int(y.sum()), int((1 - y).sum())
        assert auc == pytest.approx(mann_whitney_u(s[y == 1], s[y == 0]).U1 / (n1 * n2), abs=1e-9)
        # with the negatives as the first sample: AUC n1 n2 + U1 = n1 n2
        assert auc * n1 * n2 + mann_whitney_u(s[y == 0], s[y == 1]).U1 == pytest.approx(n1 * n2, abs=1e-9)


def test_roc_monotone():
    r = np.random.default_rng(3)
    _, (fpr, tpr, thr) = roc_auc(r.integers(0, 4, 50), r.integers(0, 2, 50) | np.eye(1, 50, 0, dtype=int)[0])
    assert fpr[0] == tpr[0] == 0 and fpr[-1] == tpr[-1] == 1
    assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)


def test_t_interval():
    m, h = t_interval([0.8, 0.9, 1.0])
    assert m == pytest.approx(0.9)
    assert h == pytest.approx(4.302652729911275 * 0.1 / math.sqrt(3), rel=1e-9)
    assert t_interval([0.5]) == (0.5, 0.0)


# -- cross-validation ---------------------------------------------------------------------------


def test_dummy_on_balanced_data():
    t = random_table(n_groups=40, per_group=2, d=3, seed=0)
    rep = cross_validate(LearnerSpec("dummy"), t, group_kfold(t.groups, t.labels, 10, 0))
    assert rep.mean("accuracy") == pytest.approx(0.5, abs=0.1)
    cm = rep.confusion
    assert cm.tp / (cm.tp + cm.fn) + cm.tn / (cm.tn + cm.fp) == pytest.approx(1.0)


def leakage_table(n_groups=100, per_group=5, seed=0):
    """Each speaker has its own feature centroid and a coin-flip label unrelated to it."""
    r = np.random.default_rng(seed)
    centres = r.standard_normal((n_groups, 4)) * 3
    labels = r.permutation(np.arange(n_groups) % 2)
    X = np.repeat(centres, per_group, axis=0) + 0.05 * r.standard_normal((n_groups * per_group, 4))
    groups = np.repeat([f"s{i}" for i in range(n_groups)], per_group)
    return FeatureTable(X, [f"x{j}" for j in range(4)], groups, np.repeat(labels, per_group))


def test_group_plan_blocks_identity_leak():
    t = leakage_table()
    spec = LearnerSpec("knn", {"n_neighbors": 1})
    grouped = cross_validate(spec, t, group_kfold(t.groups, t.labels, 10, 0)).mean("accuracy")
    by_row = FeatureTable(t.matrix, t.column_names, [str(i) for i in range(t.shape[0])], t.labels)
    rowwise = cross_validate(spec, by_row, row_kfold(t.shape[0], t.labels, 10, 0)).mean("accuracy")
    assert 0.4 <= grouped <= 0.6
    assert rowwise >= 0.9


def test_parallel_matches_serial():
    t = random_table(n_groups=30, per_group=2, d=4, seed=1, shift=1.0)
    plan = group_kfold(t.groups, t.labels, 5, 0)
    spec = LearnerSpec("forest", {"n_estimators": 10}, 3)
    a, b = cross_validate(spec, t, plan), cross_validate(spec, t, plan, n_jobs=2)
    assert a.summary == b.summary
    assert [f.confusion for f in a.folds] == [f.confusion for f in b.folds]


def test_single_class_test_fold_flags_auc():
    groups = np.array(["a", "b", "c", "d", "e", "f"])
    labels = np.array([1, 1, 1, 1, 0, 0])  # 2 HC groups over 3 folds: one fold is PD-only
    t = FeatureTable(np.arange(12.0).reshape(6, 2), ["x", "y"], groups, labels)
    rep = cross_validate(LearnerSpec("logreg"), t, group_kfold(groups, labels, 3, 0))
    assert any("auc-undefined" in f for f in rep.flags)
    assert np.isfinite(rep.mean("accuracy"))


def test_report_exports(tmp_path):
    t = random_table(n_groups=20, per_group=2, d=3, seed=2, shift=1.0)
    rep = cross_validate(LearnerSpec("logreg"), t, group_kfold(t.groups, t.labels, 4, 0))
    rep.write_csv(tmp_path / "e.csv", {"config_hash": "h"})
    rows = list(csv.DictReader(open(tmp_path / "e.csv")))
    assert [r["fold"] for r in rows] == ["0", "1", "2", "3", "mean", "ci95"]
    assert all(r["config_hash"] == "h" for r in rows)
    assert EvalReport.table_header().split("\t")[1:] == ["accuracy", "auc", "f1", "precision", "recall", "specificity"]
    assert rep.table_row().count("±") == 6


# -- search ----------------------------------------------------------------------------------------


def test_space_of_one():
    t = random_table(n_groups=20, per_group=1, d=3, seed=3, shift=1.0)
    space = SearchSpace("logreg", {"C": [0.5]})
    res = random_search(space, t, group_kfold(t.groups, t.labels, 4, 0), n_iter=5, seed=0)
    assert dict(res.best.params) == {"C": 0.5}
    assert len(res.records) == 1


def test_best_score_is_max():
    t = random_table(n_groups=30, per_group=1, d=3, seed=4, shift=0.7)
    space = SearchSpace("knn", {"n_neighbors": [1, 3, 5, 7], "weights": ["uniform", "distance"]})
    res = random_search(space, t, group_kfold(t.groups, t.labels, 5, 0), n_iter=8, seed=1)
    scores = [m for _, m, _ in res.records]
    assert res.best_score == max(scores)
    first_best = scores.index(max(scores))
    assert dict(res.best.params) == res.records[first_best][0]


def test_sampling_without_replacement():
    space = SearchSpace.default("svm")
    picks = space.sample(40, seed=0)
    assert len({tuple(sorted(c.items())) for c in picks}) == 40
    assert all(space.config(i) in [space.config(j) for j in range(space.size)] for i in range(3))
    assert space.sample(40, seed=0) == picks


def test_invalid_configs_skipped():
    t = random_table(n_groups=10, per_group=1, d=2, seed=5, shift=2.0)
    space = SearchSpace("knn", {"n_neighbors": [3, 50]})
    res = random_search(space, t, group_kfold(t.groups, t.labels, 2, 0), n_iter=2, seed=0)
    assert dict(res.best.params) == {"n_neighbors": 3}
    assert len(res.flags) == 1


def test_bad_space():
    with pytest.raises(ValueError):
        SearchSpace("svm", {"C": []})
    with pytest.raises(ValueError):
        SearchSpace("svm", {"nonsense": [1]})


@pytest.mark.parametrize("algorithm", ["logreg", "tree", "forest", "gboost", "adaboost", "knn", "svm"])
def test_default_spaces_build(algorithm):
    space = SearchSpace.default(algorithm)
    for i in (0, space.size - 1):
        LearnerSpec(algorithm, space.config(i))


def test_nested_search_shapes():
    t = random_table(n_groups=24, per_group=1, d=3, seed=6, shift=1.5)
    accs, bests = nested_search(SearchSpace("logreg", {"C": [0.1, 1.0]}), t, group_kfold(t.groups, t.labels, 3, 0), 2, 0)
    assert accs.shape == (3,) and len(bests) == 3
