import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.datasets import make_moons

from pdvoice.learn.svm import kernel_matrix
from pdvoice.learn import (
    LEARNERS,
    AdaBoost,
    DecisionTree,
    GradientBoosting,
    KNeighbors,
    LearnerSpec,
    LogisticRegression,
    MajorityClass,
    NoImportancesError,
    RandomForest,
    SVC,
    decision_scores,
    dump_model,
    gini,
    importances,
    load_model,
    loss_and_grad,
    make_learner,
    smo,
)


def xor_data(n_per=25, noise=0.15, seed=0):
    r = np.random.default_rng(seed)
    centres = np.array([[1, 1], [-1, -1], [1, -1], [-1, 1]], dtype=float)
    X = np.vstack([c + noise * r.standard_normal((n_per, 2)) for c in centres])
    y = np.repeat([0, 0, 1, 1], n_per)
    return X, y


def blobs(n=60, d=3, gap=3.0, seed=0):
    r = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = r.standard_normal((n, d)) + gap * y[:, None]
    return X, y


# -- logistic regression -----------------------------------------------------------


def test_zero_score_is_half():
    m = LogisticRegression().fit(*blobs())
    m.coef_ = np.zeros_like(m.coef_)
    m.intercept_ = 0.0
    assert m.predict_proba(np.ones((1, 3)))[0, 1] == 0.5


def test_separable_clusters_fit_perfectly():
    X, y = blobs(gap=8.0)
    m = LogisticRegression(C=1.0).fit(X, y)
    assert (m.predict(X) == y).mean() == 1.0


def _fd_grad(theta, X, y, C, h=1e-6):
    g = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (loss_and_grad(theta + e, X, y, C)[0] - loss_and_grad(theta - e, X, y, C)[0]) / (2 * h)
    return g


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), C=st.floats(0.01, 100.0))
def test_gradient_matches_finite_differences(seed, C):
    r = np.random.default_rng(seed)
    X, y = r.standard_normal((40, 4)), r.integers(0, 2, 40)
    theta = r.standard_normal(5)
    g = loss_and_grad(theta, X, y, C)[1]
    fd = _fd_grad(theta, X, y, C)
    assert np.linalg.norm(g - fd) <= 1e-4 * max(np.linalg.norm(fd), 1e-8)


def test_gradient_vanishes_at_solution():
    X, y = blobs(gap=1.0, seed=3)
    m = LogisticRegression(C=1.0).fit(X, y)
    theta = np.append(m.coef_, m.intercept_)
    g = loss_and_grad(theta, X, y, 1.0)[1]
    assert np.max(np.abs(g)) < 1e-6
    np.testing.assert_allclose(_fd_grad(theta, X, y, 1.0), g, atol=1e-4)


def test_irls_loss_non_increasing():
    m = LogisticRegression(C=10.0).fit(*blobs(gap=1.5, seed=5))
    assert np.all(np.diff(m.loss_curve_) <= 1e-12)


def test_score_threshold_matches_probability_threshold():
    X, y = blobs(gap=1.0, seed=8)
    m = LogisticRegression().fit(X, y)
    np.testing.assert_array_equal(m.decision_function(X) > 0, m.predict_proba(X)[:, 1] > 0.5)
    np.testing.assert_array_equal(m.predict(X), (3.7 * m.decision_function(X) > 0).astype(int))


# -- trees ------------------------------------------------------------------------------


@pytest.mark.parametrize("p, g", [([1.0, 0.0], 0.0), ([0.5, 0.5], 0.5), ([0.25, 0.75], 0.375)])
def test_gini_values(p, g):
    assert gini(np.array([p]))[0] == pytest.approx(g, abs=1e-15)


def test_pure_node_not_split():
    m = DecisionTree().fit(np.arange(10.0)[:, None], np.ones(10, int))
    assert m.tree_.node_count == 1


def test_stump_recovers_threshold():
    x = np.sort(np.random.default_rng(0).uniform(0, 10, 200))
    y = (x > 3.7).astype(int)
    m = DecisionTree(max_depth=1).fit(x[:, None], y)
    t = m.tree_.threshold[0]
    below, above = x[x <= 3.7].max(), x[x > 3.7].min()
    assert below <= t <= above


def test_tree_invariant_to_monotone_transform():
    r = np.random.default_rng(1)
    X = r.standard_normal((150, 3))
    y = ((X[:, 0] > 0.2) ^ (X[:, 1] < -0.5)).astype(int)
    Xt = X.copy()
    Xt[:, 0] = np.exp(3 * Xt[:, 0])
    Q = r.standard_normal((80, 3))
    Qt = Q.copy()
    Qt[:, 0] = np.exp(3 * Qt[:, 0])
    a = DecisionTree(max_depth=4).fit(X, y).predict(Q)
    b = DecisionTree(max_depth=4).fit(Xt, y).predict(Qt)
    np.testing.assert_array_equal(a, b)


def test_ccp_pruning_shrinks_tree():
    X, y = make_moons(200, noise=0.3, random_state=0)
    full = DecisionTree().fit(X, y).tree_.reachable().sum()
    pruned = DecisionTree(ccp_alpha=0.01).fit(X, y).tree_.reachable().sum()
    assert pruned < full


# -- forests ---------------------------------------------------------------------------


def test_single_unbagged_tree_equals_cart():
    X, y = make_moons(120, noise=0.25, random_state=1)
    f = RandomForest(n_estimators=1, bootstrap=False, max_features=None, random_state=0).fit(X, y)
    t = DecisionTree(random_state=0).fit(X, y)
    Q = np.random.default_rng(2).uniform(-2, 3, (300, 2))
    np.testing.assert_array_equal(f.predict(Q), t.predict(Q))


def test_vote_fraction_thresholds_to_predict():
    X, y = make_moons(120, noise=0.3, random_state=2)
    f = RandomForest(n_estimators=25, random_state=0).fit(X, y)
    s = f.decision_function(X)
    assert np.all((s >= 0) & (s <= 1))
    np.testing.assert_array_equal(f.predict(X), (s > 0.5).astype(int))


def test_forest_beats_tree_on_moons():
    wins = 0
    for seed in range(10):
        X, y = make_moons(500, noise=0.35, random_state=seed)
        Xt, yt = make_moons(500, noise=0.35, random_state=seed + 100)
        tree = DecisionTree(random_state=seed).fit(X, y).score(Xt, yt)
        forest = RandomForest(n_estimators=50, random_state=seed).fit(X, y).score(Xt, yt)
        wins += forest >= tree
    assert wins >= 9


def test_forest_importances_normalised():
    X, y = make_moons(150, noise=0.3, random_state=3)
    imp = RandomForest(n_estimators=20, random_state=0).fit(X, y).feature_importances_
    assert imp.sum() == pytest.approx(1.0, abs=1e-9)


# -- gradient boosting ------------------------------------------------------------------


def test_zero_learning_rate_predicts_base_rate_class():
    X, y = blobs(n=50, seed=2)
    y[:10] = 1  # 30 PD vs 20 HC
    m = GradientBoosting(n_estimators=20, learning_rate=0.0).fit(X, y)
    assert np.all(m.predict(X) == 1)


def test_boosting_loss_non_increasing_and_solves_xor():
    X, y = xor_data()
    m = GradientBoosting(n_estimators=100, max_depth=2, random_state=0).fit(X, y)
    assert np.all(np.diff(m.train_loss_) <= 1e-12)
    assert (m.predict(X) == y).mean() >= 0.95


def test_stage_prefix_property():
    X, y = make_moons(100, noise=0.3, random_state=4)
    short = GradientBoosting(n_estimators=10, random_state=0).fit(X, y)
    long = GradientBoosting(n_estimators=30, random_state=0).fit(X, y)
    staged = list(long.staged_decision_function(X))
    np.testing.assert_allclose(staged[9], short.decision_function(X), rtol=0, atol=1e-12)


# -- adaboost -----------------------------------------------------------------------------


def test_perfect_base_learner_stops_after_one_stage():
    X = np.arange(20.0)[:, None]
    y = (X[:, 0] > 9).astype(int)
    m = AdaBoost(n_estimators=10).fit(X, y)
    assert len(m.estimators_) == 1
    assert m.estimator_errors_ == [0.0]


def test_first_error_is_unweighted_error_rate():
    X, y = make_moons(100, noise=0.3, random_state=5)
    m = AdaBoost(n_estimators=3).fit(X, y)
    stump = DecisionTree(max_depth=1, random_state=0).fit(X, y)
    assert m.estimator_errors_[0] == pytest.approx(np.mean(stump.predict(X) != y), abs=1e-12)


def test_three_interval_boosting_progress():
    # a two-stump vote follows the heavier stump, so the 0/1 error cannot drop at
    # stage 2 (1/3, 1/3, 0 here); the exponential loss it minimises does drop each stage
    x = np.linspace(0, 3, 90, endpoint=False)
    y = ((x >= 1) & (x < 2)).astype(int)
    m = AdaBoost(n_estimators=3).fit(x[:, None], y)
    errs = [np.mean(p != y) for p in m.staged_predict(x[:, None])]
    assert errs == pytest.approx([1 / 3, 1 / 3, 0.0])
    ys = np.where(y == 1, 1.0, -1.0)
    F, exp_loss = np.zeros(y.size), []
    for est, a in zip(m.estimators_, m.estimator_weights_):
        F += a * np.where(est.predict(x[:, None]) == 1, 1.0, -1.0)
        exp_loss.append(np.mean(np.exp(-ys * F)))
    assert exp_loss[0] > exp_loss[1] > exp_loss[2]


# -- knn ----------------------------------------------------------------------------------


def test_query_on_training_point_k1():
    X, y = blobs(n=20, seed=6)
    m = KNeighbors(n_neighbors=1).fit(X, y)
    assert m.predict(X[3:4])[0] == y[3]
    assert m.decision_function(X[3:4])[0] in (0.0, 1.0)


def test_distance_weighted_hand_example():
    m = KNeighbors(n_neighbors=2, weights="distance", p=2).fit(np.array([[0.0, 1.0], [3.0, 4.0]]), [1, 0])
    dist, _ = m.kneighbors(np.zeros((1, 2)))
    np.testing.assert_allclose(dist[0], [1.0, 5.0])
    score = m.decision_function(np.zeros((1, 2)))[0]
    assert score == pytest.approx((1 / (1 + 1e-12)) / (1 / (1 + 1e-12) + 1 / (5 + 1e-12)), rel=1e-12)
    assert m.predict(np.zeros((1, 2)))[0] == 1


def test_metric_changes_nearest_neighbour():
    X = np.array([[2.0, 0.0], [1.3, 1.3]])  # L2: 2.0 vs 1.84; L1: 2.0 vs 2.6
    y = [0, 1]
    q = np.zeros((1, 2))
    assert KNeighbors(n_neighbors=1, p=2).fit(X, y).predict(q)[0] == 1
    assert KNeighbors(n_neighbors=1, p=1).fit(X, y).predict(q)[0] == 0


# -- svm ----------------------------------------------------------------------------------


def test_two_point_analytic_solution():
    m = SVC(C=1e6, kernel="linear").fit(np.array([[-1.0], [1.0]]), [0, 1])
    assert m.coef_[0] == pytest.approx(1.0, abs=1e-6)
    assert m.intercept_ == pytest.approx(0.0, abs=1e-6)
    assert sorted(m.support_.tolist()) == [0, 1]


@pytest.mark.parametrize("kernel", ["linear", "rbf", "poly"])
def test_dual_feasibility(kernel):
    X, y = make_moons(80, noise=0.3, random_state=6)
    m = SVC(C=2.0, kernel=kernel).fit(X, y)
    ys = np.where(y == 1, 1.0, -1.0)
    assert abs(np.sum(m.alpha_ * ys)) < 1e-6
    assert np.all((m.alpha_ >= 0) & (m.alpha_ <= 2.0))


def test_xor_linear_vs_rbf():
    X, y = xor_data()
    lin = (SVC(C=10.0, kernel="linear").fit(X, y).predict(X) == y).mean()
    rbf = (SVC(C=10.0, kernel="rbf").fit(X, y).predict(X) == y).mean()
    assert lin <= 0.75
    assert rbf == 1.0


def test_removing_non_support_point_keeps_scores():
    X, y = make_moons(80, noise=0.2, random_state=7)
    m = SVC(C=1.0, kernel="rbf", gamma=1.0, tol=1e-6).fit(X, y)
    idle = np.flatnonzero(m.alpha_ == 0)[0]
    keep = np.arange(y.size) != idle
    m2 = SVC(C=1.0, kernel="rbf", gamma=1.0, tol=1e-6).fit(X[keep], y[keep])
    grid = np.random.default_rng(0).uniform(-1.5, 2.5, (50, 2))
    np.testing.assert_allclose(m.decision_function(grid), m2.decision_function(grid), atol=1e-6)


def test_poly_kernel_offset():
    A = np.array([[1.0, 2.0]])
    B = np.array([[3.0, -1.0]])
    assert kernel_matrix(A, B, "poly", 0.5, 3)[0, 0] == pytest.approx((0.5 * 1.0 + 1) ** 3)


def test_smo_returns_box_feasible_alphas():
    r = np.random.default_rng(9)
    X = r.standard_normal((30, 2))
    ys = np.where(X[:, 0] + 0.3 * r.standard_normal(30) > 0, 1.0, -1.0)
    alpha, rho, it = smo(X @ X.T, ys, 0.5)
    assert np.all((alpha >= 0) & (alpha <= 0.5))
    assert abs(alpha @ ys) < 1e-9


# -- dummy / shared API ------------------------------------------------------------------------


def test_majority_class():
    m = MajorityClass().fit(np.zeros((5, 1)), [1, 1, 1, 0, 0])
    assert m.predict(np.zeros((3, 1))).tolist() == [1, 1, 1]


@pytest.mark.parametrize("algorithm", sorted(LEARNERS))
def test_deterministic_and_roundtrip(algorithm, tmp_path):
    X, y = make_moons(60, noise=0.3, random_state=8)
    params = {"n_estimators": 10} if algorithm in ("forest", "gboost", "adaboost") else {}
    spec = LearnerSpec(algorithm, params, seed=3)
    a = make_learner(spec).fit(X, y)
    b = make_learner(spec).fit(X, y)
    np.testing.assert_array_equal(decision_scores(a, X), decision_scores(b, X))
    model, spec2 = load_model(dump_model(a, spec, tmp_path / "m.json"))
    assert spec2 == spec
    np.testing.assert_array_equal(decision_scores(model, X), decision_scores(a, X))
    np.testing.assert_array_equal(model.predict(X), a.predict(X))
    assert clone(a).get_params() == a.get_params()


@pytest.mark.parametrize("algorithm", ["knn", "svm", "dummy"])
def test_no_importances(algorithm):
    X, y = blobs()
    with pytest.raises(NoImportancesError):
        importances(make_learner(LearnerSpec(algorithm)).fit(X, y))


def test_spec_validation():
    with pytest.raises(ValueError, match="unknown learner"):
        LearnerSpec("boosted-bananas")
    with pytest.raises(ValueError, match="unknown hyperparameters"):
        LearnerSpec("svm", {"n_estimators": 3})
    assert LearnerSpec("svm", {"C": 2}).with_params(C=5).params["C"] == 5


def test_non_binary_target_rejected():
    with pytest.raises(ValueError, match="two classes"):
        LogisticRegression().fit(np.zeros((3, 1)), ["a", "b", "c"])
