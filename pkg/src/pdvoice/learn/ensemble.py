"""Random forest, gradient boosting (logistic loss) and SAMME AdaBoost."""

from __future__ import annotations

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import check_binary_target
from .tree import DecisionTree, RegressionTree, Tree, build_tree


def _base_seed(random_state) -> int:
    if random_state is None:
        return int(np.random.default_rng().integers(2**31))
    return int(random_state)


class RandomForest(ClassifierMixin, BaseEstimator):
    """Bagged CART trees with per-split feature subsampling and majority voting.

    Tree ``i`` draws its bootstrap sample and feature subsets from the seed
    ``random_state + i``, so results do not depend on training order.
    """

    def __init__(
        self,
        n_estimators=100,
        max_features="sqrt",
        bootstrap=True,
        max_depth=None,
        min_samples_split=2,
        min_samples_leaf=1,
        criterion="gini",
        random_state=None,
    ):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.criterion = criterion
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None):
        X, y = check_X_y(X, y)
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        y = check_binary_target(self, y)
        n = y.size
        base_w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        seed = _base_seed(self.random_state)
        self.trees_ = []
        for i in range(self.n_estimators):
            rng = np.random.default_rng(seed + i)
            if self.bootstrap:
                counts = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.float64)
            else:
                counts = np.ones(n)
            rows = np.flatnonzero(counts > 0)
            stats = np.zeros((rows.size, 2))
            stats[np.arange(rows.size), y[rows]] = counts[rows] * base_w[rows]
            self.trees_.append(
                build_tree(
                    X[rows],
                    stats,
                    self.criterion,
                    self.max_depth,
                    self.min_samples_split,
                    self.min_samples_leaf,
                    self.max_features,
                    rng,
                )
            )
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        """Fraction of trees voting PD."""
        check_is_fitted(self, "trees_")
        X = check_array(X)
        votes = np.zeros(X.shape[0])
        for t in self.trees_:
            votes += t.predict(X)[:, 1] > 0.5
        return votes / len(self.trees_)

    def predict_proba(self, X):
        s = self.decision_function(X)
        return np.column_stack([1 - s, s])

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0.5).astype(int)]

    @property
    def feature_importances_(self):
        check_is_fitted(self, "trees_")
        imp = np.mean([t.feature_importances() for t in self.trees_], axis=0)
        total = imp.sum()
        return imp / total if total > 0 else imp


class GradientBoosting(ClassifierMixin, BaseEstimator):
    """Binary gradient boosting on the logistic loss.

    ``F_0`` is the base-rate log-odds. Stage ``m`` fits a least-squares tree
    to the residuals ``y - p`` on a row subsample, replaces each leaf value by
    one Newton step ``sum(r) / sum(p(1-p))`` and updates
    ``F_m = F_{m-1} + learning_rate * h_m``.
    """

    def __init__(
        self,
        n_estimators=100,
        learning_rate=0.1,
        max_depth=3,
        subsample=1.0,
        min_samples_split=2,
        min_samples_leaf=1,
        max_features=None,
        random_state=None,
    ):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.subsample = subsample
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if not 0 < self.subsample <= 1:
            raise ValueError("subsample must lie in (0, 1]")
        y = check_binary_target(self, y).astype(np.float64)
        n = y.size
        prior = np.clip(y.mean(), 1e-12, 1 - 1e-12)
        self.init_score_ = float(np.log(prior / (1 - prior)))
        F = np.full(n, self.init_score_)
        rng = np.random.default_rng(_base_seed(self.random_state))
        self.trees_ = []
        self.train_loss_ = [self._loss(y, F)]
        n_sub = max(1, int(round(self.subsample * n)))
        for _ in range(self.n_estimators):
            rows = np.sort(rng.choice(n, n_sub, replace=False)) if n_sub < n else np.arange(n)
            p = expit(F)
            resid = y - p
            stats = np.column_stack([np.ones(rows.size), resid[rows], resid[rows] ** 2])
            tree = build_tree(
                X[rows],
                stats,
                "squared_error",
                self.max_depth,
                self.min_samples_split,
                self.min_samples_leaf,
                self.max_features,
                rng,
            )
            leaf = tree.apply(X[rows])
            num = np.bincount(leaf, weights=resid[rows], minlength=tree.node_count)
            den = np.bincount(leaf, weights=(p * (1 - p))[rows], minlength=tree.node_count)
            newton = np.where(den > 1e-150, num / np.maximum(den, 1e-150), 0.0)
            value = tree.value.copy()
            used = np.unique(leaf)
            value[used, 0] = newton[used]
            tree.value = value
            self.trees_.append(tree)
            F = F + self.learning_rate * tree.predict(X)[:, 0]
            self.train_loss_.append(self._loss(y, F))
        self.n_features_in_ = X.shape[1]
        return self

    @staticmethod
    def _loss(y, F):
        return float(np.mean(np.logaddexp(0.0, F) - y * F))

    def staged_decision_function(self, X):
        X = check_array(X)
        F = np.full(X.shape[0], self.init_score_)
        for t in self.trees_:
            F = F + self.learning_rate * t.predict(X)[:, 0]
            yield F

    def decision_function(self, X):
        """Additive score ``F(x)`` (log-odds of PD)."""
        check_is_fitted(self, "trees_")
        X = check_array(X)
        F = np.full(X.shape[0], self.init_score_)
        for t in self.trees_:
            F += self.learning_rate * t.predict(X)[:, 0]
        return F

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1 - p, p])

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0).astype(int)]

    @property
    def feature_importances_(self):
        check_is_fitted(self, "trees_")
        if not self.trees_:
            return np.zeros(self.n_features_in_)
        imp = np.mean([t.feature_importances() for t in self.trees_], axis=0)
        total = imp.sum()
        return imp / total if total > 0 else imp


BASE_LEARNERS = {
    "stump": lambda seed: DecisionTree(max_depth=1, random_state=seed),
    "tree2": lambda seed: DecisionTree(max_depth=2, random_state=seed),
    "rf100": lambda seed: RandomForest(n_estimators=100, random_state=seed),
    "rf300": lambda seed: RandomForest(n_estimators=300, random_state=seed),
}


class AdaBoost(ClassifierMixin, BaseEstimator):
    """Binary SAMME boosting.

    Stage weight ``learning_rate * ln((1 - err) / err)``; misclassified rows
    are up-weighted by ``exp(stage weight)`` and weights renormalised.
    Boosting stops when a stage's weighted error is 0 (that stage is kept
    with weight 1) or reaches 0.5 (that stage is discarded).

    ``estimator`` is a name from ``BASE_LEARNERS`` or an unfitted estimator
    accepting ``sample_weight``.
    """

    def __init__(self, n_estimators=50, learning_rate=1.0, estimator="stump", random_state=None):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.estimator = estimator
        self.random_state = random_state

    def _make_base(self, seed):
        if isinstance(self.estimator, str):
            try:
                return BASE_LEARNERS[self.estimator](seed)
            except KeyError:
                raise ValueError(f"unknown base learner {self.estimator!r}") from None
        est = clone(self.estimator)
        if "random_state" in est.get_params():
            est.set_params(random_state=seed)
        return est

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y = check_binary_target(self, y)
        n = y.size
        w = np.full(n, 1.0 / n)
        seed = _base_seed(self.random_state)
        self.estimators_, self.estimator_weights_, self.estimator_errors_ = [], [], []
        for m in range(self.n_estimators):
            est = self._make_base(seed + m).fit(X, y, sample_weight=w)
            miss = est.predict(X) != y
            err = float(np.sum(w[miss]) / np.sum(w))
            if err <= 0:
                self.estimators_.append(est)
                self.estimator_weights_.append(1.0)
                self.estimator_errors_.append(0.0)
                break
            if err >= 0.5:
                if not self.estimators_:
                    self.estimators_.append(est)
                    self.estimator_weights_.append(1.0)
                    self.estimator_errors_.append(err)
                break
            alpha = self.learning_rate * np.log((1 - err) / err)
            self.estimators_.append(est)
            self.estimator_weights_.append(float(alpha))
            self.estimator_errors_.append(err)
            w = w * np.exp(alpha * miss)
            w /= w.sum()
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        """Stage-weighted vote ``sum_m alpha_m * (+1 PD / -1 HC)``, normalised by ``sum alpha``."""
        check_is_fitted(self, "estimators_")
        X = check_array(X)
        score = np.zeros(X.shape[0])
        for est, a in zip(self.estimators_, self.estimator_weights_):
            score += a * np.where(est.predict(X) == self.classes_[1], 1.0, -1.0)
        return score / np.sum(self.estimator_weights_)

    def staged_predict(self, X):
        X = check_array(X)
        score = np.zeros(X.shape[0])
        for est, a in zip(self.estimators_, self.estimator_weights_):
            score += a * np.where(est.predict(X) == self.classes_[1], 1.0, -1.0)
            yield self.classes_[(score > 0).astype(int)]

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0).astype(int)]

    @property
    def feature_importances_(self):
        check_is_fitted(self, "estimators_")
        imps = np.array([e.feature_importances_ for e in self.estimators_])
        imp = np.average(imps, axis=0, weights=self.estimator_weights_)
        total = imp.sum()
        return imp / total if total > 0 else imp


__all__ = ["AdaBoost", "GradientBoosting", "RandomForest", "RegressionTree", "Tree"]
