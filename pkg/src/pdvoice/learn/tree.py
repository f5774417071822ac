"""CART decision trees (classification and regression) with cost-complexity pruning."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import check_binary_target, resolve_max_features

LEAF = -1


class Tree:
    """Flat array representation of a fitted binary tree.

    ``value[i]`` holds class proportions (classification) or the leaf output
    (regression); ``weight[i]`` the weighted sample count reaching node ``i``.
    """

    def __init__(self, feature, threshold, left, right, value, impurity, weight, n_features):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)
        self.impurity = np.asarray(impurity, dtype=np.float64)
        self.weight = np.asarray(weight, dtype=np.float64)
        self.n_features = int(n_features)

    @property
    def node_count(self) -> int:
        return self.feature.size

    def apply(self, X) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.left[node] != LEAF
        while np.any(active):
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.left[node] != LEAF
        return node

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def reachable(self) -> np.ndarray:
        seen = np.zeros(self.node_count, dtype=bool)
        stack = [0]
        while stack:
            i = stack.pop()
            seen[i] = True
            if self.left[i] != LEAF:
                stack += [self.left[i], self.right[i]]
        return seen

    def feature_importances(self) -> np.ndarray:
        """Total weighted impurity decrease per feature, normalised to sum to 1."""
        imp = np.zeros(self.n_features)
        root_w = self.weight[0]
        for i in np.flatnonzero(self.reachable() & (self.left != LEAF)):
            l, r = self.left[i], self.right[i]
            gain = (
                self.weight[i] * self.impurity[i]
                - self.weight[l] * self.impurity[l]
                - self.weight[r] * self.impurity[r]
            ) / root_w
            imp[self.feature[i]] += max(gain, 0.0)
        total = imp.sum()
        return imp / total if total > 0 else imp

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "impurity": self.impurity.tolist(),
            "weight": self.weight.tolist(),
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, d) -> "Tree":
        return cls(**d)


def gini(p: np.ndarray) -> np.ndarray:
    """Gini impurity ``1 - sum p_i^2`` along the last axis."""
    return 1.0 - np.sum(p * p, axis=-1)


def entropy(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, p * np.log2(p), 0.0)
    return -np.sum(t, axis=-1)


_CLASS_CRITERIA = {"gini": gini, "entropy": entropy}


def _node_impurity(stats, criterion):
    """stats: (C,) weighted class counts or (3,) [w, wy, wy2]."""
    if criterion == "squared_error":
        w, wy, wy2 = stats
        return max(wy2 / w - (wy / w) ** 2, 0.0) if w > 0 else 0.0
    w = stats.sum()
    return float(_CLASS_CRITERIA[criterion](stats / w)) if w > 0 else 0.0


def _best_split(Xn, stats, criterion, min_leaf):
    """Best (feature column, threshold, child-impurity sum) over the columns of Xn.

    Returns ``None`` when no split respects ``min_leaf``. Ties resolve to the
    lowest column, then the lowest threshold.
    """
    n, f = Xn.shape
    if n < 2 * min_leaf:
        return None
    order = np.argsort(Xn, axis=0, kind="stable")
    xs = np.take_along_axis(Xn, order, axis=0)
    full = np.cumsum(stats[order], axis=0)  # (n, f, S)
    cum = full[:-1]  # left-child stats when the first i+1 sorted rows go left
    right = full[-1][None] - cum
    if criterion == "squared_error":
        wl, wr = cum[..., 0], right[..., 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            sse_l = cum[..., 2] - cum[..., 1] ** 2 / wl
            sse_r = right[..., 2] - right[..., 1] ** 2 / wr
        child = sse_l + sse_r
    else:
        wl, wr = cum.sum(-1), right.sum(-1)
        imp = _CLASS_CRITERIA[criterion]
        with np.errstate(divide="ignore", invalid="ignore"):
            child = wl * imp(cum / wl[..., None]) + wr * imp(right / wr[..., None])
    pos = np.arange(1, n)[:, None]
    valid = (xs[:-1] < xs[1:]) & (pos >= min_leaf) & (n - pos >= min_leaf) & (wl > 0) & (wr > 0)
    if not valid.any():
        return None
    child = np.where(valid, child, np.inf)
    flat = np.argmin(child.T.ravel())  # feature-major: lowest feature, then lowest threshold
    col, i = divmod(int(flat), n - 1)
    lo, hi = xs[i, col], xs[i + 1, col]
    thr = (lo + hi) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return col, thr, float(child[i, col])


def build_tree(
    X,
    stats,
    criterion="gini",
    max_depth=None,
    min_samples_split=2,
    min_samples_leaf=1,
    max_features=None,
    rng=None,
) -> Tree:
    """Grow a tree depth-first.

    ``stats`` is per-row sufficient statistics: weighted one-hot class
    counts (n, C) for classification, or ``[w, w*y, w*y^2]`` (n, 3) for
    ``criterion="squared_error"``.
    """
    n, d = X.shape
    k = resolve_max_features(max_features, d)
    max_depth = np.inf if max_depth is None else max_depth
    feature, threshold, left, right, value, impurity, weight = [], [], [], [], [], [], []

    def new_node(rows):
        s = stats[rows].sum(axis=0)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        if criterion == "squared_error":
            value.append([s[1] / s[0] if s[0] > 0 else 0.0])
            weight.append(s[0])
        else:
            value.append((s / s.sum()).tolist() if s.sum() > 0 else [1.0 / s.size] * s.size)
            weight.append(s.sum())
        impurity.append(_node_impurity(s, criterion))
        return len(feature) - 1

    root = new_node(np.arange(n))
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, rows, depth = stack.pop()
        if depth >= max_depth or rows.size < max(min_samples_split, 2) or impurity[node] <= 1e-15:
            continue
        feats = np.arange(d) if k >= d else np.sort(rng.choice(d, size=k, replace=False))
        found = _best_split(X[np.ix_(rows, feats)], stats[rows], criterion, min_samples_leaf)
        if found is None:
            continue
        col, thr, _ = found
        f = int(feats[col])
        go_left = X[rows, f] <= thr
        l_rows, r_rows = rows[go_left], rows[~go_left]
        feature[node], threshold[node] = f, thr
        l, r = new_node(l_rows), new_node(r_rows)
        left[node], right[node] = l, r
        # push right first so the left subtree is numbered first
        stack.append((r, r_rows, depth + 1))
        stack.append((l, l_rows, depth + 1))
    return Tree(feature, threshold, left, right, value, impurity, weight, d)


def prune_ccp(tree: Tree, ccp_alpha: float) -> Tree:
    """Minimal cost-complexity pruning: collapse weakest links while their alpha <= ccp_alpha."""
    if ccp_alpha <= 0:
        return tree
    left, right = tree.left.copy(), tree.right.copy()
    root_w = tree.weight[0]
    node_cost = tree.weight * tree.impurity / root_w

    while True:
        subtree_cost = np.zeros(tree.node_count)
        leaves = np.zeros(tree.node_count)
        order = []
        stack = [0]
        while stack:
            i = stack.pop()
            order.append(i)
            if left[i] != LEAF:
                stack += [left[i], right[i]]
        for i in reversed(order):
            if left[i] == LEAF:
                subtree_cost[i], leaves[i] = node_cost[i], 1
            else:
                subtree_cost[i] = subtree_cost[left[i]] + subtree_cost[right[i]]
                leaves[i] = leaves[left[i]] + leaves[right[i]]
        internal = [i for i in order if left[i] != LEAF]
        if not internal:
            break
        g = np.array([(node_cost[i] - subtree_cost[i]) / (leaves[i] - 1) for i in internal])
        weakest = int(np.argmin(g))
        if g[weakest] > ccp_alpha:
            break
        left[internal[weakest]] = LEAF
        right[internal[weakest]] = LEAF
    feature = np.where(left == LEAF, LEAF, tree.feature)
    return Tree(feature, tree.threshold, left, right, tree.value, tree.impurity, tree.weight, tree.n_features)


def _check_tree_params(est):
    if est.criterion not in _CLASS_CRITERIA and est.criterion != "squared_error":
        raise ValueError(f"unknown criterion {est.criterion!r}")
    if est.min_samples_leaf < 1 or est.min_samples_split < 2:
        raise ValueError("min_samples_leaf >= 1 and min_samples_split >= 2 required")


class DecisionTree(ClassifierMixin, BaseEstimator):
    """Binary CART classifier (gini or entropy) supporting sample weights.

    Splits maximise the weighted impurity decrease over all features and
    midpoint thresholds; ties go to the lowest feature index, then the lowest
    threshold. ``ccp_alpha > 0`` applies minimal cost-complexity pruning.
    """

    def __init__(
        self,
        criterion="gini",
        max_depth=None,
        min_samples_split=2,
        min_samples_leaf=1,
        max_features=None,
        ccp_alpha=0.0,
        random_state=None,
    ):
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.ccp_alpha = ccp_alpha
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None):
        X, y = check_X_y(X, y)
        _check_tree_params(self)
        y = check_binary_target(self, y)
        w = np.ones(y.size) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        stats = np.zeros((y.size, 2))
        stats[np.arange(y.size), y] = w
        rng = np.random.default_rng(self.random_state)
        tree = build_tree(
            X,
            stats,
            self.criterion,
            self.max_depth,
            self.min_samples_split,
            self.min_samples_leaf,
            self.max_features,
            rng,
        )
        self.tree_ = prune_ccp(tree, self.ccp_alpha)
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "tree_")
        X = check_array(X)
        return self.tree_.predict(X)

    def decision_function(self, X):
        """Leaf PD proportion (the positive-class probability)."""
        return self.predict_proba(X)[:, 1]

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0.5).astype(int)]

    @property
    def feature_importances_(self):
        check_is_fitted(self, "tree_")
        return self.tree_.feature_importances()


class RegressionTree(RegressorMixin, BaseEstimator):
    """Least-squares CART regressor, the weak learner inside gradient boosting."""

    def __init__(self, max_depth=3, min_samples_split=2, min_samples_leaf=1, max_features=None, random_state=None):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None):
        X, y = check_X_y(X, y, y_numeric=True)
        w = np.ones(y.size) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        stats = np.column_stack([w, w * y, w * y * y])
        self.tree_ = build_tree(
            X,
            stats,
            "squared_error",
            self.max_depth,
            self.min_samples_split,
            self.min_samples_leaf,
            self.max_features,
            np.random.default_rng(self.random_state),
        )
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "tree_")
        return self.tree_.predict(check_array(X))[:, 0]
