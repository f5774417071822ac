"""Brute-force k-nearest-neighbour classifier."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import check_binary_target


class KNeighbors(ClassifierMixin, BaseEstimator):
    """Minkowski-``p`` k-NN with uniform or inverse-distance votes.

    Among equidistant candidates the lower training row wins. The decision
    score is the (weighted) fraction of neighbours that are PD; a row is
    predicted PD when that fraction exceeds 0.5.
    """

    def __init__(self, n_neighbors=5, weights="uniform", p=2, algorithm="brute"):
        self.n_neighbors = n_neighbors
        self.weights = weights
        self.p = p
        self.algorithm = algorithm

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")
        if self.n_neighbors > X.shape[0]:
            raise ValueError(f"n_neighbors={self.n_neighbors} exceeds {X.shape[0]} training rows")
        if self.weights not in ("uniform", "distance"):
            raise ValueError(f"unknown weights {self.weights!r}")
        self._y = check_binary_target(self, y)
        self._X = X
        self.n_features_in_ = X.shape[1]
        return self

    def kneighbors(self, X):
        """Distances and indices of the k nearest training rows, nearest first."""
        check_is_fitted(self, "_X")
        X = check_array(X)
        if X.shape[1] != self._X.shape[1]:
            raise ValueError(f"expected {self._X.shape[1]} features, got {X.shape[1]}")
        d = cdist(X, self._X, metric="minkowski", p=self.p)
        idx = np.argsort(d, axis=1, kind="stable")[:, : self.n_neighbors]
        return np.take_along_axis(d, idx, axis=1), idx

    def decision_function(self, X):
        dist, idx = self.kneighbors(X)
        w = 1.0 / (dist + 1e-12) if self.weights == "distance" else np.ones_like(dist)
        return np.sum(w * self._y[idx], axis=1) / np.sum(w, axis=1)

    def predict_proba(self, X):
        s = self.decision_function(X)
        return np.column_stack([1 - s, s])

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0.5).astype(int)]
