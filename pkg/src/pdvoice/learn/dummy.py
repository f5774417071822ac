"""Constant majority-class baseline."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import check_binary_target


class MajorityClass(ClassifierMixin, BaseEstimator):
    """Predicts the training majority class (HC on an exact tie); score is the PD base rate."""

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y = check_binary_target(self, y)
        self.prior_ = float(y.mean())
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "prior_")
        return np.full(check_array(X).shape[0], self.prior_)

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0.5).astype(int)]
