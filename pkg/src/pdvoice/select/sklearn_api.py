"""``SelectorMixin`` adapter so the selectors drop into sklearn pipelines."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from ..dataset import FeatureTable
from ..evaluation.folds import group_kfold
from ..learn import LearnerSpec
from .filter import mw_select
from .lasso import lasso_select
from .relief import relieff_select
from .wrappers import rfecv, sfs


class FeatureSelector(SelectorMixin, BaseEstimator):
    """Fit one of ``mannwhitney``, ``lasso``, ``relieff``, ``sfs`` or ``rfecv``.

    ``groups`` passed to :meth:`fit` keep speakers within one fold; without
    them every row is its own group.
    """

    def __init__(self, method="mannwhitney", alpha=0.05, learner="logreg", k=10, step=1, max_size=None, seed=0):
        self.method = method
        self.alpha = alpha
        self.learner = learner
        self.k = k
        self.step = step
        self.max_size = max_size
        self.seed = seed

    def fit(self, X, y, groups=None):
        X, y = check_X_y(X, y)
        groups = np.arange(len(y)).astype(str) if groups is None else np.asarray(groups).astype(str)
        table = FeatureTable(X, [f"x{j}" for j in range(X.shape[1])], groups, y)
        plan = lambda: group_kfold(groups, y, self.k, self.seed)  # noqa: E731
        spec = LearnerSpec(self.learner, seed=self.seed)
        if self.method == "mannwhitney":
            res = mw_select(table, self.alpha)
        elif self.method == "lasso":
            res = lasso_select(table, plan(), seed=self.seed)
        elif self.method == "relieff":
            res = relieff_select(table, seed=self.seed)
        elif self.method == "sfs":
            res = sfs(table, spec, plan(), max_size=self.max_size, seed=self.seed)
        elif self.method == "rfecv":
            res = rfecv(table, spec, plan(), self.step, seed=self.seed)
        else:
            raise ValueError(f"unknown selection method {self.method!r}")
        self.result_ = res
        self.n_features_in_ = X.shape[1]
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "result_")
        return self.result_.mask
