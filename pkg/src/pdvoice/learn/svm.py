"""Soft-margin SVM trained by SMO with second-order working-set selection."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import check_binary_target

TAU = 1e-12


def resolve_gamma(gamma, X) -> float:
    """``scale`` -> 1/(D var(X)), ``auto`` -> 1/D, or a positive number."""
    d = X.shape[1]
    if gamma == "scale":
        var = X.var()
        return 1.0 / (d * var) if var > 0 else 1.0
    if gamma == "auto":
        return 1.0 / d
    gamma = float(gamma)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return gamma


def kernel_matrix(A, B, kernel, gamma, degree):
    if kernel == "linear":
        K = A @ B.T
    elif kernel == "rbf":
        K = np.exp(-gamma * cdist(A, B, "sqeuclidean"))
    elif kernel == "poly":
        K = (gamma * (A @ B.T) + 1.0) ** degree
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    if not np.all(np.isfinite(K)):
        raise FloatingPointError("kernel produced non-finite values")
    return K


def smo(K, y, C, tol=1e-3, max_iter=None):
    """Solve ``min 1/2 a'Qa - sum(a)`` s.t. ``0 <= a <= C``, ``y'a = 0``, ``Q = yy' * K``.

    Returns ``(alpha, rho, n_iter)``; the decision function is
    ``sum_i alpha_i y_i K(x_i, x) - rho``.
    """
    n = y.size
    Q = (y[:, None] * y[None, :]) * K
    QD = np.diag(Q).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    max_iter = max(10_000_000 if max_iter is None else max_iter, 1)
    it = 0
    while it < max_iter:
        yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        cand_up = np.where(up, yG, -np.inf)
        i = int(np.argmax(cand_up))
        gmax = cand_up[i]
        gmin = np.min(np.where(low, yG, np.inf))
        if gmax - gmin < tol:
            break
        b = gmax - yG
        a = QD[i] + QD - 2.0 * y[i] * y * Q[i]
        a = np.where(a > 0, a, TAU)
        obj = np.where(low & (b > 0), -(b * b) / a, np.inf)
        j = int(np.argmin(obj))
        it += 1

        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(QD[i] + QD[j] + 2.0 * Q[i, j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = max(QD[i] + QD[j] - 2.0 * Q[i, j], TAU)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        G += Q[i] * (ni - ai) + Q[j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj

    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(np.mean(yG[free]))
    else:
        at_ub = alpha >= C
        at_lb = alpha <= 0
        ub_mask = ((y > 0) & at_lb) | ((y < 0) & at_ub)
        lb_mask = ((y > 0) & at_ub) | ((y < 0) & at_lb)
        ub = np.min(yG[ub_mask]) if ub_mask.any() else np.inf
        lb = np.max(yG[lb_mask]) if lb_mask.any() else -np.inf
        rho = float((ub + lb) / 2.0) if np.isfinite(ub + lb) else 0.0
    return alpha, rho, it


class SVC(ClassifierMixin, BaseEstimator):
    """Binary C-SVM on raw decision values (no probability calibration).

    Parameters
    ----------
    kernel : {"linear", "rbf", "poly"}
        ``poly`` is ``(gamma <x, x'> + 1) ** degree``.
    gamma : {"scale", "auto"} or float
    tol : float
        Stop when the maximal KKT violation pair gap drops below ``tol``.
    """

    def __init__(self, C=1.0, kernel="rbf", degree=3, gamma="scale", tol=1e-3, max_iter=None):
        self.C = C
        self.kernel = kernel
        self.degree = degree
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.C <= 0:
            raise ValueError("C must be positive")
        y01 = check_binary_target(self, y)
        ys = np.where(y01 == 1, 1.0, -1.0)
        self.gamma_ = resolve_gamma(self.gamma, X) if self.kernel != "linear" else 0.0
        K = kernel_matrix(X, X, self.kernel, self.gamma_, self.degree)
        alpha, rho, self.n_iter_ = smo(K, ys, float(self.C), self.tol, self.max_iter)
        sv = np.flatnonzero(alpha > 0)
        self.alpha_ = alpha
        self.support_ = sv
        self.support_vectors_ = X[sv]
        self.dual_coef_ = alpha[sv] * ys[sv]
        self.intercept_ = -rho
        self.n_features_in_ = X.shape[1]
        return self

    @property
    def coef_(self):
        """Primal weights; linear kernel only."""
        if self.kernel != "linear":
            raise AttributeError("coef_ exists only for the linear kernel")
        return self.dual_coef_ @ self.support_vectors_

    def decision_function(self, X):
        check_is_fitted(self, "dual_coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        if self.support_.size == 0:
            return np.full(X.shape[0], self.intercept_)
        K = kernel_matrix(X, self.support_vectors_, self.kernel, self.gamma_, self.degree)
        return K @ self.dual_coef_ + self.intercept_

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0).astype(int)]
