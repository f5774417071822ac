"""L2-penalised logistic regression fitted by IRLS (damped Newton)."""

from __future__ import annotations

import numpy as np
from scipy.special import expit, log_expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import check_binary_target


def sigmoid(z):
    return expit(z)


def loss_and_grad(theta, X, y, C):
    """Penalised cross-entropy and its gradient.

    ``theta = [w_1..w_D, b]``; the penalty ``||w||^2 / (2C)`` leaves the
    intercept ``b`` unpenalised.
    """
    w, b = theta[:-1], theta[-1]
    z = X @ w + b
    loss = -np.sum(y * log_expit(z) + (1 - y) * log_expit(-z)) + w @ w / (2.0 * C)
    r = expit(z) - y
    grad = np.append(X.T @ r + w / C, r.sum())
    return loss, grad


class LogisticRegression(ClassifierMixin, BaseEstimator):
    """Binary logistic regression, ``h(x) = sigmoid(w.x + b)``.

    Parameters
    ----------
    C : float
        Inverse regularisation strength.
    max_iter : int
        Newton iterations; each halves its step until the loss does not rise.
    tol : float
        Stop once the gradient's infinity norm falls below ``tol``.
    """

    def __init__(self, C=1.0, max_iter=100, tol=1e-6, penalty="l2"):
        self.C = C
        self.max_iter = max_iter
        self.tol = tol
        self.penalty = penalty

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.penalty != "l2":
            raise ValueError("only the l2 penalty is implemented")
        if self.C <= 0:
            raise ValueError("C must be positive")
        y = check_binary_target(self, y).astype(np.float64)
        n, d = X.shape
        Xa = np.column_stack([X, np.ones(n)])
        reg = np.full(d + 1, 1.0 / self.C)
        reg[-1] = 0.0
        theta = np.zeros(d + 1)
        loss, grad = loss_and_grad(theta, X, y, self.C)
        self.loss_curve_ = [loss]
        self.n_iter_ = 0
        for it in range(self.max_iter):
            if np.max(np.abs(grad)) < self.tol:
                break
            p = expit(Xa @ theta)
            s = p * (1 - p)
            H = (Xa * s[:, None]).T @ Xa + np.diag(reg)
            H[np.diag_indices_from(H)] += 1e-12
            try:
                step = np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(H, grad, rcond=None)[0]
            t = 1.0
            while True:
                cand = theta - t * step
                new_loss, new_grad = loss_and_grad(cand, X, y, self.C)
                if new_loss <= loss or t < 1e-10:
                    break
                t *= 0.5
            if new_loss > loss:
                break
            theta, loss, grad = cand, new_loss, new_grad
            self.loss_curve_.append(loss)
            self.n_iter_ = it + 1
        self.coef_ = theta[:-1]
        self.intercept_ = float(theta[-1])
        self.n_features_in_ = d
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        return check_array(X) @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p = sigmoid(self.decision_function(X))
        return np.column_stack([1 - p, p])

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0).astype(int)]

    @property
    def feature_importances_(self):
        check_is_fitted(self, "coef_")
        return np.abs(self.coef_)
