"""LASSO by cyclic coordinate descent, with a warm-started path and CV choice of lambda."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dataset import FeatureTable, Standardizer
from ..evaluation.folds import FoldPlan, group_kfold
from .result import SelectionResult


@dataclass(frozen=True)
class LassoModel:
    coef: np.ndarray
    intercept: float
    lam: float
    n_sweeps: int = 0
    converged: bool = True
    cv_curve: tuple = field(default=())

    def predict(self, X) -> np.ndarray:
        return np.asarray(X) @ self.coef + self.intercept


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def _sweep(G, c, q, beta, lam, idx):
    """One coordinate pass over ``idx``; updates ``beta`` and ``q = G beta`` in place."""
    biggest = 0.0
    for j in idx:
        gjj = G[j, j]
        old = beta[j]
        rho = c[j] - q[j] + gjj * old
        new = (np.sign(rho) * max(abs(rho) - lam, 0.0)) / gjj
        if new != old:
            q += G[:, j] * (new - old)
            beta[j] = new
            biggest = max(biggest, abs(new - old))
    return biggest


def coordinate_descent(G, c, lam, beta=None, tol=1e-7, max_sweeps=10_000):
    """Minimise ``1/2 b'Gb - c'b + lam |b|_1`` (the Gram form of the centred LASSO objective).

    Full passes alternate with passes restricted to the non-zero set; the
    solve stops when a full pass moves no coefficient by ``tol`` or more.
    Returns ``(beta, sweeps, converged)``.
    """
    d = c.size
    beta = np.zeros(d) if beta is None else np.array(beta, dtype=np.float64)
    live = np.flatnonzero(np.diag(G) > 0)
    beta[np.diag(G) <= 0] = 0.0
    q = G @ beta
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        if _sweep(G, c, q, beta, lam, live) < tol:
            return beta, sweeps, True
        active = np.flatnonzero(beta != 0)
        while sweeps < max_sweeps:
            sweeps += 1
            if _sweep(G, c, q, beta, lam, active) < tol:
                break
    return beta, sweeps, False


def _centre(X, y):
    xm, ym = X.mean(axis=0), y.mean()
    return X - xm, y - ym, xm, ym


def lambda_max(X, y) -> float:
    """Smallest lambda at which every coefficient is zero: ``max |X'y| / N`` on centred data."""
    Xc, yc, _, _ = _centre(np.asarray(X, float), np.asarray(y, float))
    return float(np.max(np.abs(Xc.T @ yc)) / X.shape[0])


def lambda_grid(lam_max: float, n: int = 100, ratio: float = 1e-3) -> np.ndarray:
    """``n`` log-spaced values from ``lam_max`` down to ``ratio * lam_max``."""
    return np.geomspace(lam_max, lam_max * ratio, n)


def lasso_path(X, y, lambdas, tol=1e-7, max_sweeps=10_000) -> list:
    """Fit along ``lambdas`` (in the given order) with warm starts."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("LASSO input must be finite")
    n = X.shape[0]
    Xc, yc, xm, ym = _centre(X, y)
    G = Xc.T @ Xc / n
    c = Xc.T @ yc / n
    beta = None
    out = []
    for lam in lambdas:
        beta, sweeps, ok = coordinate_descent(G, c, float(lam), beta, tol, max_sweeps)
        out.append(LassoModel(beta.copy(), float(ym - xm @ beta), float(lam), sweeps, ok))
    return out


def lasso_fit(X, y, lam, tol=1e-7, max_sweeps=10_000) -> LassoModel:
    """Minimise ``1/(2N) ||y - b0 - X b||^2 + lam ||b||_1`` (intercept unpenalised)."""
    return lasso_path(X, y, [lam], tol, max_sweeps)[0]


def lasso_cv(X, y, splits, n_lambdas=100, ratio=1e-3):
    """Held-out squared error along the full-data grid; returns ``(grid, mse)`` with one row per fold."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    grid = lambda_grid(lambda_max(X, y), n_lambdas, ratio)
    mse = np.zeros((len(splits), grid.size))
    for f, (tr, te) in enumerate(splits):
        for i, m in enumerate(lasso_path(X[tr], y[tr], grid)):
            mse[f, i] = np.mean((y[te] - m.predict(X[te])) ** 2)
    return grid, mse


def choose_lambda(mse, rule: str = "min") -> int:
    """Grid index of the chosen lambda (grid ordered large to small).

    ``"min"`` takes the smallest mean CV error (first on ties, i.e. the
    larger lambda); ``"1se"`` takes the largest lambda whose mean error is
    within one standard error of that minimum.
    """
    mean = mse.mean(axis=0)
    best = int(np.argmin(mean))
    if rule == "min":
        return best
    if rule == "1se":
        se = mse[:, best].std(ddof=1) / np.sqrt(mse.shape[0]) if mse.shape[0] > 1 else 0.0
        return int(np.flatnonzero(mean <= mean[best] + se)[0])
    raise ValueError(f"unknown lambda rule {rule!r}")


def lasso_select(
    table: FeatureTable,
    plan: FoldPlan | None = None,
    k: int = 10,
    seed=None,
    n_lambdas: int = 100,
    rule: str = "min",
) -> SelectionResult:
    """Linear LASSO on standardized features and 0/1 labels; lambda chosen by group-wise CV error.

    ``rule`` is passed to :func:`choose_lambda`. If the chosen model keeps
    nothing, the feature most correlated with the label is kept and flagged.
    """
    X = Standardizer().fit_transform(table.matrix)
    y = table.labels.astype(np.float64)
    if plan is None:
        plan = group_kfold(table.groups, table.labels, k, seed)
    grid, mse = lasso_cv(X, y, list(plan.split(table.groups)), n_lambdas)
    cv = mse.mean(axis=0)
    best = choose_lambda(mse, rule)
    model = lasso_path(X, y, grid[: best + 1])[-1]
    mask = model.coef != 0
    flags = ()
    if not mask.any():
        Xc, yc, _, _ = _centre(X, y)
        mask[int(np.argmax(np.abs(Xc.T @ yc)))] = True
        flags = ("empty-selection:kept-max-correlation",)
    trace = tuple(sorted((float(l), float(s)) for l, s in zip(grid, cv)))
    return SelectionResult(
        "lasso",
        table.column_names,
        mask,
        np.abs(model.coef),
        trace,
        flags,
        seed,
        {"lambda": float(grid[best]), "n_lambdas": n_lambdas, "rule": rule},
    )
