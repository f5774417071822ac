"""Relief-F feature weighting (Manhattan neighbours on min-max scaled features)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..dataset import FeatureTable
from .result import SelectionResult


@dataclass(frozen=True)
class ReliefState:
    weights: np.ndarray
    k_neighbors: int
    m_iterations: int
    priors: dict
    flags: tuple = ()


def minmax_scale(X) -> np.ndarray:
    """Scale columns to [0, 1]; constant columns become 0."""
    X = np.asarray(X, dtype=np.float64)
    lo, span = X.min(axis=0), np.ptp(X, axis=0)
    return np.where(span > 0, (X - lo) / np.where(span > 0, span, 1.0), 0.0)


def relieff(X, y, k: int = 10, m: int | None = None, seed=None) -> ReliefState:
    """Relief-F weights.

    For each of ``m`` sampled rows ``R`` (all rows, in order, when ``m`` is
    None) with class ``c``::

        W -= sum_{k hits} diff / (m k)
        W += sum_{C != c} P(C) / (1 - P(c)) * sum_{k misses in C} diff / (m k)

    with ``diff`` the absolute scaled difference. Nearest-neighbour ties go
    to the lower row index. Classes too small for ``k`` neighbours reduce
    ``k`` for that class and add a flag.
    """
    Xs = minmax_scale(X)
    y = np.asarray(y)
    n, d = Xs.shape
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2:
        raise ValueError("Relief-F needs at least two classes")
    priors = dict(zip(classes.tolist(), (counts / n).tolist()))
    flags = []
    for c, cnt in zip(classes, counts):
        if cnt - 1 < k:
            flags.append(f"class {c}: k reduced to {cnt - 1} hits")
    if m is None or m >= n:
        rows = np.arange(n)
    else:
        rows = np.sort(np.random.default_rng(seed).choice(n, size=m, replace=False))
    m_eff = rows.size
    dist = cdist(Xs[rows], Xs, metric="cityblock")
    members = {c: np.flatnonzero(y == c) for c in classes}
    W = np.zeros(d)
    for r, i in enumerate(rows):
        ci = y[i]
        for c in classes:
            idx = members[c]
            if c == ci:
                idx = idx[idx != i]
            kk = min(k, idx.size)
            if kk == 0:
                continue
            near = idx[np.argsort(dist[r, idx], kind="stable")[:kk]]
            diff = np.abs(Xs[near] - Xs[i]).sum(axis=0) / kk
            if c == ci:
                W -= diff
            else:
                W += priors[c] / (1.0 - priors[ci]) * diff
    W /= m_eff
    return ReliefState(W, k, m_eff, priors, tuple(flags))


def relieff_select(table: FeatureTable, k: int = 10, m: int | None = None, seed=None, top: int | None = None):
    """Rank features by Relief-F weight; keeps the ``top`` best (all positive-weight features by default)."""
    state = relieff(table.matrix, table.labels, k, m, seed)
    order = np.argsort(-state.weights, kind="stable")
    mask = np.zeros(table.shape[1], dtype=bool)
    if top is None:
        mask = state.weights > 0
        if not mask.any():
            mask[order[0]] = True
    else:
        mask[order[:top]] = True
    trace = tuple((float(r + 1), float(state.weights[j])) for r, j in enumerate(order))
    return SelectionResult("relieff", table.column_names, mask, state.weights, trace, state.flags, seed, {"k": k})
