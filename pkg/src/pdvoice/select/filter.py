"""Univariate rank-test filter."""

import numpy as np

from ..dataset import POSITIVE, FeatureTable
from .result import SelectionResult
from .stats import mann_whitney_u


def mw_pvalues(table: FeatureTable) -> np.ndarray:
    pd_rows = table.labels == POSITIVE
    if pd_rows.all() or not pd_rows.any():
        raise ValueError("the rank-test filter needs both classes")
    a, b = table.matrix[pd_rows], table.matrix[~pd_rows]
    return np.array([mann_whitney_u(a[:, j], b[:, j]).p for j in range(table.shape[1])])


def mw_select(table: FeatureTable, alpha: float = 0.05) -> SelectionResult:
    """Keep features whose two-sided PD-vs-HC p-value is below ``alpha``; scores are ``-log10 p``.

    When nothing passes, the single smallest-p feature is kept and flagged.
    """
    p = mw_pvalues(table)
    mask = p < alpha
    flags = ()
    if not mask.any():
        mask[int(np.argmin(p))] = True
        flags = ("empty-selection:kept-smallest-p",)
    order = np.argsort(p, kind="stable")
    trace = tuple((float(r + 1), float(p[j])) for r, j in enumerate(order))
    return SelectionResult("mannwhitney", table.column_names, mask, -np.log10(p), trace, flags, params={"alpha": alpha})
