"""Speaker-disjoint (group-wise) k-fold plans."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of every group id to one of ``k`` folds."""

    assignment: dict
    k: int
    seed: int | None = None

    def fold_of(self, groups) -> np.ndarray:
        groups = np.asarray(groups).astype(str)
        try:
            return np.array([self.assignment[g] for g in groups], dtype=int)
        except KeyError as exc:
            raise ValueError(f"group {exc.args[0]!r} is not in the fold plan") from None

    def split(self, groups):
        """Yield ``(train_rows, test_rows)`` index arrays, fold 0 first."""
        fold = self.fold_of(groups)
        for f in range(self.k):
            yield np.flatnonzero(fold != f), np.flatnonzero(fold == f)

    def test_groups(self, f: int) -> set:
        return {g for g, i in self.assignment.items() if i == f}


def group_kfold(groups, labels, k: int = 10, seed=None) -> FoldPlan:
    """Shuffle groups by ``seed`` and deal them class by class to the folds.

    Each group goes to the fold holding the fewest groups of its class (then
    fewest groups overall, then lowest index), so per-class group counts
    differ by at most one across folds.
    """
    groups = np.asarray(groups).astype(str)
    labels = np.asarray(labels)
    uniq = np.unique(groups)
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > uniq.size:
        raise ValueError(f"k={k} folds but only {uniq.size} groups")
    # majority label per group (a group is normally single-label)
    glabel = {}
    for g in uniq:
        vals, counts = np.unique(labels[groups == g], return_counts=True)
        glabel[g] = vals[np.argmax(counts)]
    order = uniq[np.random.default_rng(seed).permutation(uniq.size)]
    total = np.zeros(k, dtype=int)
    per_class: dict = {}
    assignment = {}
    for g in order:
        counts = per_class.setdefault(glabel[g], np.zeros(k, dtype=int))
        f = int(np.lexsort((np.arange(k), total, counts))[0])
        assignment[str(g)] = f
        counts[f] += 1
        total[f] += 1
    return FoldPlan(assignment, k, seed)


def row_kfold(n_rows: int, labels, k: int = 10, seed=None) -> FoldPlan:
    """Row-wise plan (every row its own group); the leakage-prone baseline."""
    return group_kfold(np.arange(n_rows).astype(str), labels, k, seed)
