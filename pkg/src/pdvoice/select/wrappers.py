"""Wrapper selectors scored by group-wise CV accuracy: forward selection and RFECV."""

from __future__ import annotations

import numpy as np
from joblib import Parallel, delayed

from ..dataset import FeatureTable, Standardizer
from ..evaluation.crossval import cv_accuracy
from ..evaluation.folds import FoldPlan
from ..learn import LearnerSpec, NoImportancesError, importances, make_learner
from .relief import relieff
from .result import SelectionResult


def sfs(
    table: FeatureTable,
    spec: LearnerSpec,
    plan: FoldPlan,
    ranking=None,
    max_size: int | None = None,
    pool: int | None = None,
    n_jobs: int = 1,
    seed=None,
) -> SelectionResult:
    """Sequential forward selection.

    Each step adds the candidate with the highest mean CV accuracy; ties go
    to the better-ranked feature (``ranking`` lists column indices best
    first, Relief-F order when omitted). Candidates come from the top
    ``pool`` ranked features. The returned subset is the trace prefix with
    the highest accuracy, shortest on ties.
    """
    d = table.shape[1]
    if ranking is None:
        ranking = np.argsort(-relieff(table.matrix, table.labels, seed=seed).weights, kind="stable")
    ranking = [int(j) for j in ranking]
    if sorted(ranking) != list(range(d)):
        raise ValueError("ranking must be a permutation of all column indices")
    candidates = ranking[: pool or d]
    max_size = min(max_size or d, len(candidates))
    X, y = table.matrix, table.labels
    splits = list(plan.split(table.groups))
    chosen: list = []
    trace = []
    scores = np.zeros(d)
    while len(chosen) < max_size:
        remaining = [j for j in candidates if j not in chosen]
        accs = Parallel(n_jobs=n_jobs)(
            delayed(cv_accuracy)(spec, X[:, chosen + [j]], y, splits) for j in remaining
        )
        best = int(np.argmax(accs))  # first maximum = best-ranked among ties
        chosen.append(remaining[best])
        scores[remaining[best]] = accs[best]
        trace.append((float(len(chosen)), float(accs[best])))
    best_size = int(np.argmax([s for _, s in trace])) + 1
    mask = np.zeros(d, dtype=bool)
    mask[chosen[:best_size]] = True
    return SelectionResult(
        "sfs",
        table.column_names,
        mask,
        scores,
        tuple(trace),
        (),
        seed,
        {"learner": spec.algorithm, "max_size": max_size, "order": ",".join(table.column_names[j] for j in chosen)},
    )


def _fit_importances(spec, X, y):
    model = make_learner(spec).fit(Standardizer().fit_transform(X), y)
    return importances(model)


def rfecv(
    table: FeatureTable,
    spec: LearnerSpec,
    plan: FoldPlan,
    step: int = 1,
    min_features: int = 1,
    seed=None,
) -> SelectionResult:
    """Recursive feature elimination scored by CV accuracy at every visited size.

    Each round refits ``spec`` on all rows of the surviving columns and drops
    the ``step`` least important (lowest column index first on ties). The
    chosen size maximises mean CV accuracy, smaller subsets winning ties.
    ``scores`` holds the round in which each feature was eliminated (higher
    survived longer).
    """
    if not spec.has_importances:
        raise NoImportancesError(f"RFECV needs per-feature importances; learner {spec.algorithm!r} has none")
    if step < 1:
        raise ValueError("step must be >= 1")
    d = table.shape[1]
    X, y = table.matrix, table.labels
    splits = list(plan.split(table.groups))
    alive = np.arange(d)
    subsets, trace = {}, []
    survived = np.zeros(d)
    rnd = 0
    while True:
        acc = cv_accuracy(spec, X[:, alive], y, splits)
        subsets[alive.size] = alive.copy()
        trace.append((float(alive.size), acc))
        if alive.size <= max(min_features, 1):
            break
        imp = _fit_importances(spec, X[:, alive], y)
        drop = np.argsort(imp, kind="stable")[: min(step, alive.size - max(min_features, 1))]
        rnd += 1
        survived[alive[drop]] = rnd
        alive = np.delete(alive, drop)
    survived[alive] = rnd + 1
    trace.sort()
    best_size = int(trace[int(np.argmax([s for _, s in trace]))][0])
    mask = np.zeros(d, dtype=bool)
    mask[subsets[best_size]] = True
    return SelectionResult(
        "rfecv",
        table.column_names,
        mask,
        survived,
        tuple(trace),
        (),
        seed,
        {"learner": spec.algorithm, "step": step},
    )
