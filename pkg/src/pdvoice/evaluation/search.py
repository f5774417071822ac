"""Randomized hyperparameter search over finite grids."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from ..dataset import FeatureTable
from ..learn import LEARNERS, LearnerSpec
from .crossval import _fit_fold
from .folds import FoldPlan, group_kfold
from .metrics import t_interval

SEARCH_SPACES = {
    "logreg": {
        "penalty": ["l2"],
        "C": [float(c) for c in np.logspace(-4, 4, 20)],
        "max_iter": [100, 200, 500, 1000],
    },
    "forest": {
        "n_estimators": [100, 300, 500],
        "max_depth": [None, 10, 20, 50],
        "min_samples_split": [2, 5, 10],
        "min_samples_leaf": [1, 2, 4],
        "max_features": ["sqrt", "log2", None],
        "bootstrap": [True, False],
    },
    "svm": {
        "C": [0.1, 1, 10, 100],
        "kernel": ["linear", "rbf", "poly"],
        "degree": [2, 3, 4],
        "gamma": ["scale", "auto", 0.001, 0.01, 0.1, 1],
    },
    "knn": {
        "n_neighbors": [3, 5, 7, 9, 11],
        "weights": ["uniform", "distance"],
        "p": [1, 2],
    },
    "gboost": {
        "n_estimators": [100, 200, 300],
        "learning_rate": [0.01, 0.05, 0.1],
        "max_depth": [3, 5, 7],
        "subsample": [0.7, 0.85, 1.0],
        "min_samples_split": [2, 5, 10],
        "min_samples_leaf": [1, 3, 5],
    },
    "tree": {
        "criterion": ["gini", "entropy"],
        "max_depth": [None, 5, 10, 20],
        "min_samples_split": [2, 5, 10],
        "min_samples_leaf": [1, 2, 4],
        "max_features": ["sqrt", "log2", None],
        "ccp_alpha": [0.0, 0.01, 0.1],
    },
    "adaboost": {
        "n_estimators": [50, 100, 200],
        "learning_rate": [0.01, 0.1, 0.5, 1.0],
        "estimator": ["stump", "tree2", "rf100", "rf300"],
    },
    "dummy": {},
}


@dataclass(frozen=True)
class SearchSpace:
    """Discrete per-hyperparameter choices; configs are points of the Cartesian product."""

    algorithm: str
    params: dict

    def __post_init__(self):
        if self.algorithm not in LEARNERS:
            raise ValueError(f"unknown learner {self.algorithm!r}")
        for name, values in self.params.items():
            if not isinstance(values, (list, tuple)) or len(values) == 0:
                raise ValueError(f"search space entry {name!r} must be a non-empty list")
        LearnerSpec(self.algorithm, {k: v[0] for k, v in self.params.items()})

    @classmethod
    def default(cls, algorithm: str) -> "SearchSpace":
        return cls(algorithm, SEARCH_SPACES[algorithm])

    @property
    def size(self) -> int:
        return math.prod(len(v) for v in self.params.values())

    def config(self, index: int) -> dict:
        """Mixed-radix decoding of ``index``; the last parameter varies fastest."""
        out = {}
        for name in reversed(list(self.params)):
            values = self.params[name]
            index, r = divmod(index, len(values))
            out[name] = values[r]
        return {k: out[k] for k in self.params}

    def sample(self, n_iter: int, seed=None) -> list:
        if n_iter < 1:
            raise ValueError("n_iter must be >= 1")
        rng = np.random.default_rng(seed)
        idx = rng.choice(self.size, size=min(n_iter, self.size), replace=False)
        return [self.config(int(i)) for i in idx]


@dataclass(frozen=True)
class SearchResult:
    best: LearnerSpec
    best_score: float
    records: tuple  # (config dict, mean accuracy, CI half-width), in sampling order
    flags: tuple = field(default=())

    def write_csv(self, path, extra: dict | None = None) -> None:
        extra = extra or {}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["order", "config", "mean_accuracy", "ci95", "best", *extra])
            for i, (cfg, mean, half) in enumerate(self.records):
                is_best = int(cfg == dict(self.best.params))
                w.writerow([i, json.dumps(cfg, sort_keys=True), repr(mean), repr(half), is_best, *extra.values()])


def _score_config(spec, X, y, splits):
    acc = []
    try:
        for tr, te in splits:
            pred, _ = _fit_fold(spec, X, y, tr, te)
            acc.append(float(np.mean(pred == y[te])))
    except (ValueError, FloatingPointError) as exc:  # invalid for this data (e.g. k > rows)
        return None, str(exc)
    return acc, None


def random_search(
    space: SearchSpace,
    table: FeatureTable,
    plan: FoldPlan,
    n_iter: int = 60,
    seed=None,
    mask=None,
    n_jobs: int = 1,
) -> SearchResult:
    """Evaluate sampled configs on one shared fold plan; best mean accuracy wins, ties to the earliest sampled."""
    X = table.matrix if mask is None else table.matrix[:, np.asarray(mask, dtype=bool)]
    y = table.labels
    splits = list(plan.split(table.groups))
    configs = space.sample(n_iter, seed)
    specs = [LearnerSpec(space.algorithm, cfg, 0 if seed is None else int(seed)) for cfg in configs]
    outs = Parallel(n_jobs=n_jobs)(delayed(_score_config)(s, X, y, splits) for s in specs)
    records, flags = [], []
    best_i, best_score = None, -np.inf
    for i, (cfg, (acc, err)) in enumerate(zip(configs, outs)):
        if acc is None:
            flags.append(f"config{i}:skipped:{err}")
            records.append((cfg, float("nan"), float("nan")))
            continue
        mean, half = t_interval(acc)
        records.append((cfg, mean, half))
        if mean > best_score:
            best_i, best_score = i, mean
    if best_i is None:
        raise ValueError("no sampled configuration could be evaluated")
    return SearchResult(specs[best_i], float(best_score), tuple(records), tuple(flags))


def nested_search(
    space: SearchSpace,
    table: FeatureTable,
    plan: FoldPlan,
    n_iter: int = 60,
    seed=None,
    inner_k: int = 5,
    mask=None,
    n_jobs: int = 1,
):
    """Tune inside each outer training fold, then score the chosen config on the outer test fold.

    Returns ``(outer accuracies, per-fold best specs)``.
    """
    accs, bests = [], []
    for f, (tr, te) in enumerate(plan.split(table.groups)):
        inner = table.subset_rows(tr)
        k = min(inner_k, np.unique(inner.groups).size)
        inner_plan = group_kfold(inner.groups, inner.labels, k, None if seed is None else seed + f)
        res = random_search(space, inner, inner_plan, n_iter, seed, mask, n_jobs)
        X = table.matrix if mask is None else table.matrix[:, np.asarray(mask, dtype=bool)]
        pred, _ = _fit_fold(res.best, X, table.labels, tr, te)
        accs.append(float(np.mean(pred == table.labels[te])))
        bests.append(res.best)
    return np.array(accs), bests


__all__ = ["SEARCH_SPACES", "SearchResult", "SearchSpace", "nested_search", "random_search"]
