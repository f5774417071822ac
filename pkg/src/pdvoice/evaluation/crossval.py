"""Group-wise cross-validation with fold-local standardization."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from ..dataset import FeatureTable, Standardizer
from ..learn import LearnerSpec, decision_scores, make_learner
from .folds import FoldPlan
from .metrics import ConfusionMatrix, Metrics, metrics, roc_auc, t_interval

METRIC_NAMES = ("accuracy", "auc", "f1", "precision", "recall", "specificity")


class FoldError(ValueError):
    """A training fold cannot be fitted (e.g. it holds a single class)."""


@dataclass(frozen=True)
class FoldResult:
    fold: int
    n_train: int
    n_test: int
    confusion: ConfusionMatrix
    metrics: Metrics
    auc: float
    roc: tuple

    def value(self, name: str) -> float:
        return self.auc if name == "auc" else getattr(self.metrics, name)


@dataclass(frozen=True)
class EvalReport:
    learner: LearnerSpec
    folds: tuple
    summary: dict  # metric -> (mean, CI half-width)
    flags: tuple = field(default=())

    @property
    def confusion(self) -> ConfusionMatrix:
        total = ConfusionMatrix(0, 0, 0, 0)
        for f in self.folds:
            total = total + f.confusion
        return total

    def mean(self, name: str) -> float:
        return self.summary[name][0]

    def table_row(self, label: str | None = None) -> str:
        """``name  acc ± ci  auc ± ci ...`` in percent, one column per reported metric."""
        cells = [f"{100 * m:.2f} ± {100 * h:.2f}" for m, h in (self.summary[k] for k in METRIC_NAMES)]
        return "\t".join([label or self.learner.algorithm, *cells])

    @staticmethod
    def table_header() -> str:
        return "\t".join(["model", *METRIC_NAMES])

    def write_csv(self, path, extra: dict | None = None) -> None:
        extra = extra or {}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["fold", "n_train", "n_test", "tp", "fp", "tn", "fn", *METRIC_NAMES, *extra])
            for f in self.folds:
                cm = f.confusion
                vals = [repr(float(f.value(k))) for k in METRIC_NAMES]
                w.writerow([f.fold, f.n_train, f.n_test, cm.tp, cm.fp, cm.tn, cm.fn, *vals, *extra.values()])
            for stat, idx in (("mean", 0), ("ci95", 1)):
                vals = [repr(float(self.summary[k][idx])) for k in METRIC_NAMES]
                w.writerow([stat, "", "", "", "", "", "", *vals, *extra.values()])


def _fit_fold(spec, X, y, train, test):
    if np.unique(y[train]).size < 2:
        raise FoldError("training fold holds a single class")
    std = Standardizer().fit(X[train])
    model = make_learner(spec).fit(std.transform(X[train]), y[train])
    Xt = std.transform(X[test])
    return model.predict(Xt), decision_scores(model, Xt)


def _summarise(spec, results, flags) -> EvalReport:
    summary = {k: t_interval([r.value(k) for r in results]) for k in METRIC_NAMES}
    return EvalReport(spec, tuple(results), summary, tuple(flags))


def cross_validate(
    spec: LearnerSpec,
    table: FeatureTable,
    plan: FoldPlan,
    mask=None,
    n_jobs: int = 1,
) -> EvalReport:
    """Fit standardizer + model on each fold's training rows and score its test rows.

    AUC is NaN for a test fold holding one class; such folds are left out of
    the AUC mean and flagged.
    """
    X = table.matrix if mask is None else table.matrix[:, np.asarray(mask, dtype=bool)]
    if X.shape[1] == 0:
        raise ValueError("selection mask keeps no features")
    y = table.labels
    splits = list(plan.split(table.groups))
    outs = Parallel(n_jobs=n_jobs)(delayed(_fit_fold)(spec, X, y, tr, te) for tr, te in splits)
    results, flags = [], []
    for f, ((tr, te), (pred, score)) in enumerate(zip(splits, outs)):
        cm = ConfusionMatrix.from_predictions(y[te], pred)
        if np.unique(y[te]).size == 2:
            auc, roc = roc_auc(score, y[te])
        else:
            auc, roc = float("nan"), ()
            flags.append(f"fold{f}:auc-undefined")
        m = metrics(cm)
        flags += [f"fold{f}:{x}" for x in m.flags]
        results.append(FoldResult(f, tr.size, te.size, cm, m, auc, roc))
    return _summarise(spec, results, flags)


def fold_indices(plan: FoldPlan, groups) -> list:
    return list(plan.split(groups))


def cv_accuracy(spec: LearnerSpec, X, y, splits) -> float:
    """Mean test accuracy over precomputed ``(train, test)`` splits (no report object)."""
    acc = []
    for tr, te in splits:
        pred, _ = _fit_fold(spec, X, y, tr, te)
        acc.append(np.mean(pred == y[te]))
    return float(np.mean(acc))
