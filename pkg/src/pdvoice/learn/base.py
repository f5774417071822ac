"""Learner specifications, construction by tag, importances and JSON model files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from ..dataset import Standardizer
from .dummy import MajorityClass
from .ensemble import AdaBoost, GradientBoosting, RandomForest
from .knn import KNeighbors
from .logistic import LogisticRegression
from .svm import SVC
from .tree import DecisionTree, RegressionTree, Tree

LEARNERS = {
    "logreg": LogisticRegression,
    "tree": DecisionTree,
    "forest": RandomForest,
    "gboost": GradientBoosting,
    "adaboost": AdaBoost,
    "knn": KNeighbors,
    "svm": SVC,
    "dummy": MajorityClass,
}
_SEEDED = {"tree", "forest", "gboost", "adaboost"}
_CLASSES = {cls.__name__: cls for cls in (*LEARNERS.values(), RegressionTree, Standardizer)}


class NoImportancesError(TypeError):
    """The learner defines no per-feature importances."""


@dataclass(frozen=True)
class LearnerSpec:
    """Algorithm tag plus hyperparameters (named as the estimator's constructor arguments)."""

    algorithm: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in LEARNERS:
            raise ValueError(f"unknown learner {self.algorithm!r}; choose from {sorted(LEARNERS)}")
        valid = set(LEARNERS[self.algorithm]().get_params())
        unknown = set(self.params) - valid - {"random_state"}
        if unknown:
            raise ValueError(f"{self.algorithm}: unknown hyperparameters {sorted(unknown)}")
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    def with_params(self, **params) -> "LearnerSpec":
        return LearnerSpec(self.algorithm, {**self.params, **params}, self.seed)

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, d) -> "LearnerSpec":
        return cls(d["algorithm"], dict(d.get("params", {})), int(d.get("seed", 0)))

    @property
    def has_importances(self) -> bool:
        return self.algorithm not in ("knn", "svm", "dummy")


def make_learner(spec: LearnerSpec):
    params = dict(spec.params)
    if spec.algorithm in _SEEDED:
        params.setdefault("random_state", spec.seed)
    return LEARNERS[spec.algorithm](**params)


def decision_scores(model, X) -> np.ndarray:
    return np.asarray(model.decision_function(X), dtype=np.float64)


def importances(model) -> np.ndarray:
    """|coef| for logistic regression, impurity decrease for tree-based models."""
    try:
        return np.asarray(model.feature_importances_, dtype=np.float64)
    except AttributeError:
        raise NoImportancesError(f"{type(model).__name__} has no per-feature importances") from None


# -- serialization -----------------------------------------------------------


def _encode(obj):
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.tolist(), "dtype": obj.dtype.str, "shape": list(obj.shape)}
    if isinstance(obj, Tree):
        return {"__tree__": obj.to_dict()}
    if type(obj).__name__ in _CLASSES:
        return {"__estimator__": type(obj).__name__, "params": _encode(obj.get_params()), "state": _state(obj)}
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            return np.array(obj["__ndarray__"], dtype=np.dtype(obj["dtype"])).reshape(obj["shape"])
        if "__tree__" in obj:
            return Tree.from_dict(obj["__tree__"])
        if "__estimator__" in obj:
            est = _CLASSES[obj["__estimator__"]](**_decode(obj["params"]))
            for k, v in obj["state"].items():
                setattr(est, k, _decode(v))
            return est
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def _state(est) -> dict:
    return {k: _encode(v) for k, v in vars(est).items() if k.endswith("_") or k in ("_X", "_y")}


def dump_model(model, spec: LearnerSpec, path=None, extra: dict | None = None) -> str:
    """Serialize a fitted model to JSON text; floats use round-trip repr so reloads are bit-exact.

    ``extra`` holds companions such as the fitted :class:`~pdvoice.dataset.Standardizer`.
    """
    doc = {"format": "pdvoice-model/1", "spec": spec.to_dict(), "model": _encode(model), "extra": _encode(extra or {})}
    text = json.dumps(doc, indent=1, sort_keys=True)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def load_model(source, with_extra: bool = False):
    """Inverse of :func:`dump_model`; ``source`` is JSON text or a path.

    Returns ``(model, spec)``, or ``(model, spec, extra)`` with ``with_extra``.
    """
    text = source
    if not str(source).lstrip().startswith("{"):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    doc = json.loads(text)
    if doc.get("format") != "pdvoice-model/1":
        raise ValueError("not a pdvoice model file")
    model, spec = _decode(doc["model"]), LearnerSpec.from_dict(doc["spec"])
    if with_extra:
        return model, spec, _decode(doc.get("extra", {}))
    return model, spec
