"""Input checks shared by the estimators."""

import math

import numpy as np


def check_binary_target(est, y) -> np.ndarray:
    """Set ``est.classes_`` and return y encoded as 0/1 integers.

    Labels already in {0, 1} keep both classes even if one is absent from
    this particular sample (bootstrap draws, tiny folds).
    """
    values = np.unique(y)
    if np.all(np.isin(values, (0, 1))):
        est.classes_ = np.array([0, 1])
        return np.asarray(y).astype(int)
    if values.size != 2:
        raise ValueError(f"binary classification needs exactly two classes, got {values.size}")
    est.classes_ = values
    return np.searchsorted(values, y)


def resolve_max_features(max_features, n_features: int) -> int:
    if max_features in (None, "all", "None"):
        return n_features
    if max_features == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    if max_features == "log2":
        return max(1, int(math.log2(n_features)))
    if isinstance(max_features, float):
        if not 0 < max_features <= 1:
            raise ValueError("fractional max_features must lie in (0, 1]")
        return max(1, int(max_features * n_features))
    if isinstance(max_features, (int, np.integer)) and max_features >= 1:
        return min(int(max_features), n_features)
    raise ValueError(f"invalid max_features {max_features!r}")
