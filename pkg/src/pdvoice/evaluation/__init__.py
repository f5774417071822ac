from .crossval import METRIC_NAMES, EvalReport, FoldError, FoldResult, cross_validate, cv_accuracy
from .folds import FoldPlan, group_kfold, row_kfold
from .metrics import ConfusionMatrix, Metrics, metrics, roc_auc, roc_curve, t_interval
from .search import SEARCH_SPACES, SearchResult, SearchSpace, nested_search, random_search

__all__ = [
    "ConfusionMatrix",
    "EvalReport",
    "FoldError",
    "FoldPlan",
    "FoldResult",
    "METRIC_NAMES",
    "Metrics",
    "SEARCH_SPACES",
    "SearchResult",
    "SearchSpace",
    "cross_validate",
    "cv_accuracy",
    "group_kfold",
    "metrics",
    "nested_search",
    "random_search",
    "roc_auc",
    "roc_curve",
    "row_kfold",
    "t_interval",
]
