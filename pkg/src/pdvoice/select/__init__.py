from .filter import mw_pvalues, mw_select
from .lasso import LassoModel, choose_lambda, lambda_max, lasso_cv, lasso_fit, lasso_path, lasso_select
from .relief import ReliefState, minmax_scale, relieff, relieff_select
from .result import SelectionResult
from .sklearn_api import FeatureSelector
from .stats import UTestResult, mann_whitney_u
from .wrappers import rfecv, sfs

METHODS = ("mannwhitney", "lasso", "relieff", "sfs", "rfecv")

__all__ = [
    "FeatureSelector",
    "LassoModel",
    "METHODS",
    "ReliefState",
    "SelectionResult",
    "UTestResult",
    "choose_lambda",
    "lambda_max",
    "lasso_cv",
    "lasso_fit",
    "lasso_path",
    "lasso_select",
    "mann_whitney_u",
    "minmax_scale",
    "mw_pvalues",
    "mw_select",
    "relieff",
    "relieff_select",
    "rfecv",
    "sfs",
]
