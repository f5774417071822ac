from .base import (
    LEARNERS,
    LearnerSpec,
    NoImportancesError,
    decision_scores,
    dump_model,
    importances,
    load_model,
    make_learner,
)
from .dummy import MajorityClass
from .ensemble import AdaBoost, GradientBoosting, RandomForest
from .knn import KNeighbors
from .logistic import LogisticRegression, loss_and_grad
from .svm import SVC, smo
from .tree import DecisionTree, RegressionTree, Tree, gini, prune_ccp

__all__ = [
    "AdaBoost",
    "DecisionTree",
    "GradientBoosting",
    "KNeighbors",
    "LEARNERS",
    "LearnerSpec",
    "LogisticRegression",
    "MajorityClass",
    "NoImportancesError",
    "RandomForest",
    "RegressionTree",
    "SVC",
    "Tree",
    "decision_scores",
    "dump_model",
    "gini",
    "importances",
    "load_model",
    "loss_and_grad",
    "make_learner",
    "prune_ccp",
    "smo",
]
