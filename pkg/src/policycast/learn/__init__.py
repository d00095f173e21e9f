"""Classifiers, regressors and the cross-validation harness."""
from .data import Dataset, build_dataset
from .evaluate import (
    EvalReport,
    ModelSpec,
    cross_validate,
    majority_baseline,
    predict,
    select_lambda,
    select_max_depth,
    significance_threshold,
    top_k_frequency,
)
from .forest import ForestModel, gini_importance, train_forest
from .lasso import LassoModel, lambda_max, train_lasso
from .logistic import LogisticModel, SingleClassError, train_logistic
from .metrics import accuracy, r_squared

__all__ = [
    "Dataset", "build_dataset", "EvalReport", "ModelSpec", "cross_validate", "majority_baseline",
    "predict", "select_lambda", "select_max_depth", "significance_threshold", "top_k_frequency",
    "ForestModel", "gini_importance", "train_forest", "LassoModel", "lambda_max", "train_lasso",
    "LogisticModel", "SingleClassError", "train_logistic", "accuracy", "r_squared",
]
