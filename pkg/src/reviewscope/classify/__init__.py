"""Cost-sensitive classifiers over marker vectors, with CV, metrics, and IO."""

from .boosting import fit_gradient_boosting
from .cv import DEFAULT_GRIDS, FIT_FUNCTIONS, GridSearchResult, grid_search, stratified_kfold
from .forest import fit_random_forest
from .linear import fit_logistic_regression
from .metrics import (
    EvalReport,
    accuracy,
    auc_roc,
    confusion_matrix,
    evaluate_predictions,
    f1_score,
    fpr_fnr,
    precision,
    recall,
)
from .model import (
    TrainedModel,
    compute_class_weight,
    load_model,
    predict,
    predict_proba,
    save_model,
)
from .trees import TreeNode

__all__ = [
    "DEFAULT_GRIDS",
    "EvalReport",
    "FIT_FUNCTIONS",
    "GridSearchResult",
    "TrainedModel",
    "TreeNode",
    "accuracy",
    "auc_roc",
    "compute_class_weight",
    "confusion_matrix",
    "evaluate_predictions",
    "f1_score",
    "fit_gradient_boosting",
    "fit_logistic_regression",
    "fit_random_forest",
    "fpr_fnr",
    "grid_search",
    "load_model",
    "precision",
    "predict",
    "predict_proba",
    "recall",
    "save_model",
    "stratified_kfold",
]
