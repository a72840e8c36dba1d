"""Time-series rumor classifiers and their evaluation."""
from .data import Dataset, DatasetError, check_xy
from .evaluation import (
    DEFAULT_HOURS,
    MODEL_KINDS,
    CVResult,
    FittedPipeline,
    ReportRow,
    TooFewEventsError,
    accuracy_over_time,
    base_feature_groups,
    best_set,
    cross_validate,
    cv_permutation_importance,
    fit_pipeline,
    permutation_importance,
    stratified_folds,
)
from .forest import (
    FlatTree,
    ForestModel,
    SingleClassError,
    forest_from_json,
    forest_to_json,
    train_random_forest,
)
from .svm import (
    SvmConvergenceError,
    SvmModel,
    UnnormalizedDataError,
    rbf_kernel,
    svm_from_json,
    svm_to_json,
    train_svm_rbf,
)

__all__ = [
    "DEFAULT_HOURS", "MODEL_KINDS", "CVResult", "Dataset", "DatasetError", "FittedPipeline",
    "FlatTree", "ForestModel", "ReportRow", "SingleClassError", "SvmConvergenceError",
    "SvmModel", "TooFewEventsError", "UnnormalizedDataError", "accuracy_over_time",
    "base_feature_groups", "best_set", "check_xy", "cross_validate", "cv_permutation_importance",
    "fit_pipeline", "forest_from_json", "forest_to_json", "permutation_importance",
    "rbf_kernel", "stratified_folds", "svm_from_json", "svm_to_json", "train_random_forest",
    "train_svm_rbf",
]
