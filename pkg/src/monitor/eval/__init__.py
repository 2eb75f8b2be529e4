"""Metrics, cross-validation, the end-to-end run and its reports."""
from .cv import CvError, CvReport, assign_folds, cross_validate, fit_fold
from .metrics import METRIC_NAMES, MetricsReport, f1_consistent, metrics
from .pipeline import RunConfig, RunReport, StageError, load_features, run_pipeline, split_features
from .report import export_class_distributions, export_importances

__all__ = [
    "CvError", "CvReport", "METRIC_NAMES", "MetricsReport", "RunConfig", "RunReport", "StageError",
    "assign_folds", "cross_validate", "export_class_distributions", "export_importances",
    "f1_consistent", "fit_fold", "load_features", "metrics", "run_pipeline", "split_features",
]
