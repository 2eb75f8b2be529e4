"""Decision tree, random forest, k-nearest-neighbours and linear SVM classifiers."""
from .models import (
    FOREST,
    KINDS,
    KNN,
    SVM,
    TREE,
    LearnError,
    ModelSpec,
    Prediction,
    TrainedModel,
    feature_importances,
    fit,
    predict,
)

__all__ = [
    "FOREST", "KINDS", "KNN", "SVM", "TREE", "LearnError", "ModelSpec", "Prediction",
    "TrainedModel", "feature_importances", "fit", "predict",
]
