from .grid import TuningReport, default_grid, grid_search, load_grid
from .metrics import auc, mse
from .models import (
    AdaBoostModel,
    ForestModel,
    GbdtModel,
    KnnModel,
    LogitModel,
    TrainedModel,
    TreeModel,
    fit_classifier,
    model_trees,
    predict_proba,
    sigmoid,
)
from .serialize import load_model, model_to_bytes, model_to_dict, save_model
from .specs import (
    AdaBoostSpec,
    FAMILIES,
    ForestSpec,
    GbdtSpec,
    KnnSpec,
    LogitSpec,
    ModelSpec,
    TREE_FAMILIES,
    TreeSpec,
    spec_class,
    spec_from_dict,
    spec_to_dict,
    validate_spec,
)

__all__ = [
    "AdaBoostModel",
    "AdaBoostSpec",
    "FAMILIES",
    "ForestModel",
    "ForestSpec",
    "GbdtModel",
    "GbdtSpec",
    "KnnModel",
    "KnnSpec",
    "LogitModel",
    "LogitSpec",
    "ModelSpec",
    "TREE_FAMILIES",
    "TrainedModel",
    "TreeModel",
    "TreeSpec",
    "TuningReport",
    "auc",
    "default_grid",
    "fit_classifier",
    "grid_search",
    "load_grid",
    "load_model",
    "model_to_bytes",
    "model_to_dict",
    "model_trees",
    "mse",
    "predict_proba",
    "save_model",
    "sigmoid",
    "spec_class",
    "spec_from_dict",
    "spec_to_dict",
    "validate_spec",
]
