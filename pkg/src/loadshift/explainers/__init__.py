from .attribution import (
    Attribution,
    BackgroundSet,
    LOG_ODDS,
    PROBABILITY,
    attribution_to_dict,
    sample_background,
)
from .evaluate import ExplainerReport, evaluate_explainer
from .kernel import EXACT_ENUMERATION_LIMIT, kernel_shap, masked_values, shapley_kernel_weight
from .lime import LimeSurrogate, lime_explain
from .oracle import ORACLE_FEATURE_LIMIT, exact_shapley_oracle
from .tree_interventional import tree_shap_interventional

__all__ = [
    "Attribution",
    "BackgroundSet",
    "EXACT_ENUMERATION_LIMIT",
    "ExplainerReport",
    "LOG_ODDS",
    "LimeSurrogate",
    "ORACLE_FEATURE_LIMIT",
    "PROBABILITY",
    "attribution_to_dict",
    "evaluate_explainer",
    "exact_shapley_oracle",
    "kernel_shap",
    "lime_explain",
    "masked_values",
    "sample_background",
    "shapley_kernel_weight",
    "tree_shap_interventional",
]
