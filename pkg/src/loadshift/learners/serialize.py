"""Model persistence as versioned JSON.

Floats are written with repr, which round-trips exactly, so a reloaded
model predicts identically and serialization is byte-stable.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import InputError
from .models import (
    AdaBoostModel,
    ForestModel,
    GbdtModel,
    KnnModel,
    LogitModel,
    Stump,
    TreeModel,
)
from .specs import spec_from_dict, spec_to_dict
from .tree import TreeArrays

SCHEMA_VERSION = 1


def _tree_to_dict(t: TreeArrays) -> dict:
    return {
        "features": t.features.tolist(),
        "thresholds": t.thresholds.tolist(),
        "lefts": t.lefts.tolist(),
        "rights": t.rights.tolist(),
        "values": t.values.tolist(),
    }


def _tree_from_dict(d: dict) -> TreeArrays:
    return TreeArrays(
        features=np.asarray(d["features"], dtype=np.int64),
        thresholds=np.asarray(d["thresholds"], dtype=float),
        lefts=np.asarray(d["lefts"], dtype=np.int64),
        rights=np.asarray(d["rights"], dtype=np.int64),
        values=np.asarray(d["values"], dtype=float),
    )


def model_to_dict(model, feature_names=None) -> dict:
    standardization = None
    if isinstance(model, LogitModel):
        params = {"weights": model.weights.tolist(), "intercept": model.intercept}
        standardization = {"mean": model.mean.tolist(), "std": model.std.tolist()}
    elif isinstance(model, KnnModel):
        params = {"X": model.X.tolist(), "y": model.y.tolist()}
        standardization = {"mean": model.mean.tolist(), "std": model.std.tolist()}
    elif isinstance(model, TreeModel):
        params = {"tree": _tree_to_dict(model.tree), "n_features": model.n_features}
    elif isinstance(model, ForestModel):
        params = {
            "trees": [_tree_to_dict(t) for t in model.trees],
            "n_features": model.n_features,
        }
    elif isinstance(model, AdaBoostModel):
        params = {
            "stumps": [
                {
                    "feature": s.feature,
                    "threshold": s.threshold,
                    "left_is_positive": s.left_is_positive,
                    "alpha": s.alpha,
                }
                for s in model.stumps
            ],
            "n_features": model.n_features,
        }
    elif isinstance(model, GbdtModel):
        params = {
            "base_score": model.base_score,
            "trees": [_tree_to_dict(t) for t in model.trees],
            "n_features": model.n_features,
        }
    else:
        raise InputError(f"cannot serialize {type(model).__name__}")
    return {
        "schema_version": SCHEMA_VERSION,
        "spec": spec_to_dict(model.spec),
        "parameters": params,
        "feature_names": list(feature_names) if feature_names else None,
        "standardization": standardization,
    }


def model_from_dict(doc: dict):
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"unsupported model schema version: {doc.get('schema_version')}")
    spec = spec_from_dict(doc["spec"])
    params = doc["parameters"]
    std = doc.get("standardization") or {}
    family = doc["spec"]["family"]
    if family == "logit":
        return LogitModel(
            spec,
            np.asarray(params["weights"], dtype=float),
            float(params["intercept"]),
            np.asarray(std["mean"], dtype=float),
            np.asarray(std["std"], dtype=float),
        )
    if family == "knn":
        return KnnModel(
            spec,
            np.asarray(params["X"], dtype=float),
            np.asarray(params["y"], dtype=np.int64),
            np.asarray(std["mean"], dtype=float),
            np.asarray(std["std"], dtype=float),
        )
    if family == "tree":
        return TreeModel(spec, _tree_from_dict(params["tree"]), int(params["n_features"]))
    if family == "forest":
        return ForestModel(
            spec, [_tree_from_dict(t) for t in params["trees"]], int(params["n_features"])
        )
    if family == "adaboost":
        stumps = [
            Stump(int(s["feature"]), float(s["threshold"]), bool(s["left_is_positive"]), float(s["alpha"]))
            for s in params["stumps"]
        ]
        return AdaBoostModel(spec, stumps, int(params["n_features"]))
    if family == "gbdt":
        return GbdtModel(
            spec,
            float(params["base_score"]),
            [_tree_from_dict(t) for t in params["trees"]],
            int(params["n_features"]),
        )
    raise InputError(f"unknown family in model document: {family}")


def model_to_bytes(model, feature_names=None) -> bytes:
    doc = model_to_dict(model, feature_names)
    return json.dumps(doc, sort_keys=True, indent=2).encode()


def save_model(model, path, feature_names=None) -> None:
    Path(path).write_bytes(model_to_bytes(model, feature_names) + b"\n")


def load_model(path):
    path = Path(path)
    if not path.exists():
        raise InputError(f"model file not found: {path}")
    doc = json.loads(path.read_text())
    return model_from_dict(doc), doc.get("feature_names")
