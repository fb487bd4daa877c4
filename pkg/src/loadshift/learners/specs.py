"""Hyperparameter specs for the six model families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..errors import InputError


@dataclass(frozen=True)
class LogitSpec:
    l2_lambda: float = 0.0
    max_iters: int = 500
    tol: float = 1e-6
    family = "logit"


@dataclass(frozen=True)
class KnnSpec:
    k: int = 5
    distance_weighted: bool = False
    family = "knn"


@dataclass(frozen=True)
class TreeSpec:
    max_depth: int = 6
    min_leaf: int = 5
    family = "tree"


@dataclass(frozen=True)
class ForestSpec:
    n_trees: int = 100
    max_depth: int = 8
    min_leaf: int = 5
    feature_subsample: float | None = None  # None -> ceil(sqrt(M)) features per split
    seed: int = 0
    bootstrap: bool = True
    family = "forest"


@dataclass(frozen=True)
class AdaBoostSpec:
    n_rounds: int = 50
    learning_rate: float = 1.0
    family = "adaboost"


@dataclass(frozen=True)
class GbdtSpec:
    n_rounds: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    l2_lambda: float = 1.0
    min_leaf: int = 5
    family = "gbdt"


ModelSpec = Union[LogitSpec, KnnSpec, TreeSpec, ForestSpec, AdaBoostSpec, GbdtSpec]

FAMILIES = ("logit", "knn", "tree", "forest", "adaboost", "gbdt")
TREE_FAMILIES = ("tree", "forest", "gbdt")

_SPEC_CLASSES = {
    "logit": LogitSpec,
    "knn": KnnSpec,
    "tree": TreeSpec,
    "forest": ForestSpec,
    "adaboost": AdaBoostSpec,
    "gbdt": GbdtSpec,
}


def spec_class(family: str):
    try:
        return _SPEC_CLASSES[family]
    except KeyError:
        raise InputError(f"unknown model family '{family}' (valid: {FAMILIES})") from None


def validate_spec(spec: ModelSpec) -> None:
    if isinstance(spec, LogitSpec):
        ok = spec.l2_lambda >= 0 and spec.max_iters >= 1 and spec.tol > 0
    elif isinstance(spec, KnnSpec):
        ok = spec.k >= 1
    elif isinstance(spec, TreeSpec):
        ok = spec.max_depth >= 1 and spec.min_leaf >= 1
    elif isinstance(spec, ForestSpec):
        ok = (
            spec.n_trees >= 1
            and spec.max_depth >= 1
            and spec.min_leaf >= 1
            and (spec.feature_subsample is None or 0.0 < spec.feature_subsample <= 1.0)
        )
    elif isinstance(spec, AdaBoostSpec):
        ok = spec.n_rounds >= 1 and spec.learning_rate > 0
    elif isinstance(spec, GbdtSpec):
        ok = (
            spec.n_rounds >= 1
            and spec.max_depth >= 1
            and spec.learning_rate >= 0
            and spec.l2_lambda >= 0
            and spec.min_leaf >= 1
        )
    else:
        raise InputError(f"not a model spec: {spec!r}")
    if not ok:
        raise InputError(f"hyperparameters out of range: {spec!r}")


def spec_to_dict(spec: ModelSpec) -> dict:
    d = {"family": spec.family}
    for f in spec.__dataclass_fields__:
        d[f] = getattr(spec, f)
    return d


def spec_from_dict(d: dict) -> ModelSpec:
    d = dict(d)
    cls = spec_class(d.pop("family"))
    spec = cls(**d)
    validate_spec(spec)
    return spec
