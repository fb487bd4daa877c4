"""Exhaustive grid search with a chronological validation protocol.

The shipped default grid enumerates exactly 87 combinations across the five
tuned families (6 logit + 18 knn + 24 forest + 15 adaboost + 24 gbdt).
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..errors import DataError, InputError
from .metrics import auc
from .models import fit_classifier
from .specs import (
    AdaBoostSpec,
    ForestSpec,
    GbdtSpec,
    KnnSpec,
    LogitSpec,
    ModelSpec,
    spec_class,
    spec_to_dict,
    validate_spec,
)


@dataclass
class TuningReport:
    entries: list[tuple[ModelSpec, float]]  # (spec, validation AUC) in grid order
    chosen: ModelSpec
    combination_count: int

    def to_dict(self) -> dict:
        return {
            "combination_count": self.combination_count,
            "chosen": spec_to_dict(self.chosen),
            "entries": [
                {"spec": spec_to_dict(s), "validation_auc": a} for s, a in self.entries
            ],
        }


def default_grid() -> list[ModelSpec]:
    grid: list[ModelSpec] = []
    for l2 in (0.0, 0.001, 0.01, 0.1, 1.0, 10.0):
        grid.append(LogitSpec(l2_lambda=l2))
    for k in (1, 3, 5, 7, 9, 11, 15, 21, 31):
        for weighted in (False, True):
            grid.append(KnnSpec(k=k, distance_weighted=weighted))
    for n_trees in (25, 50, 100, 200):
        for depth in (4, 8, 12):
            for min_leaf in (1, 5):
                grid.append(ForestSpec(n_trees=n_trees, max_depth=depth, min_leaf=min_leaf))
    for rounds in (10, 25, 50, 100, 200):
        for lr in (0.5, 1.0, 1.5):
            grid.append(AdaBoostSpec(n_rounds=rounds, learning_rate=lr))
    for rounds in (25, 50, 100):
        for depth in (2, 3):
            for lr in (0.05, 0.1):
                for l2 in (1.0, 10.0):
                    grid.append(
                        GbdtSpec(n_rounds=rounds, max_depth=depth, learning_rate=lr, l2_lambda=l2)
                    )
    return grid


def load_grid(path) -> list[ModelSpec]:
    """Read a grid file: ``{family: {param: [values, ...], ...}, ...}``.

    The cartesian product is taken per family, in file order.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"grid file not found: {path}")
    raw = json.loads(path.read_text())
    grid: list[ModelSpec] = []
    for family, params in raw.items():
        cls = spec_class(family)
        names = list(params)
        for combo in itertools.product(*(params[n] for n in names)):
            grid.append(cls(**dict(zip(names, combo))))
    if not grid:
        raise InputError(f"grid file {path} defines no combinations")
    return grid


def _score_one(args):
    spec, X_train, y_train, X_val, y_val, seed = args
    model = fit_classifier(spec, X_train, y_train, seed)
    return auc(model.predict_proba(X_val), y_val)


def grid_search(grid, train, validation, seed: int = 0, jobs: int = 1) -> TuningReport:
    """Fit every spec on the train split, score by validation AUC.

    Ties go to the first spec in enumeration order. ``train`` and
    ``validation`` are (X, y) pairs.
    """
    if not grid:
        raise InputError("empty grid")
    for spec in grid:
        validate_spec(spec)
    X_train, y_train = train
    X_val, y_val = validation
    if y_val.sum() == 0 or y_val.sum() == len(y_val):
        raise DataError("validation split has a single class; cannot rank by AUC")

    tasks = [(spec, X_train, y_train, X_val, y_val, seed) for spec in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(_score_one, tasks, chunksize=4))
    else:
        scores = [_score_one(t) for t in tasks]

    entries = list(zip(list(grid), scores))
    best_idx = max(range(len(scores)), key=lambda i: (scores[i], -i))
    return TuningReport(entries=entries, chosen=grid[best_idx], combination_count=len(grid))
