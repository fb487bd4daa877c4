"""Attribution containers shared by every explainer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError

PROBABILITY = "probability"
LOG_ODDS = "log_odds"


@dataclass
class Attribution:
    base_value: float  # expected model output over the background, in output_space
    contributions: np.ndarray  # signed, one per feature
    output_space: str  # "probability" | "log_odds"
    feature_names: list[str]

    def total(self) -> float:
        return float(self.base_value + self.contributions.sum())


@dataclass
class BackgroundSet:
    rows: np.ndarray  # (B, M), drawn from training rows only
    seed: int


def sample_background(X_train: np.ndarray, size: int = 100, seed: int = 0) -> BackgroundSet:
    """Sample background rows without replacement (all rows if fewer)."""
    X_train = np.asarray(X_train, dtype=float)
    if len(X_train) == 0:
        raise InputError("cannot sample a background from an empty training set")
    if len(X_train) <= size:
        return BackgroundSet(X_train.copy(), seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6B67]))
    idx = np.sort(rng.choice(len(X_train), size=size, replace=False))
    return BackgroundSet(X_train[idx], seed)


def attribution_to_dict(attr: Attribution, feature_values, groups) -> dict:
    """JSON form with per-feature instance value and group tag attached."""
    return {
        "base_value": attr.base_value,
        "output_space": attr.output_space,
        "contributions": [
            {
                "feature": name,
                "value": float(v),
                "phi": float(phi),
                "group": group,
            }
            for name, v, phi, group in zip(
                attr.feature_names, feature_values, attr.contributions, groups
            )
        ],
    }
