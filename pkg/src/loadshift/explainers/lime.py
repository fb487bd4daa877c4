"""Local linear surrogates from Gaussian perturbations around the instance.

Perturbations live in standardized feature space; samples are weighted by a
Gaussian kernel on their distance to the instance and a ridge-penalized
weighted least squares fits the surrogate. Contributions are coefficient
times the standardized instance value, so base + sum(contributions) is the
surrogate's own prediction at the instance (not the model's, unlike SHAP).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DataError, InputError
from .attribution import Attribution, PROBABILITY


@dataclass
class LimeSurrogate:
    intercept: float
    coefficients: np.ndarray  # on standardized features
    mean: np.ndarray
    std: np.ndarray

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mean) / self.std
        return float(self.intercept + z @ self.coefficients)


def lime_explain(
    model,
    instance,
    train_stats,
    n_perturbations: int = 5000,
    kernel_width: float | None = None,
    l2_penalty: float = 1e-3,
    seed: int = 0,
    feature_names=None,
):
    """Explain one prediction with a local ridge surrogate.

    ``train_stats`` is the (mean, std) pair of the training matrix. Returns
    ``(attribution, surrogate)``; the attribution is deterministic for a
    fixed seed.
    """
    fn = model if callable(model) else model.predict_proba
    x = np.asarray(instance, dtype=float)
    mean, std = (np.asarray(a, dtype=float) for a in train_stats)
    m = len(x)
    if np.any(std <= 0):
        raise DataError("zero-variance training feature makes LIME sampling degenerate")
    if n_perturbations < m + 2:
        raise InputError("need at least M + 2 perturbations")
    sigma = kernel_width if kernel_width is not None else 0.75 * math.sqrt(m)

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x4C49]))
    z_x = (x - mean) / std
    Z = z_x + rng.standard_normal((n_perturbations, m))
    preds = np.asarray(fn(Z * std + mean), dtype=float)
    d2 = np.sum((Z - z_x) ** 2, axis=1)
    w = np.exp(-d2 / sigma**2)

    # ridge WLS with unpenalized intercept
    Z1 = np.column_stack([np.ones(n_perturbations), Z])
    penalty = np.diag([0.0] + [l2_penalty] * m)
    A = Z1.T @ (w[:, None] * Z1) + penalty
    rhs = Z1.T @ (w * preds)
    beta = np.linalg.solve(A, rhs)

    surrogate = LimeSurrogate(float(beta[0]), beta[1:], mean, std)
    contributions = beta[1:] * z_x
    names = list(feature_names) if feature_names else [f"f{i}" for i in range(m)]
    attr = Attribution(float(beta[0]), contributions, PROBABILITY, names)
    return attr, surrogate
