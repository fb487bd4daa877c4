"""Kernel SHAP: Shapley values via weighted least squares on coalitions.

Masked evaluation is interventional: features outside the coalition are
replaced by background-row values and the model output is averaged over the
background. With 12 or fewer features every coalition is enumerated, which
makes the solution the exact Shapley attribution; otherwise coalitions are
sampled proportionally to the Shapley kernel weight.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InputError
from .attribution import Attribution, BackgroundSet, PROBABILITY

EXACT_ENUMERATION_LIMIT = 12


def _model_fn(model):
    return model if callable(model) else model.predict_proba


def _all_masks(m: int) -> np.ndarray:
    return ((np.arange(2**m)[:, None] >> np.arange(m)) & 1).astype(bool)


def masked_values(fn, instance, background, masks) -> np.ndarray:
    """v(S) for each mask row: mean over background of the composite input."""
    B = len(background)
    S, M = masks.shape
    composite = np.where(
        masks[:, None, :], instance[None, None, :], background[None, :, :]
    ).reshape(S * B, M)
    out = np.asarray(fn(composite), dtype=float).reshape(S, B)
    return out.mean(axis=1)


def shapley_kernel_weight(m: int, s: int) -> float:
    return (m - 1) / (math.comb(m, s) * s * (m - s))


def _solve_constrained_wls(masks, values, weights, base, fx):
    """Least squares with the sum constraint folded out via the last feature."""
    m = masks.shape[1]
    z = masks.astype(float)
    y_adj = values - base - z[:, -1] * (fx - base)
    Z2 = z[:, :-1] - z[:, -1:]
    W = weights[:, None]
    A = Z2.T @ (W * Z2)
    rhs = Z2.T @ (weights * y_adj)
    head = np.linalg.lstsq(A, rhs, rcond=None)[0]
    phi = np.empty(m)
    phi[:-1] = head
    phi[-1] = (fx - base) - head.sum()
    return phi


def kernel_shap(
    model,
    instance,
    background: BackgroundSet,
    n_samples: int = 2048,
    seed: int = 0,
    feature_names=None,
) -> Attribution:
    """Explain one prediction in probability space.

    ``model`` is a trained model or a plain callable over feature batches.
    """
    fn = _model_fn(model)
    x = np.asarray(instance, dtype=float)
    bg = np.asarray(background.rows, dtype=float)
    if bg.size == 0:
        raise InputError("background set is empty")
    m = len(x)
    if m < 1:
        raise InputError("instance has no features")
    names = list(feature_names) if feature_names else [f"f{i}" for i in range(m)]

    base = float(np.asarray(fn(bg), dtype=float).mean())
    fx = float(fn(x[None, :])[0])
    if m == 1:
        return Attribution(base, np.array([fx - base]), PROBABILITY, names)

    if m <= EXACT_ENUMERATION_LIMIT:
        masks = _all_masks(m)
        inner = masks[1:-1]
        values = masked_values(fn, x, bg, inner)
        weights = np.array([shapley_kernel_weight(m, int(s)) for s in inner.sum(axis=1)])
    else:
        if n_samples < m + 2:
            raise InputError("n_samples too small for the sampled kernel")
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x4B53]))
        size_weights = np.array([(m - 1) / (s * (m - s)) for s in range(1, m)])
        size_probs = size_weights / size_weights.sum()
        sizes = rng.choice(np.arange(1, m), size=n_samples, p=size_probs)
        inner = np.zeros((n_samples, m), dtype=bool)
        for i, s in enumerate(sizes):
            inner[i, rng.choice(m, size=int(s), replace=False)] = True
        values = masked_values(fn, x, bg, inner)
        weights = np.ones(n_samples)

    phi = _solve_constrained_wls(inner, values, weights, base, fx)
    return Attribution(base, phi, PROBABILITY, names)
