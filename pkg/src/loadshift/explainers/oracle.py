"""Brute-force Shapley values by full coalition enumeration.

The test oracle for both SHAP paths: cost 2^M model sweeps over the
background, so M is capped at 15.
"""

from __future__ import annotations

from math import comb

import numpy as np

from ..errors import InputError
from .attribution import Attribution, BackgroundSet, LOG_ODDS, PROBABILITY
from .kernel import _all_masks, masked_values
from ..learners.models import GbdtModel

ORACLE_FEATURE_LIMIT = 15


def exact_shapley_oracle(
    model,
    instance,
    background: BackgroundSet,
    output_space: str = PROBABILITY,
    feature_names=None,
) -> Attribution:
    """phi_i = sum over coalitions S without i of
    |S|! (M-|S|-1)! / M! * (v(S + i) - v(S)), with interventional v."""
    x = np.asarray(instance, dtype=float)
    bg = np.asarray(background.rows, dtype=float)
    m = len(x)
    if m > ORACLE_FEATURE_LIMIT:
        raise InputError(f"oracle limited to {ORACLE_FEATURE_LIMIT} features, got {m}")
    if bg.size == 0:
        raise InputError("background set is empty")

    if callable(model):
        fn = model
    elif output_space == LOG_ODDS:
        if not isinstance(model, GbdtModel):
            raise InputError("log-odds oracle only applies to the boosted model")
        fn = model.margin
    else:
        fn = model.predict_proba

    masks = _all_masks(m)
    v = masked_values(fn, x, bg, masks)
    size_of = masks.sum(axis=1)
    weight_by_size = np.array([1.0 / (m * comb(m - 1, s)) for s in range(m)])

    phi = np.zeros(m)
    for i in range(m):
        without = np.nonzero(~masks[:, i])[0]
        with_i = without + (1 << i)
        phi[i] = float(np.sum(weight_by_size[size_of[without]] * (v[with_i] - v[without])))

    names = list(feature_names) if feature_names else [f"f{i}" for i in range(m)]
    return Attribution(float(v[0]), phi, output_space, names)
