"""Interventional Shapley values for tree ensembles, exact per background row.

For one tree and one background row the masked model only depends on the
features where the instance and the background row part ways. Walking both
paths at once enumerates every reachable leaf together with the sets of
features forced to the instance side (must be in the coalition) and to the
background side (must be out). Each leaf then contributes closed-form
Shapley weights: with a forced-in features and b forced-out features, a
member of the in-set receives leaf_value / (a * C(a+b, a)) and a member of
the out-set receives -leaf_value / (b * C(a+b, b)).
"""

from __future__ import annotations

from math import comb

import numpy as np

from ..errors import InputError
from .attribution import Attribution, BackgroundSet, LOG_ODDS, PROBABILITY
from ..learners.models import GbdtModel, model_trees
from ..learners.tree import LEAF


def _accumulate_tree_row(tree, x, r, phi) -> None:
    features = tree.features
    thresholds = tree.thresholds
    lefts = tree.lefts
    rights = tree.rights
    values = tree.values
    stack = [(0, 0, 0)]  # node index, instance-side bitmask, background-side bitmask
    while stack:
        node, in_mask, out_mask = stack.pop()
        f = int(features[node])
        if f == LEAF:
            v = float(values[node])
            a = bin(in_mask).count("1")
            b = bin(out_mask).count("1")
            if a:
                w = v / (a * comb(a + b, a))
                mask = in_mask
                while mask:
                    low = mask & -mask
                    phi[low.bit_length() - 1] += w
                    mask ^= low
            if b:
                w = v / (b * comb(a + b, b))
                mask = out_mask
                while mask:
                    low = mask & -mask
                    phi[low.bit_length() - 1] -= w
                    mask ^= low
            continue
        thr = thresholds[node]
        x_child = lefts[node] if x[f] <= thr else rights[node]
        r_child = lefts[node] if r[f] <= thr else rights[node]
        bit = 1 << f
        if x_child == r_child:
            stack.append((x_child, in_mask, out_mask))
        elif in_mask & bit:
            stack.append((x_child, in_mask, out_mask))
        elif out_mask & bit:
            stack.append((r_child, in_mask, out_mask))
        else:
            stack.append((x_child, in_mask | bit, out_mask))
            stack.append((r_child, in_mask, out_mask | bit))


def tree_shap_interventional(
    model, instance, background: BackgroundSet, feature_names=None
) -> Attribution:
    """Exact interventional Shapley values, averaged over the background.

    Output space is probability for single trees and forests, log-odds for
    the boosted model (its native additive space).
    """
    trees, scale, _ = model_trees(model)  # raises InputError on other families
    x = np.asarray(instance, dtype=float)
    bg = np.asarray(background.rows, dtype=float)
    if bg.size == 0:
        raise InputError("background set is empty")
    m = len(x)
    names = list(feature_names) if feature_names else [f"f{i}" for i in range(m)]

    phi = np.zeros(m)
    for tree in trees:
        for r in bg:
            _accumulate_tree_row(tree, x, r, phi)
    phi *= scale / len(bg)

    if isinstance(model, GbdtModel):
        base = float(np.mean(model.margin(bg)))
        space = LOG_ODDS
    else:
        base = float(np.mean(model.predict_proba(bg)))
        space = PROBABILITY
    return Attribution(base, phi, space, names)
