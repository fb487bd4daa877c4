"""Predictive metrics: ranking AUC and load-profile MSE."""

from __future__ import annotations

import numpy as np

from ..errors import DataError


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks, ties sharing the average of their positions."""
    order = np.argsort(values, kind="stable")
    s = values[order]
    ranks = np.empty(len(values))
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j + 2) / 2.0  # mean of 1-based i+1 .. j+1
        i = j + 1
    return ranks


def auc(scores, labels) -> float:
    """Probability a random positive outranks a random negative, ties count half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC needs both classes present")
    ranks = _average_ranks(scores)
    r_pos = float(ranks[labels == 1].sum())
    return (r_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def mse(predicted_profile, actual_cycles) -> float:
    """Mean squared watt error of a load profile against observed cycles.

    Cycles align at their first hour and are truncated or zero-padded to the
    profile length before averaging over cycles and positions.
    """
    profile = np.asarray(predicted_profile, dtype=float)
    d = len(profile)
    if d < 1:
        raise DataError("profile must have at least one hour")
    if len(actual_cycles) == 0:
        raise DataError("no cycles to score against")
    total = 0.0
    for cycle in actual_cycles:
        c = np.zeros(d)
        cycle = np.asarray(cycle, dtype=float)
        take = min(d, len(cycle))
        c[:take] = cycle[:take]
        total += float(np.sum((profile - c) ** 2))
    return total / (len(actual_cycles) * d)
