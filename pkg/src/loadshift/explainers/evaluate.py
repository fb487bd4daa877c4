"""Explainer quality metrics: accuracy, fidelity, MAEE, and runtime.

The surrogate prediction for an instance is base + sum(contributions),
mapped through the sigmoid when the attribution lives in log-odds. Fidelity
is class agreement with the model at the cutoff, accuracy is class agreement
with the true labels, and MAEE is the mean absolute gap to the model's
probability. Duration is the mean wall clock to explain one full day.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from .attribution import LOG_ODDS
from ..learners.models import sigmoid


@dataclass
class ExplainerReport:
    accuracy: float
    fidelity: float
    maee: float
    duration_seconds: float  # mean per prediction day

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "fidelity": self.fidelity,
            "maee": self.maee,
            "duration_seconds": self.duration_seconds,
        }


def evaluate_explainer(explain_fn, model, days, cutoff: float = 0.5) -> ExplainerReport:
    """Score one explainer on instances grouped by prediction day.

    ``explain_fn(model, x) -> Attribution``; ``days`` is a list of
    ``(X_day, y_day)`` pairs. Timing wraps each day's batch and is averaged
    over days; the other metrics pool all instances.
    """
    if not 0.0 < cutoff < 1.0:
        raise InputError("cutoff must be in (0, 1)")
    if not days or all(len(y) == 0 for _, y in days):
        raise InputError("no instances to evaluate")

    g_list, f_list, y_list, durations = [], [], [], []
    for X_day, y_day in days:
        X_day = np.asarray(X_day, dtype=float)
        start = time.perf_counter()
        attrs = [explain_fn(model, x) for x in X_day]
        durations.append(time.perf_counter() - start)
        for attr in attrs:
            g = attr.total()
            g_list.append(float(sigmoid(g)) if attr.output_space == LOG_ODDS else g)
        f_list.extend(np.asarray(model.predict_proba(X_day), dtype=float))
        y_list.extend(np.asarray(y_day, dtype=np.int64))

    g = np.asarray(g_list)
    f = np.asarray(f_list)
    y = np.asarray(y_list)
    return ExplainerReport(
        accuracy=float(np.mean((g >= cutoff) == (y == 1))),
        fidelity=float(np.mean((g >= cutoff) == (f >= cutoff))),
        maee=float(np.mean(np.abs(g - f))),
        duration_seconds=float(np.mean(durations)),
    )
