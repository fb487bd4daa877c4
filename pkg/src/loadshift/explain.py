"""Sentence rendering for recommendations.

Each explanation names the two features with the largest absolute
contribution inside each group (weather vs non-weather); ties break toward
the earlier feature index.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .explainers import Attribution
from .features import NON_WEATHER_GROUP, WEATHER_GROUP

USAGE_TEMPLATE = (
    "We recommend using the {device} today. The prediction was mainly driven by "
    "{nw1} and {nw2}; the weather conditions {w1} and {w2} also {direction} the likelihood."
)
AVAILABILITY_TEMPLATE = (
    "Hour {hour}:00 was chosen because you are likely available then, mainly due to "
    "{nw1} and {nw2}; weather features {w1} and {w2} also contributed."
)
NO_DRIVERS_TEMPLATE = "No single feature stood out for the {device} prediction today."
NO_DRIVERS_AVAILABILITY_TEMPLATE = (
    "Hour {hour}:00 was chosen; no single feature stood out in the availability prediction."
)


def display_name(feature: str) -> str:
    return feature.replace("_", " ")


def top_features_by_group(attr: Attribution, groups, k: int = 2) -> dict[str, list[int]]:
    """Indices of the k largest |phi| per group, earlier index winning ties."""
    if len(attr.contributions) == 0:
        raise InputError("empty attribution")
    by_group: dict[str, list[int]] = {}
    for group in (WEATHER_GROUP, NON_WEATHER_GROUP):
        members = [i for i, g in enumerate(groups) if g == group]
        members.sort(key=lambda i: (-abs(float(attr.contributions[i])), i))
        by_group[group] = members[:k]
    return by_group


def _slots(attr: Attribution, groups):
    top = top_features_by_group(attr, groups, k=2)
    nw = top[NON_WEATHER_GROUP]
    w = top[WEATHER_GROUP]
    if len(nw) < 2 or len(w) < 2:
        return None
    return nw, w


def render_usage_sentence(device_name: str, attr: Attribution, groups) -> str:
    if not np.any(attr.contributions != 0.0):
        return NO_DRIVERS_TEMPLATE.format(device=device_name)
    slots = _slots(attr, groups)
    if slots is None:
        return NO_DRIVERS_TEMPLATE.format(device=device_name)
    nw, w = slots
    direction = (
        "increased"
        if float(attr.contributions[w[0]] + attr.contributions[w[1]]) >= 0
        else "decreased"
    )
    return USAGE_TEMPLATE.format(
        device=device_name,
        nw1=display_name(attr.feature_names[nw[0]]),
        nw2=display_name(attr.feature_names[nw[1]]),
        w1=display_name(attr.feature_names[w[0]]),
        w2=display_name(attr.feature_names[w[1]]),
        direction=direction,
    )


def render_availability_sentence(hour: int, attr: Attribution, groups) -> str:
    if not np.any(attr.contributions != 0.0):
        return NO_DRIVERS_AVAILABILITY_TEMPLATE.format(hour=hour)
    slots = _slots(attr, groups)
    if slots is None:
        return NO_DRIVERS_AVAILABILITY_TEMPLATE.format(hour=hour)
    nw, w = slots
    return AVAILABILITY_TEMPLATE.format(
        hour=hour,
        nw1=display_name(attr.feature_names[nw[0]]),
        nw2=display_name(attr.feature_names[nw[1]]),
        w1=display_name(attr.feature_names[w[0]]),
        w2=display_name(attr.feature_names[w[1]]),
    )
