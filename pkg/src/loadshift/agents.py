"""Daily pipeline: predict availability and usage, extract typical loads,
recommend the cheapest feasible start hour, and explain the result.

Stages run in order price -> availability -> usage -> load -> recommendation
-> explainability; any failure aborts the day with the stage name attached.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, InputError, StageError
from .explain import render_availability_sentence, render_usage_sentence
from .charts import attribution_chart_svg
from .explainers import (
    Attribution,
    kernel_shap,
    lime_explain,
    sample_background,
    tree_shap_interventional,
)
from .features import (
    AVAILABILITY_FEATURES,
    USAGE_FEATURES,
    availability_features,
    availability_matrix,
    full_day_starts,
    label_usage,
    usage_features,
    usage_matrix,
)
from .ingest import DAY, HOUR, HourlyTable

EXPLAINER_METHODS = ("kernel_shap", "tree_shap", "lime")


@dataclass
class TypicalLoadProfile:
    device_id: int
    duration_hours: int
    hourly_load: np.ndarray  # mean watts per run hour
    cycles_observed: int


@dataclass
class DayPrediction:
    day_start: int  # midnight UTC, epoch seconds
    availability_probs: np.ndarray  # (24,)
    usage_probs: dict[int, float]  # device id -> probability


@dataclass
class Thresholds:
    usage: float = 0.5
    availability: float = 0.5

    def validate(self):
        if not (0.0 < self.usage < 1.0 and 0.0 < self.availability < 1.0):
            raise InputError("thresholds must be in (0, 1)")


@dataclass
class ExplanationPart:
    text: str
    attribution: Attribution
    feature_values: np.ndarray
    groups: list[str]
    svg: str


@dataclass
class Recommendation:
    device_id: int
    device_name: str
    status: str  # "recommended" | "no_recommendation"
    usage_prob: float
    reason: str | None = None  # "low_usage" | "no_available_hour"
    start_hour: int | None = None
    estimated_cost: float | None = None
    availability_prob_at_start: float | None = None
    usage_explanation: ExplanationPart | None = None
    availability_explanation: ExplanationPart | None = None


def extract_cycles(
    table: HourlyTable, device: int, active_watts: float, history_end: int
) -> list[np.ndarray]:
    """Maximal runs of consecutive hours at or above active_watts, before history_end."""
    if device < 0 or device >= table.device_loads.shape[1]:
        raise InputError(f"device index {device} out of range")
    loads = table.device_loads[:, device]
    cutoff = np.searchsorted(table.timestamps, history_end)
    active = loads[:cutoff] >= active_watts
    cycles = []
    i = 0
    while i < len(active):
        if active[i]:
            j = i
            while j + 1 < len(active) and active[j + 1]:
                j += 1
            cycles.append(loads[i : j + 1].copy())
            i = j + 1
        else:
            i += 1
    return cycles


def load_agent_profile(
    table: HourlyTable, device: int, active_watts: float, history_end: int
) -> TypicalLoadProfile:
    """Typical per-hour load of a device's historical run cycles.

    The duration is the lower median of observed cycle lengths; cycles
    shorter than that contribute zeros at the missing positions.
    """
    cycles = extract_cycles(table, device, active_watts, history_end)
    if not cycles:
        raise DataError(f"device {device} has no usage cycles before {history_end}")
    lengths = sorted(len(c) for c in cycles)
    d = lengths[(len(lengths) - 1) // 2]
    profile = np.zeros(d)
    for c in cycles:
        take = min(d, len(c))
        profile[:take] += c[:take]
    profile /= len(cycles)
    device_id = table.device_ids[device]
    return TypicalLoadProfile(device_id, d, profile, len(cycles))


def _select_columns(X: np.ndarray, all_names: list[str], wanted: list[str] | None):
    if wanted is None:
        return X
    try:
        idx = [all_names.index(n) for n in wanted]
    except ValueError as exc:
        raise InputError(f"model feature not derivable: {exc}") from exc
    return X[:, idx]


def availability_day_matrix(table: HourlyTable, labels: np.ndarray, day_start: int) -> np.ndarray:
    rows = [
        availability_features(table, labels, day_start + h * HOUR) for h in range(24)
    ]
    return np.stack(rows)


def availability_agent_predict(
    model, table: HourlyTable, labels: np.ndarray, day_start: int, feature_names=None
) -> np.ndarray:
    """One probability per hour of the prediction day."""
    X = _select_columns(
        availability_day_matrix(table, labels, day_start), AVAILABILITY_FEATURES, feature_names
    )
    return np.asarray(model.predict_proba(X), dtype=float)


def usage_agent_predict(
    models: dict[int, object],
    table: HourlyTable,
    day_start: int,
    active_watts: float,
    feature_names_by_device: dict[int, list[str] | None] | None = None,
) -> dict[int, float]:
    """Per-device usage probability for the prediction day (devices keyed by column index)."""
    out: dict[int, float] = {}
    for device, model in sorted(models.items()):
        day_starts, labels = label_usage(table, device, active_watts)
        vec = usage_features(table, day_starts, labels, day_start)
        names = (feature_names_by_device or {}).get(device)
        X = _select_columns(vec[None, :], USAGE_FEATURES, names)
        out[device] = float(model.predict_proba(X)[0])
    return out


def recommend(
    day_prediction: DayPrediction,
    profiles: dict[int, TypicalLoadProfile],
    prices_24h: np.ndarray,
    thresholds: Thresholds,
    device_names: dict[int, str] | None = None,
    strict_hours: bool = False,
    price_only_cost: bool = False,
) -> list[Recommendation]:
    """Pick the cheapest feasible start hour per device, or say why not.

    A start hour is feasible when the user is predicted available then (in
    strict mode: for every run hour) and the run fits inside the 24-hour
    horizon. Cost weights each run hour's price by the profile load in kWh;
    ties go to the earliest hour.
    """
    thresholds.validate()
    prices = np.asarray(prices_24h, dtype=float)
    if len(prices) != 24 or not np.all(np.isfinite(prices)):
        raise InputError("need 24 finite prices for the recommendation day")
    avail = day_prediction.availability_probs
    names = device_names or {}
    out = []
    for device_id, usage_prob in sorted(day_prediction.usage_probs.items()):
        name = names.get(device_id, f"device {device_id}")
        if usage_prob < thresholds.usage:
            out.append(
                Recommendation(device_id, name, "no_recommendation", usage_prob, reason="low_usage")
            )
            continue
        profile = profiles.get(device_id)
        if profile is None:
            raise DataError(f"no typical load profile for gated device {device_id}")
        d = profile.duration_hours
        candidates = []
        for h in range(0, 25 - d):
            if strict_hours:
                ok = bool(np.all(avail[h : h + d] >= thresholds.availability))
            else:
                ok = avail[h] >= thresholds.availability
            if ok:
                candidates.append(h)
        if not candidates:
            out.append(
                Recommendation(
                    device_id, name, "no_recommendation", usage_prob, reason="no_available_hour"
                )
            )
            continue
        best_h, best_cost = None, None
        for h in candidates:
            if price_only_cost:
                cost = float(np.sum(prices[h : h + d]))
            else:
                cost = float(np.sum(prices[h : h + d] * profile.hourly_load) / 1000.0)
            if best_cost is None or cost < best_cost:
                best_h, best_cost = h, cost
        out.append(
            Recommendation(
                device_id,
                name,
                "recommended",
                usage_prob,
                start_hour=best_h,
                estimated_cost=best_cost,
                availability_prob_at_start=float(avail[best_h]),
            )
        )
    return out


@dataclass
class HouseholdState:
    table: HourlyTable
    availability_model: object
    availability_feature_names: list[str] | None
    usage_models: dict[int, object]  # device column index -> model
    usage_feature_names: dict[int, list[str] | None]
    availability_label_threshold: float  # watts
    active_watts: float
    shiftable_names: dict[int, str]  # device column index -> display name


@dataclass
class PipelineSettings:
    thresholds: Thresholds = field(default_factory=Thresholds)
    explainer: str = "kernel_shap"
    background_size: int = 100
    seed: int = 0
    strict_hours: bool = False
    price_only_cost: bool = False
    lime_perturbations: int = 5000
    kernel_samples: int = 2048


def _make_explainer(method: str, train_X: np.ndarray, names: list[str], settings):
    """Bind one explainer method to a training matrix; returns explain(model, x)."""
    seed = settings.seed
    if method == "kernel_shap":
        bg = sample_background(train_X, settings.background_size, seed)

        def explain(model, x, _bg=bg):
            return kernel_shap(
                model, x, _bg, n_samples=settings.kernel_samples, seed=seed, feature_names=names
            )

    elif method == "tree_shap":
        bg = sample_background(train_X, settings.background_size, seed)

        def explain(model, x, _bg=bg):
            return tree_shap_interventional(model, x, _bg, feature_names=names)

    elif method == "lime":
        mean = train_X.mean(axis=0)
        std = train_X.std(axis=0)

        def explain(model, x):
            attr, _ = lime_explain(
                model,
                x,
                (mean, std),
                n_perturbations=settings.lime_perturbations,
                seed=seed,
                feature_names=names,
            )
            return attr

    else:
        raise InputError(f"unknown explainer method '{method}' (valid: {EXPLAINER_METHODS})")
    return explain


def _groups_for_names(names: list[str], all_names: list[str], all_groups: list[str]):
    lookup = dict(zip(all_names, all_groups))
    return [lookup[n] for n in names]


def run_daily_pipeline(state: HouseholdState, day_start: int, settings: PipelineSettings):
    """Execute one household-day end to end.

    Returns ``(recommendations, day_prediction)``; recommended devices carry
    rendered usage and availability explanations with SVG charts.
    """
    table = state.table
    if day_start % DAY != 0:
        raise InputError("day_start must be midnight UTC")

    # price stage
    try:
        idx0 = np.searchsorted(table.timestamps, day_start)
        if idx0 + 24 > len(table) or table.timestamps[idx0] != day_start:
            raise DataError("prediction day not covered by the hourly table")
        prices = table.price[idx0 : idx0 + 24]
        if not np.all(np.isfinite(prices)):
            raise DataError("missing prices on the prediction day")
    except DataError as exc:
        raise StageError("price", str(exc)) from exc

    # availability stage
    try:
        labels = (table.aggregate >= state.availability_label_threshold).astype(np.int64)
        avail_probs = availability_agent_predict(
            state.availability_model, table, labels, day_start, state.availability_feature_names
        )
    except (DataError, InputError) as exc:
        raise StageError("availability", str(exc)) from exc

    # usage stage
    try:
        usage_probs_by_col = usage_agent_predict(
            state.usage_models, table, day_start, state.active_watts, state.usage_feature_names
        )
    except (DataError, InputError) as exc:
        raise StageError("usage", str(exc)) from exc

    col_to_id = {col: table.device_ids[col] for col in state.usage_models}
    id_to_col = {v: k for k, v in col_to_id.items()}
    prediction = DayPrediction(
        day_start,
        avail_probs,
        {col_to_id[c]: p for c, p in usage_probs_by_col.items()},
    )

    # load stage: profiles only for devices past the usage gate
    profiles: dict[int, TypicalLoadProfile] = {}
    try:
        for col, p in usage_probs_by_col.items():
            if p >= settings.thresholds.usage:
                profiles[col_to_id[col]] = load_agent_profile(
                    table, col, state.active_watts, day_start
                )
    except DataError as exc:
        raise StageError("load", str(exc)) from exc

    # recommendation stage
    try:
        names_by_id = {col_to_id[c]: n for c, n in state.shiftable_names.items()}
        recs = recommend(
            prediction,
            profiles,
            prices,
            settings.thresholds,
            device_names=names_by_id,
            strict_hours=settings.strict_hours,
            price_only_cost=settings.price_only_cost,
        )
    except (DataError, InputError) as exc:
        raise StageError("recommendation", str(exc)) from exc

    # explainability stage
    try:
        _attach_explanations(state, settings, table, labels, day_start, recs, id_to_col)
    except (DataError, InputError) as exc:
        raise StageError("explainability", str(exc)) from exc

    return recs, prediction


def _attach_explanations(state, settings, table, labels, day_start, recs, id_to_col):
    recommended = [r for r in recs if r.status == "recommended"]
    if not recommended:
        return

    hist = availability_matrix(table, labels)
    hist_mask = hist.timestamps < day_start
    avail_names = state.availability_feature_names or list(AVAILABILITY_FEATURES)
    avail_train = _select_columns(hist.X[hist_mask], AVAILABILITY_FEATURES, avail_names)
    avail_groups = _groups_for_names(avail_names, hist.feature_names, hist.groups)
    avail_explain = _make_explainer(settings.explainer, avail_train, avail_names, settings)
    day_X = _select_columns(
        availability_day_matrix(table, labels, day_start), AVAILABILITY_FEATURES, avail_names
    )

    for rec in recommended:
        col = id_to_col[rec.device_id]
        umat = usage_matrix(table, col, state.active_watts)
        umask = umat.timestamps < day_start
        unames = state.usage_feature_names.get(col) or list(USAGE_FEATURES)
        utrain = _select_columns(umat.X[umask], USAGE_FEATURES, unames)
        ugroups = _groups_for_names(unames, umat.feature_names, umat.groups)
        uexplain = _make_explainer(settings.explainer, utrain, unames, settings)

        day_starts, ulabels = label_usage(table, col, state.active_watts)
        uvec = _select_columns(
            usage_features(table, day_starts, ulabels, day_start)[None, :], USAGE_FEATURES, unames
        )[0]
        uattr = uexplain(state.usage_models[col], uvec)
        rec.usage_explanation = ExplanationPart(
            text=render_usage_sentence(rec.device_name, uattr, ugroups),
            attribution=uattr,
            feature_values=uvec,
            groups=ugroups,
            svg=attribution_chart_svg(uattr),
        )

        avec = day_X[rec.start_hour]
        aattr = avail_explain(state.availability_model, avec)
        rec.availability_explanation = ExplanationPart(
            text=render_availability_sentence(rec.start_hour, aattr, avail_groups),
            attribution=aattr,
            feature_values=avec,
            groups=avail_groups,
            svg=attribution_chart_svg(aattr),
        )
