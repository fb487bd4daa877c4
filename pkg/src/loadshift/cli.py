"""Command-line surface: prepare, train, evaluate, recommend, explain-eval.

All outputs land under ``<workdir>/<household_id>/``. Exit codes: 0 success,
2 input error, 3 data/degeneracy error, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import agents
from .config import Config, load_config
from .errors import DataError, InputError, InternalError
from .explainers import (
    attribution_to_dict,
    evaluate_explainer,
    kernel_shap,
    lime_explain,
    sample_background,
    tree_shap_interventional,
)
from .features import (
    WEATHER_GROUP,
    availability_matrix,
    chronological_split,
    label_availability,
    matrix_to_csv,
    usage_matrix,
)
from .ingest import (
    DAY,
    build_hourly_table,
    knn_impute,
    load_household,
    load_prices,
    load_weather,
    resample_hourly,
    table_from_csv,
    table_to_csv,
)
from .learners import (
    auc,
    default_grid,
    fit_classifier,
    grid_search,
    load_grid,
    load_model,
    mse,
    save_model,
    spec_class,
)
from .learners.specs import TREE_FAMILIES

_JSON_KW = {"sort_keys": True, "indent": 2}


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, **_JSON_KW) + "\n")


def _parse_date(text: str) -> int:
    try:
        dt = datetime.strptime(text, "%Y-%m-%d").replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise InputError(f"date must be YYYY-MM-DD, got {text!r}") from exc
    return int(dt.timestamp())


def cmd_prepare(cfg: Config) -> Path:
    devices, aggregate, parse_report = load_household(cfg.refit_path, cfg.column_map())
    weather = load_weather(cfg.weather_path)
    prices = load_prices(cfg.prices_path)

    hourly_devices = []
    for dev in devices:
        ts, vals = resample_hourly(dev.timestamps, dev.loads)
        hourly_devices.append((dev.device_id, dev.device_name, ts, vals))
    agg_hourly = resample_hourly(aggregate.timestamps, aggregate.loads)

    table, build_report = build_hourly_table(
        cfg.household_id, hourly_devices, agg_hourly, weather, prices
    )
    table, imputed = knn_impute(table, k=cfg.impute_k)

    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    table_to_csv(table, out / "hourly.csv")
    _write_json(
        out / "imputation_report.json",
        {
            "dropped_rows": parse_report.dropped,
            "dropped_unordered_rows": parse_report.dropped_unordered,
            "load_gap_hours_filled": build_report.load_gap_hours_filled,
            "imputed_cells": imputed,
            "rows": len(table),
        },
    )
    return out / "hourly.csv"


def _task_list(cfg: Config, agent: str):
    if agent == "availability":
        return [("availability", None)]
    if agent == "usage":
        shiftable = cfg.shiftable()
        if not shiftable:
            raise InputError("no shiftable appliances configured")
        return [(f"usage_{a.id}", a.id) for a in shiftable]
    raise InputError(f"unknown agent '{agent}' (valid: availability, usage)")


def _build_matrix(cfg: Config, table, task: str):
    if task.startswith("availability"):
        labels, _ = label_availability(table, cfg.availability_watts)
        return availability_matrix(table, labels)
    device_id = int(task.split("_")[1])
    col = table.device_ids.index(device_id)
    return usage_matrix(table, col, cfg.active_watts)


def _grid_for(cfg: Config, family: str | None):
    if family is not None:
        return [spec_class(family)()]
    if cfg.grid == "default":
        return default_grid()
    return load_grid(cfg.grid)


def cmd_train(cfg: Config, agent: str, family: str | None, ablate_weather: bool) -> list[Path]:
    out = cfg.out_dir()
    table = table_from_csv(out / "hourly.csv")
    grid = _grid_for(cfg, family)
    written = []
    for task, _device in _task_list(cfg, agent):
        full = _build_matrix(cfg, table, task)
        variants = [("", full)]
        if ablate_weather:
            variants.append(("_no_weather", full.drop_weather()))
        for suffix, matrix in variants:
            trainval, _test = chronological_split(matrix, cfg.train_fraction)
            fit_part, val_part = chronological_split(trainval, 0.8)
            report = grid_search(
                grid,
                (fit_part.X, fit_part.y),
                (val_part.X, val_part.y),
                seed=cfg.seed,
                jobs=cfg.jobs,
            )
            model = fit_classifier(report.chosen, trainval.X, trainval.y, cfg.seed)
            model_path = out / "models" / f"{task}{suffix}.json"
            model_path.parent.mkdir(parents=True, exist_ok=True)
            save_model(model, model_path, feature_names=matrix.feature_names)
            _write_json(
                out / "tuning" / f"{task}{suffix}.json",
                {"task": task + suffix, "feature_names": matrix.feature_names, **report.to_dict()},
            )
            csv_path = out / "features" / f"{task}{suffix}.csv"
            csv_path.parent.mkdir(parents=True, exist_ok=True)
            matrix_to_csv(matrix, csv_path)
            written.append(model_path)
    return written


def _matrix_for_model(cfg: Config, table, task: str, feature_names):
    base_task = task.replace("_no_weather", "")
    matrix = _build_matrix(cfg, table, base_task)
    if feature_names is not None and set(feature_names) != set(matrix.feature_names):
        matrix = matrix.drop_weather()
        if set(feature_names) != set(matrix.feature_names):
            raise InternalError(f"model features for {task} do not match any known matrix")
    return matrix


def _saved_models(cfg: Config):
    models_dir = cfg.out_dir() / "models"
    if not models_dir.is_dir():
        raise InputError(f"no trained models under {models_dir} (run 'train' first)")
    return sorted(models_dir.glob("*.json"))


def cmd_evaluate(cfg: Config) -> dict:
    out = cfg.out_dir()
    table = table_from_csv(out / "hourly.csv")
    aucs: dict[str, float] = {}
    families: dict[str, str] = {}
    boundary_by_device: dict[int, int] = {}
    for model_path in _saved_models(cfg):
        task = model_path.stem
        model, feature_names = load_model(model_path)
        matrix = _matrix_for_model(cfg, table, task, feature_names)
        _trainval, test = chronological_split(matrix, cfg.train_fraction)
        aucs[task] = auc(model.predict_proba(test.X), test.y)
        families[task] = model.spec.family
        if task.startswith("usage_") and not task.endswith("_no_weather"):
            device_id = int(task.split("_")[1])
            boundary_by_device[device_id] = int(test.timestamps[0])

    load_mse: dict[str, float | None] = {}
    for device_id, boundary in sorted(boundary_by_device.items()):
        col = table.device_ids.index(device_id)
        try:
            profile = agents.load_agent_profile(table, col, cfg.active_watts, boundary)
            test_cycles = agents.extract_cycles(
                table, col, cfg.active_watts, int(table.timestamps[-1]) + 1
            )
            test_cycles = [
                c
                for c, start in zip(
                    test_cycles,
                    _cycle_starts(table, col, cfg.active_watts),
                )
                if start >= boundary
            ]
            load_mse[str(device_id)] = (
                mse(profile.hourly_load, test_cycles) if test_cycles else None
            )
        except DataError:
            load_mse[str(device_id)] = None

    doc = {"auc": aucs, "family": families, "load_mse": load_mse}
    _write_json(out / "metrics.json", doc)
    return doc


def _cycle_starts(table, col, active_watts):
    active = table.device_loads[:, col] >= active_watts
    starts = []
    for i in range(len(active)):
        if active[i] and (i == 0 or not active[i - 1]):
            starts.append(int(table.timestamps[i]))
    return starts


def _load_household_state(cfg: Config, table) -> agents.HouseholdState:
    out = cfg.out_dir()
    avail_model, avail_names = load_model(out / "models" / "availability.json")
    usage_models, usage_names, shiftable_names = {}, {}, {}
    for a in cfg.shiftable():
        model, names = load_model(out / "models" / f"usage_{a.id}.json")
        col = table.device_ids.index(a.id)
        usage_models[col] = model
        usage_names[col] = names
        shiftable_names[col] = a.name
    _, threshold = label_availability(table, cfg.availability_watts)
    return agents.HouseholdState(
        table=table,
        availability_model=avail_model,
        availability_feature_names=avail_names,
        usage_models=usage_models,
        usage_feature_names=usage_names,
        availability_label_threshold=threshold,
        active_watts=cfg.active_watts,
        shiftable_names=shiftable_names,
    )


def _settings(cfg: Config) -> agents.PipelineSettings:
    return agents.PipelineSettings(
        thresholds=agents.Thresholds(cfg.usage_threshold, cfg.availability_threshold),
        explainer=cfg.explainer,
        background_size=cfg.background_size,
        seed=cfg.seed,
        strict_hours=cfg.strict_hours,
        price_only_cost=cfg.price_only_cost,
        lime_perturbations=cfg.lime_perturbations,
    )


def cmd_recommend(cfg: Config, date_text: str) -> dict:
    out = cfg.out_dir()
    table = table_from_csv(out / "hourly.csv")
    state = _load_household_state(cfg, table)
    day_start = _parse_date(date_text)
    recs, prediction = agents.run_daily_pipeline(state, day_start, _settings(cfg))

    items = []
    expl_dir = out / "explanations" / date_text
    for rec in recs:
        item = {
            "device": rec.device_id,
            "name": rec.device_name,
            "status": rec.status,
            "reason": rec.reason,
            "start_hour": rec.start_hour,
            "cost": rec.estimated_cost,
            "usage_prob": rec.usage_prob,
            "availability_prob": rec.availability_prob_at_start,
            "explanations": None,
        }
        if rec.status == "recommended":
            expl_dir.mkdir(parents=True, exist_ok=True)
            parts = {}
            for kind, part in (
                ("usage", rec.usage_explanation),
                ("availability", rec.availability_explanation),
            ):
                stem = f"device{rec.device_id}_{kind}"
                (expl_dir / f"{stem}.txt").write_text(part.text + "\n")
                (expl_dir / f"{stem}.svg").write_text(part.svg)
                parts[kind] = {
                    "text": part.text,
                    "attribution": attribution_to_dict(
                        part.attribution, part.feature_values, part.groups
                    ),
                }
            item["explanations"] = parts
        items.append(item)

    doc = {
        "date": date_text,
        "household": cfg.household_id,
        "availability_probs": [float(p) for p in prediction.availability_probs],
        "items": items,
    }
    rec_dir = out / "recommendations"
    rec_dir.mkdir(parents=True, exist_ok=True)
    _write_json(rec_dir / f"{date_text}.json", doc)
    return doc


def cmd_explain_eval(cfg: Config, methods: list[str]) -> dict:
    out = cfg.out_dir()
    table = table_from_csv(out / "hourly.csv")
    for m in methods:
        if m not in agents.EXPLAINER_METHODS:
            raise InputError(f"unknown explainer method '{m}'")

    report: dict[str, dict] = {m: {} for m in methods}
    for model_path in _saved_models(cfg):
        task = model_path.stem
        model, feature_names = load_model(model_path)
        matrix = _matrix_for_model(cfg, table, task, feature_names)
        trainval, test = chronological_split(matrix, cfg.train_fraction)

        day_keys = test.timestamps // DAY
        days = []
        for key in sorted(set(day_keys.tolist()))[: cfg.explain_eval_days]:
            sel = day_keys == key
            days.append((test.X[sel], test.y[sel]))

        background = sample_background(trainval.X, cfg.background_size, cfg.seed)
        stats = (trainval.X.mean(axis=0), trainval.X.std(axis=0))
        names = feature_names or matrix.feature_names

        for method in methods:
            if method == "tree_shap" and model.spec.family not in TREE_FAMILIES:
                report[method][task] = {"unsupported": model.spec.family}
                continue
            if method == "kernel_shap":
                def explain(mdl, x, _bg=background, _names=names):
                    return kernel_shap(mdl, x, _bg, seed=cfg.seed, feature_names=_names)

            elif method == "tree_shap":
                def explain(mdl, x, _bg=background, _names=names):
                    return tree_shap_interventional(mdl, x, _bg, feature_names=_names)

            else:
                def explain(mdl, x, _stats=stats, _names=names):
                    attr, _ = lime_explain(
                        mdl,
                        x,
                        _stats,
                        n_perturbations=cfg.lime_perturbations,
                        seed=cfg.seed,
                        feature_names=_names,
                    )
                    return attr

            result = evaluate_explainer(explain, model, days)
            report[method][task] = result.to_dict()

    _write_json(out / "explainer_report.json", report)
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loadshift",
        description="Explainable load-shifting recommendations for household appliances.",
    )
    parser.add_argument("--config", required=True, help="path to the JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--jobs", type=int, default=None, help="worker cap for grid search")
    parser.add_argument(
        "--ablate-weather",
        action="store_true",
        help="train: also fit and report on the matrix without weather features",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("prepare", help="parse inputs into the canonical hourly table")

    p_train = sub.add_parser("train", help="grid-search and fit task models")
    p_train.add_argument("--agent", required=True, choices=("availability", "usage"))
    p_train.add_argument("--family", default=None, help="fit this family's default spec instead")
    p_train.add_argument("--grid", default=None, help="'default' or a grid JSON path")

    sub.add_parser("evaluate", help="test-split AUC per model and load-profile MSE")

    p_rec = sub.add_parser("recommend", help="produce recommendations for one day")
    p_rec.add_argument("--date", required=True, help="prediction day, YYYY-MM-DD (UTC)")

    p_ee = sub.add_parser("explain-eval", help="score explainers against the models")
    p_ee.add_argument(
        "--methods",
        default="kernel_shap,lime",
        help="comma-separated subset of kernel_shap,tree_shap,lime",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, jobs=args.jobs)
        if args.command == "prepare":
            path = cmd_prepare(cfg)
            print(f"prepared hourly table: {path}")
        elif args.command == "train":
            if args.grid is not None:
                cfg.grid = args.grid
            written = cmd_train(cfg, args.agent, args.family, args.ablate_weather)
            for p in written:
                print(f"trained model: {p}")
        elif args.command == "evaluate":
            doc = cmd_evaluate(cfg)
            for task, value in sorted(doc["auc"].items()):
                print(f"auc {task}: {value:.4f}")
        elif args.command == "recommend":
            doc = cmd_recommend(cfg, args.date)
            for item in doc["items"]:
                if item["status"] == "recommended":
                    print(
                        f"{item['name']}: start {item['start_hour']:02d}:00, "
                        f"cost {item['cost']:.4f}"
                    )
                else:
                    print(f"{item['name']}: no recommendation ({item['reason']})")
        elif args.command == "explain-eval":
            methods = [m.strip() for m in args.methods.split(",") if m.strip()]
            doc = cmd_explain_eval(cfg, methods)
            for method, tasks in sorted(doc.items()):
                for task, metrics in sorted(tasks.items()):
                    if "unsupported" in metrics:
                        print(f"{method} {task}: unsupported")
                    else:
                        print(
                            f"{method} {task}: fidelity={metrics['fidelity']:.4f} "
                            f"maee={metrics['maee']:.6f}"
                        )
        return 0
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (InternalError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
