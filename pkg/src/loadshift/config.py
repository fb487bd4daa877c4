"""One JSON config file drives every command; CLI flags override it.

Schema (defaults shown):

    {
      "household_id": "house_1",
      "paths": {"refit": ..., "weather": ..., "prices": ..., "workdir": "out"},
      "appliances": [
        {"id": 1, "column": "Appliance1", "name": "appliance 1", "shiftable": false},
        ...
      ],
      "thresholds": {"usage": 0.5, "availability": 0.5},
      "labels": {"availability_watts": null, "active_watts": 20.0},
      "grid": "default",
      "seed": 0,
      "jobs": 1,
      "background_size": 100,
      "explainer": "kernel_shap",
      "daily_run_hour": 6,
      "impute_k": 5,
      "train_fraction": 0.8,
      "explain_eval_days": 5,
      "lime_perturbations": 5000,
      "strict_hours": false,
      "price_only_cost": false
    }

``availability_watts: null`` selects the per-household quantile policy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InputError
from .ingest import ColumnMap


@dataclass
class ApplianceConfig:
    id: int
    column: str
    name: str
    shiftable: bool = False


@dataclass
class Config:
    household_id: str
    refit_path: Path
    weather_path: Path
    prices_path: Path
    workdir: Path
    appliances: list[ApplianceConfig]
    usage_threshold: float = 0.5
    availability_threshold: float = 0.5
    availability_watts: float | None = None
    active_watts: float = 20.0
    grid: str = "default"
    seed: int = 0
    jobs: int = 1
    background_size: int = 100
    explainer: str = "kernel_shap"
    daily_run_hour: int = 6
    impute_k: int = 5
    train_fraction: float = 0.8
    explain_eval_days: int = 5
    lime_perturbations: int = 5000
    strict_hours: bool = False
    price_only_cost: bool = False

    def column_map(self) -> ColumnMap:
        return ColumnMap(appliances=[(a.id, a.column, a.name) for a in self.appliances])

    def shiftable(self) -> list[ApplianceConfig]:
        return [a for a in self.appliances if a.shiftable]

    def out_dir(self) -> Path:
        return self.workdir / self.household_id


def load_config(path, seed: int | None = None, jobs: int | None = None) -> Config:
    path = Path(path)
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: {path}: {exc}") from exc

    try:
        paths = raw["paths"]
        appliances = [
            ApplianceConfig(
                id=int(a["id"]),
                column=a["column"],
                name=a["name"],
                shiftable=bool(a.get("shiftable", False)),
            )
            for a in raw.get(
                "appliances",
                [
                    {"id": i, "column": f"Appliance{i}", "name": f"appliance {i}"}
                    for i in range(1, 10)
                ],
            )
        ]
        thresholds = raw.get("thresholds", {})
        labels = raw.get("labels", {})
        cfg = Config(
            household_id=raw["household_id"],
            refit_path=Path(paths["refit"]),
            weather_path=Path(paths["weather"]),
            prices_path=Path(paths["prices"]),
            workdir=Path(paths.get("workdir", "out")),
            appliances=appliances,
            usage_threshold=float(thresholds.get("usage", 0.5)),
            availability_threshold=float(thresholds.get("availability", 0.5)),
            availability_watts=(
                None
                if labels.get("availability_watts") is None
                else float(labels["availability_watts"])
            ),
            active_watts=float(labels.get("active_watts", 20.0)),
            grid=raw.get("grid", "default"),
            seed=int(raw.get("seed", 0)),
            jobs=int(raw.get("jobs", 1)),
            background_size=int(raw.get("background_size", 100)),
            explainer=raw.get("explainer", "kernel_shap"),
            daily_run_hour=int(raw.get("daily_run_hour", 6)),
            impute_k=int(raw.get("impute_k", 5)),
            train_fraction=float(raw.get("train_fraction", 0.8)),
            explain_eval_days=int(raw.get("explain_eval_days", 5)),
            lime_perturbations=int(raw.get("lime_perturbations", 5000)),
            strict_hours=bool(raw.get("strict_hours", False)),
            price_only_cost=bool(raw.get("price_only_cost", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"config is missing or mistypes a field: {exc!r}") from exc

    if seed is not None:
        cfg.seed = seed
    if jobs is not None:
        cfg.jobs = jobs

    for p in (cfg.refit_path, cfg.weather_path, cfg.prices_path):
        if not p.exists():
            raise InputError(f"configured input file does not exist: {p}")
    if cfg.grid != "default" and not Path(cfg.grid).exists():
        raise InputError(f"grid file does not exist: {cfg.grid}")
    if not 0 <= cfg.daily_run_hour <= 23:
        raise InputError("daily_run_hour must be in 0..23")
    return cfg
