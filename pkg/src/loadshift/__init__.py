"""Explainable load-shifting recommendations for household appliances."""

__version__ = "0.1.0"

from . import agents, charts, explain, explainers, features, ingest, learners
from .errors import DataError, InputError, InternalError, LoadshiftError, StageError

__all__ = [
    "DataError",
    "InputError",
    "InternalError",
    "LoadshiftError",
    "StageError",
    "agents",
    "charts",
    "explain",
    "explainers",
    "features",
    "ingest",
    "learners",
]
