"""Carnot group kernels and the experiment runner."""

import json

from ._core import (
    CarnotError,
    ConfigError,
    DimensionMismatch,
    Diverged,
    EvaluationError,
    Group,
    SyntaxError,
    UnknownName,
    canonical,
    evaluate,
    group_names,
)
from . import _core

__all__ = [
    "CarnotError",
    "ConfigError",
    "DimensionMismatch",
    "Diverged",
    "EvaluationError",
    "Group",
    "SyntaxError",
    "UnknownName",
    "canonical",
    "describe",
    "evaluate",
    "group_names",
    "run",
]


def describe(config):
    """Resolved configuration as a dict."""
    return json.loads(_core.describe(str(config)))


def run(config, out="", seed=None):
    """Run an experiment config; returns the report dict and writes artifacts when out is set."""
    return json.loads(_core.run(str(config), str(out), seed))
