"""Problem-gambling detection with the PGN4 1-D CNN and five baselines."""

import json

from ._core import (
    ContainerError,
    Model,
    correlation_report,
    evaluate,
    flatten_width,
    generate,
    gradient_check,
    load_csv,
    load_model,
    pearson,
    select_features,
)
from . import _core

METHODS = ("pgn4", "svm", "dt", "rf", "ada", "nn")


def train_model(method, features, labels, seed=0, **config):
    """Fit one method; keyword arguments override experiment config fields (e.g. epochs=5)."""
    return _core.train_model(method, features, labels, seed, json.dumps(config) if config else "")


def run_sweep(out_dir=None, **config):
    """Run the feature-count x method grid and return the grid as a dict."""
    return json.loads(_core.run_sweep(json.dumps(config), None if out_dir is None else str(out_dir)))


__all__ = [
    "METHODS",
    "ContainerError",
    "Model",
    "correlation_report",
    "evaluate",
    "flatten_width",
    "generate",
    "gradient_check",
    "load_csv",
    "load_model",
    "pearson",
    "run_sweep",
    "select_features",
    "train_model",
]
