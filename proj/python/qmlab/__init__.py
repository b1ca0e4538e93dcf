"""Python access to the qmlab experiment registry and a few core routines."""

import json

from ._core import (
    Error,
    __version__,
    config_hash,
    grover_iterations,
    grover_success,
    list_experiments,
    qft_gate_count,
    qft_unitary,
    relative_entropy,
    shannon_entropy,
)
from . import _core

__all__ = [
    "Error",
    "__version__",
    "config_hash",
    "grover_iterations",
    "grover_success",
    "list_experiments",
    "qft_gate_count",
    "qft_unitary",
    "relative_entropy",
    "render",
    "run",
    "shannon_entropy",
    "validate",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def validate(config, seed=None):
    """Diagnostics for a config given as a dict or JSON text."""
    return _core.validate_config(_text(config), seed)


def run(config, seed=None, threads=0):
    """Runs an experiment; returns a dict with columns, rows and metadata."""
    return _core.run_experiment(_text(config), seed, threads)


def render(config, seed=None, format=None):
    """CSV or JSON text, identical to `qmlab run` output for the same config."""
    return _core.render_experiment(_text(config), seed, format)
