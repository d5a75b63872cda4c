"""Python front end for the maelstrom C++ core.

Configs are passed as dicts (or JSON text) with the same schema as the CLI.
"""

import json

from ._maelstrom import ConfigError, DivergedError, spectral_norm, spectral_radius
from . import _maelstrom

__all__ = [
    "ConfigError",
    "DivergedError",
    "cli",
    "generate",
    "memory_capacity",
    "run",
    "spectral_norm",
    "spectral_radius",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def run(config, seed, mode=None):
    """Trains and evaluates one seed; returns the summary record as a dict."""
    return json.loads(_maelstrom.run_summary(_text(config), seed, mode or ""))


def memory_capacity(config, seed):
    """Returns (total, per-delay r2 list) for the configured bare core."""
    return _maelstrom.memory_capacity(_text(config), seed)


def generate(config, seed):
    """Returns the task stream as a list of record dicts."""
    return _maelstrom.generate(_text(config), seed)


def cli(*args):
    """Runs the command-line interface in-process; returns (exit_code, stdout, stderr)."""
    return _maelstrom.cli([str(a) for a in args])
