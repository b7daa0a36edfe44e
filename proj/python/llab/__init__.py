"""Python access to the llab Liouvillian laboratory."""

import json as _json
from pathlib import Path as _Path

from . import _llab
from ._llab import AccuracyError, ValidationError, loglog_slope, planck_weight

__all__ = [
    "AccuracyError",
    "Model",
    "ValidationError",
    "config_hash",
    "load_config",
    "loglog_slope",
    "planck_weight",
    "run",
    "validate_config",
]


def _text(config):
    if isinstance(config, (str, _Path)) and _Path(config).exists():
        return _Path(config).read_text()
    if isinstance(config, dict):
        return _json.dumps(config)
    return str(config)


def load_config(path):
    return _json.loads(_Path(path).read_text())


def config_hash(config):
    return _llab.config_hash(_text(config))


def validate_config(config):
    _llab.validate_config(_text(config))


class Model(_llab.Model):
    """Finite model built from a config dict, JSON text or file path."""

    def __init__(self, config, beta=None):
        super().__init__(_text(config), beta)


def run(subcommand, config, out_dir, seed=0, threads=1):
    """Run a CLI subcommand in-process; returns (exit_code, report dict)."""
    code, report = _llab.run(subcommand, _text(config), str(out_dir), seed, threads)
    return code, _json.loads(report)
