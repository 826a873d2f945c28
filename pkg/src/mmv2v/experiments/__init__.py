"""Configuration, parameter sweeps, CSV/SVG output and the command line."""

from mmv2v.experiments.config import ConfigError, load_config, parse_config
from mmv2v.experiments.output import emit, read_csv
from mmv2v.experiments.sweep import SweepError, SweepResult, SweepRow, SweepSpec, run_sweep

__all__ = [
    "ConfigError",
    "SweepError",
    "SweepResult",
    "SweepRow",
    "SweepSpec",
    "emit",
    "load_config",
    "parse_config",
    "read_csv",
    "run_sweep",
]
