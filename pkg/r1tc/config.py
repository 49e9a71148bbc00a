"""Configuration constants and settings."""

from pathlib import Path
from typing import Any, Optional, TypedDict

import yaml


class SolverConfig(TypedDict, total=False):
    """Configuration for a completion run."""
    tol: float  # feasibility tolerance on the residual over observed entries
    rank_tol: float  # numerical rank threshold on sigma_2 / sigma_1
    nullspace_tol: float  # relative singular value cut for the minor system
    max_level: int
    seed: int
    reseeds: int  # fresh moment objectives after a minimizer that is not a completion
    sdp_tol_feas: float
    sdp_tol_gap: float
    sdp_max_iter: int
    ordering: str  # "col_major" or "row_major"
    fill: str  # "complete" or "zero_fill"
    polish: bool
    dump_dir: Optional[str]


# Default configuration
DEFAULT_CONFIG: SolverConfig = {
    "tol": 1e-6,
    "rank_tol": 1e-6,
    "nullspace_tol": 1e-8,
    "max_level": 4,
    "seed": 0,
    "reseeds": 3,
    "sdp_tol_feas": 1e-8,
    "sdp_tol_gap": 1e-8,
    "sdp_max_iter": 200,
    "ordering": "col_major",
    "fill": "complete",
    "polish": True,
    "dump_dir": None,
}

METHODS = ("auto", "iterative", "nuclear", "moment")
EXPERIMENT_MODES = ("nuclear", "nuclear_symmetric", "iterative_strong", "moment")
ORDERINGS = ("col_major", "row_major")
FILL_POLICIES = ("complete", "zero_fill")

# CLI exit codes
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 3
EXIT_NO_COMPLETION = 4

# Success threshold for the minimum-density statistic of experiment sweeps
SWEEP_SUCCESS_TARGET = 0.9


def load_config(path: Optional[Path] = None, overrides: Optional[dict[str, Any]] = None) -> SolverConfig:
    """Merge defaults, an optional YAML file and explicit overrides.

    Args:
        path: YAML file with a mapping of SolverConfig keys
        overrides: Values taking precedence over the file (None values are ignored)

    Returns:
        Complete SolverConfig
    """
    config: dict[str, Any] = dict(DEFAULT_CONFIG)

    if path is not None:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        if not isinstance(data, dict):
            raise ValueError(f"Config file {path} must contain a mapping")
        _merge(config, data, source=str(path))

    if overrides:
        _merge(config, {k: v for k, v in overrides.items() if v is not None}, source="overrides")

    if config["ordering"] not in ORDERINGS:
        raise ValueError(f"Unknown ordering: {config['ordering']}")
    if config["fill"] not in FILL_POLICIES:
        raise ValueError(f"Unknown fill policy: {config['fill']}")

    return config  # type: ignore[return-value]


def _merge(config: dict[str, Any], updates: dict[str, Any], source: str) -> None:
    unknown = set(updates) - set(DEFAULT_CONFIG)
    if unknown:
        raise ValueError(f"Unknown config keys in {source}: {', '.join(sorted(unknown))}")
    config.update(updates)
