# config.py
# Layered configuration: JSON defaults, optional override file, environment

import os
import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import load_dotenv

from hitdisk.utils.errors import ConfigurationError, ParameterError

logger = logging.getLogger("hitdisk.config")

PROJECT_ROOT = Path(__file__).resolve().parents[2]
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "config" / "hitdisk_config.json"

DEFAULTS: Dict[str, Any] = {
    "app": {"name": "hitdisk", "version": "1.0.0"},
    "series": {"max_terms": 4096, "tail_tol": 1e-14},
    "density": {"method": "annulus", "n_grid": 1024, "n_jobs": 1},
    "simulation": {
        "n_paths": 1_000_000,
        "dt_per_R2": 1e-5,
        "seed": 0,
        "boundary_mode": "interpolate",
        "max_time_per_R2": 50.0,
        "n_bins": 72,
    },
    "output": {"format": "csv"},
    "logging": {"level": "INFO", "file": None},
    "verification": {
        "n_random_starts": 20,
        "n_grid": 1024,
        "n_round_trip": 10_000,
        "mc_paths": 200_000,
        "mc_dt": 1e-4,
        "mc_bins": 72,
        "seed": 20240917,
    },
}


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _read_json(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigurationError(f"cannot read configuration {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"invalid JSON in {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigurationError(f"configuration {path} must hold a JSON object")
    return data


class Config:
    """Configuration values with dotted-key access, e.g. config.get('series.max_terms')"""

    def __init__(self, path: Optional[Union[str, Path]] = None, load_env: bool = True):
        if load_env:
            load_dotenv()
        self.data = copy.deepcopy(DEFAULTS)
        if DEFAULT_CONFIG_PATH.exists():
            self.data = _deep_merge(self.data, _read_json(DEFAULT_CONFIG_PATH))

        override = path or os.getenv("HITDISK_CONFIG")
        self.path = Path(override) if override else None
        if self.path is not None:
            self.data = _deep_merge(self.data, _read_json(self.path))
            logger.debug("configuration loaded from %s", self.path)

        env_level = os.getenv("HITDISK_LOG_LEVEL")
        if env_level:
            self.data["logging"]["level"] = env_level
        env_file = os.getenv("HITDISK_LOG_FILE")
        if env_file:
            self.data["logging"]["file"] = env_file

    def get(self, key: str, default: Any = None) -> Any:
        node: Any = self.data
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def _typed(self, key: str, kind: type) -> Any:
        value = self.get(key)
        try:
            return kind(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"configuration value {key}={value!r} is not a valid {kind.__name__}")

    def series_control(self):
        from hitdisk.modules.kernels.series import SeriesControl

        try:
            return SeriesControl(max_terms=self._typed("series.max_terms", int),
                                 tail_tol=self._typed("series.tail_tol", float))
        except ParameterError as e:
            raise ConfigurationError(f"series section: {e}")

    def sim_config(self, R: float = 1.0):
        """SimConfig with the step and time cap scaled by R^2"""
        from hitdisk.modules.montecarlo.simulator import SimConfig

        try:
            return SimConfig(
                n_paths=self._typed("simulation.n_paths", int),
                dt=self._typed("simulation.dt_per_R2", float) * R * R,
                seed=self._typed("simulation.seed", int),
                boundary_mode=self.get("simulation.boundary_mode", "interpolate"),
                max_time=self._typed("simulation.max_time_per_R2", float) * R * R,
            )
        except ParameterError as e:
            raise ConfigurationError(f"simulation section: {e}")

    def thread_cap(self) -> Optional[int]:
        return thread_cap()


def thread_cap() -> Optional[int]:
    """HITDISK_THREADS as a positive int, None when unset or unusable"""
    raw = os.getenv("HITDISK_THREADS")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        logger.warning("ignoring HITDISK_THREADS=%r (not an integer)", raw)
        return None
    if value < 1:
        logger.warning("ignoring HITDISK_THREADS=%r (must be positive)", raw)
        return None
    return value
