"""Run configuration: one defaults table, an optional JSON file, and per-run overrides."""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Optional

from bmv.errors import ParameterError
from bmv.quadrature import is_power_of_two

logger = logging.getLogger(__name__)

CONFIG_ENV = "BMV_CONFIG"
TOLERANCES = (
    "tau_quad",
    "tau_closure",
    "tau_im",
    "tau_laplace",
    "tau_lemma1",
    "tau_positivity",
    "tau_poly",
    "tau_hermitian",
)


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of a run. Defaults match config/default_config.json."""

    eps_split: Optional[float] = None
    n_nodes_initial: int = 256
    n_nodes_max: int = 16384
    tau_quad: float = 1e-9
    tau_closure: float = 1e-10
    tau_im: float = 1e-8
    tau_laplace: float = 1e-6
    tau_lemma1: float = 1e-8
    tau_positivity: float = 1e-8
    tau_poly: float = 1e-10
    tau_hermitian: float = 1e-12
    points_per_interval: int = 20
    t_min: float = 0.1
    t_max: float = 10.0
    t_count: int = 25
    t_spacing: str = "log"
    seed: int = 0
    precision: str = "auto"
    workers: int = 1
    max_doublings: int = 20
    max_refinement: int = 10
    out_dir: str = "."
    coordinates: str = "reduced"

    def __post_init__(self):
        validate_config(self)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParameterError(f"unknown configuration keys: {', '.join(unknown)}")
        return cls(**data)

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Copy with the given non-None values replaced."""
        values = {k: v for k, v in overrides.items() if v is not None}
        known = {f.name for f in fields(self)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ParameterError(f"unknown configuration keys: {', '.join(unknown)}")
        return replace(self, **values)


def validate_config(config: RunConfig) -> None:
    for name in TOLERANCES:
        value = getattr(config, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
            raise ParameterError(f"{name} must be a positive number, got {value!r}")
    if config.eps_split is not None and not config.eps_split > 0:
        raise ParameterError(f"eps_split must be positive, got {config.eps_split!r}")
    if not is_power_of_two(config.n_nodes_initial) or config.n_nodes_initial < 64:
        raise ParameterError(
            f"n_nodes_initial must be a power of two >= 64, got {config.n_nodes_initial}"
        )
    if config.n_nodes_max < config.n_nodes_initial:
        raise ParameterError("n_nodes_max must not be smaller than n_nodes_initial")
    if config.points_per_interval < 2:
        raise ParameterError("points_per_interval must be >= 2")
    if not 0 < config.t_min < config.t_max or config.t_count < 1:
        raise ParameterError("t grid needs 0 < t_min < t_max and t_count >= 1")
    if config.t_spacing not in ("log", "linear"):
        raise ParameterError(f"t_spacing must be log or linear, got {config.t_spacing!r}")
    if config.precision not in ("auto", "double", "mp"):
        raise ParameterError(f"precision must be auto, double or mp, got {config.precision!r}")
    if config.coordinates not in ("reduced", "original"):
        raise ParameterError(f"coordinates must be reduced or original, got {config.coordinates!r}")
    if config.workers < 1 or config.max_doublings < 0 or config.max_refinement < 0:
        raise ParameterError("workers must be >= 1; max_doublings and max_refinement >= 0")


def default_config_path() -> str:
    return os.path.join(os.path.dirname(os.path.dirname(__file__)), "config", "default_config.json")


class ConfigurationManager:
    """Resolves the effective RunConfig: defaults < JSON file < overrides.

    The file is ``file_path`` when given, else the path in $BMV_CONFIG, else none.
    """

    def __init__(self, file_path: Optional[str] = None):
        if file_path is None:
            file_path = os.environ.get(CONFIG_ENV) or None
        self.file_path = file_path

    def _read_defaults(self) -> Dict[str, Any]:
        try:
            with open(default_config_path(), "r") as f:
                return json.load(f)
        except (FileNotFoundError, json.JSONDecodeError):
            # installed without the config directory
            return RunConfig().to_dict()

    def _read_config(self) -> Dict[str, Any]:
        if not self.file_path:
            return {}
        try:
            with open(self.file_path, "r") as f:
                data = json.load(f)
        except FileNotFoundError as exc:
            raise ParameterError(f"configuration file not found: {self.file_path}") from exc
        except json.JSONDecodeError as exc:
            raise ParameterError(
                f"{self.file_path}:{exc.lineno}:{exc.colno}: invalid configuration JSON: {exc.msg}"
            ) from exc
        if not isinstance(data, dict):
            raise ParameterError(f"{self.file_path}: configuration must be a JSON object")
        return data

    def _write_config(self, data: Dict[str, Any], path: str) -> None:
        with open(path, "w") as f:
            json.dump(data, f, indent=4)

    def load(self, **overrides: Any) -> RunConfig:
        """The effective configuration for one run."""
        data = self._read_defaults()
        data.update(self._read_config())
        config = RunConfig.from_dict(data)
        if overrides:
            config = config.with_overrides(**overrides)
        logger.debug("effective configuration: %s", config.to_dict())
        return config

    def write_config(self, config: RunConfig, path: Optional[str] = None) -> str:
        """Write ``config`` as JSON to ``path`` (default: the managed file)."""
        target = path or self.file_path
        if not target:
            raise ParameterError("no configuration file to write to")
        self._write_config(config.to_dict(), target)
        return target

    def set_value(self, name: str, value: Any) -> RunConfig:
        """Persist a single setting in the managed file and return the new configuration."""
        if not self.file_path:
            raise ParameterError(f"set {CONFIG_ENV} or pass a file to store settings")
        data = self._read_config() if os.path.exists(self.file_path) else {}
        data[name] = value
        config = RunConfig.from_dict({**self._read_defaults(), **data})
        self._write_config(data, self.file_path)
        return config
