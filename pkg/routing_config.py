"""
Routing Config - 設定與環境

Settings come from, in increasing precedence: built-in defaults, a key-value
config file, HYPERROUTE_* environment variables, and CLI flags.
"""

import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from routing_errors import ConfigError

logger = logging.getLogger("RoutingConfig")

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
OUTPUT_FORMATS = ("csv", "json", "markdown")

ENV_PREFIX = "HYPERROUTE_"
ENV_FIELDS = {
    "HYPERROUTE_OUTPUT_DIR": "output_dir",
    "HYPERROUTE_OUTPUT_FORMAT": "output_format",
    "HYPERROUTE_SEED": "seed",
    "HYPERROUTE_TRIALS": "trials",
    "HYPERROUTE_WORKERS": "workers",
    "HYPERROUTE_LOG_LEVEL": "log_level",
}


def detect_workers() -> int:
    """Physical core count, falling back to the logical count."""
    try:
        import psutil
        cores = psutil.cpu_count(logical=False)
        if cores:
            return int(cores)
    except ImportError:
        pass
    return os.cpu_count() or 1


class RoutingSettings(BaseModel):
    """Tunable defaults shared by the library, the CLI and the MCP tools."""

    output_dir: str = "results"
    output_format: str = "csv"
    seed: int = Field(default=20240601, ge=0)
    trials: Optional[int] = Field(default=None, ge=1)
    workers: int = Field(default_factory=detect_workers, ge=1)
    max_dense_vertices: int = Field(default=10_000, ge=1)
    retry_budget: int = Field(default=1000, ge=1)
    eigen_tolerance: float = Field(default=1e-9, gt=0)
    ramanujan_slack: float = Field(default=1e-9, ge=0)
    affine_samples: int = Field(default=200, ge=1)
    mw_eta: float = Field(default=0.5, gt=0)
    log_level: str = "INFO"

    @field_validator("output_format")
    @classmethod
    def _known_format(cls, value: str) -> str:
        value = value.lower()
        if value == "md":
            value = "markdown"
        if value not in OUTPUT_FORMATS:
            raise ValueError(f"output_format must be one of {OUTPUT_FORMATS}")
        return value

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {value}")
        return value


def config_search_paths(explicit: Optional[str] = None) -> List[Path]:
    paths = []
    if explicit:
        paths.append(Path(explicit))
    env_path = os.getenv("HYPERROUTE_CONFIG")
    if env_path:
        paths.append(Path(env_path))
    paths.append(Path.home() / ".hyperroute" / "config.txt")
    paths.append(Path.cwd() / "hyperroute.txt")
    return paths


def parse_config_text(text: str, source: str = "<string>") -> Dict[str, str]:
    """
    Parse `key = value` lines. Keys mirror CLI flags, so dashes and
    underscores are interchangeable.
    """
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        values[key.lstrip("-").replace("-", "_").lower()] = value
    return values


def parse_config_file(path: Path) -> Dict[str, str]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_config_text(f.read(), source=str(path))


def _known_fields(values: Dict[str, Any], source: str) -> Dict[str, Any]:
    known = {}
    for key, value in values.items():
        if key in RoutingSettings.model_fields:
            known[key] = value
        else:
            logger.warning(f"Ignoring unknown setting '{key}' from {source}")
    return known


def load_settings(
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RoutingSettings:
    """
    Assemble settings from file, environment and explicit overrides.

    Args:
        config_path: explicit config file; a missing explicit file is an error
        overrides: values from CLI flags (None entries are skipped)

    Returns:
        validated RoutingSettings
    """
    merged: Dict[str, Any] = {}

    if config_path and not Path(config_path).exists():
        raise ConfigError(f"Config file not found: {config_path}")
    for path in config_search_paths(config_path):
        if path.exists():
            merged.update(_known_fields(parse_config_file(path), str(path)))
            logger.debug(f"Loaded settings from {path}")
            break

    for env_name, field in ENV_FIELDS.items():
        value = os.getenv(env_name)
        if value is not None and value != "":
            merged[field] = value

    if overrides:
        merged.update(
            _known_fields({k: v for k, v in overrides.items() if v is not None}, "overrides")
        )

    try:
        return RoutingSettings(**merged)
    except ValueError as exc:
        raise ConfigError(f"Invalid settings: {exc}") from exc


def configure_logging(level: str = "INFO") -> None:
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT)


def environment_report() -> Dict[str, Any]:
    """Host facts recorded next to experiment output."""
    report: Dict[str, Any] = {
        "python": sys.version.split()[0],
        "platform": sys.platform,
        "workers": detect_workers(),
    }
    try:
        import psutil
        report["memory_gb"] = round(psutil.virtual_memory().total / 2**30, 1)
    except ImportError:
        report["memory_gb"] = None
    for package in ("numpy", "scipy", "pydantic"):
        try:
            module = __import__(package)
            report[package] = getattr(module, "__version__", "unknown")
        except ImportError:
            report[package] = None
    return report


# 單例模式
_settings: Optional[RoutingSettings] = None


def get_settings() -> RoutingSettings:
    """Process-wide settings, loaded on first use."""
    global _settings
    if _settings is None:
        _settings = load_settings()
    return _settings


def set_settings(settings: RoutingSettings) -> None:
    global _settings
    _settings = settings


def reset_settings() -> None:
    global _settings
    _settings = None
