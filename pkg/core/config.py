import json
from pathlib import Path
from typing import Any, Dict, Union

from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from core.exceptions import ConfigValidationError, to_navigation_error
from core.models import ScenarioConfig, SweepConfig


# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    """Ambient settings: logging, output location and default seeds. Never experiment semantics."""

    model_config = SettingsConfigDict(env_prefix="NAV_", env_file=".env", case_sensitive=False, extra="ignore")

    # Logging
    log_level: str = Field(default="INFO")
    log_dir: str = Field(default="logs")

    # Experiments
    results_dir: str = Field(default="results")
    master_seed: int = Field(default=0, ge=0)
    jobs: int = Field(default=1, ge=1)
    bootstrap_resamples: int = Field(default=10000, ge=1)
    bootstrap_seed: int = Field(default=0)

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        allowed = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed:
            raise ValueError(f"Log level must be one of {allowed}")
        return v.upper()

# Global settings instance
settings = Settings()


def _read_json(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        raise to_navigation_error(e) from e
    if not isinstance(data, dict):
        raise ConfigValidationError(f"{path}: expected a JSON object", {"path": str(path)})
    return data


def load_scenario_file(path: Union[str, Path]) -> ScenarioConfig:
    """Load one ScenarioConfig; unknown keys are rejected."""
    data = _read_json(path)
    try:
        return ScenarioConfig.model_validate(data)
    except ValueError as e:
        error = to_navigation_error(e)
        error.details["path"] = str(path)
        raise error from e


def load_sweep_file(path: Union[str, Path]) -> SweepConfig:
    """
    Load a sweep protocol. Omitted fields fall back to the model defaults and
    the ambient settings for seeds and parallelism.
    """
    data = _read_json(path)
    data.setdefault("master_seed", settings.master_seed)
    data.setdefault("jobs", settings.jobs)
    data.setdefault("bootstrap_resamples", settings.bootstrap_resamples)
    data.setdefault("bootstrap_seed", settings.bootstrap_seed)
    try:
        return SweepConfig.model_validate(data)
    except ValueError as e:
        error = to_navigation_error(e)
        error.details["path"] = str(path)
        raise error from e
