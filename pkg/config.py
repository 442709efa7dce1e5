"""Numeric policy settings for Seminorm Lab.

Defaults live on :class:`Settings`. An optional dotenv-format file may
override them (``REL_TOLERANCE=1e-10``); keys are the upper-cased field
names. The process environment is never read.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from errors import InputError
from log_utils import LogCategory, LogLevel, log_debug, log_warning


class Settings(BaseModel):
    """Tolerances and search budgets used by models and falsify."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    rel_tolerance: float = Field(1e-9, ge=0.0)
    abs_tolerance: float = Field(1e-12, ge=0.0)
    bump_grid_divisor: int = Field(512, ge=16)
    bump_convergence_tolerance: float = Field(0.02, gt=0.0)
    hill_climb_steps: int = Field(200, ge=0)
    hill_climb_restarts: int = Field(8, ge=0)
    batch_size: int = Field(4096, ge=1)
    log_level: LogLevel = LogLevel.WARNING

    def within_bound(self, lhs: float, rhs: float) -> bool:
        """Tolerance-adjusted check ``lhs <= rhs*(1+rel) + abs``."""
        return lhs <= rhs * (1.0 + self.rel_tolerance) + self.abs_tolerance


DEFAULT_SETTINGS = Settings()


def load_settings(path: Optional[Union[str, Path]] = None) -> Settings:
    """Build settings from defaults plus an optional dotenv-format file."""
    if path is None:
        return DEFAULT_SETTINGS

    settings_path = Path(path)
    if not settings_path.is_file():
        raise InputError(f"Settings file not found: {settings_path}")

    raw = dotenv_values(settings_path)
    overrides = {}
    for key, value in raw.items():
        if value is None:
            log_warning(f"Ignoring settings key without value: {key}", LogCategory.CONFIG)
            continue
        overrides[key.lower()] = value

    try:
        settings = Settings(**overrides)
    except ValidationError as exc:
        raise InputError(f"Invalid settings in {settings_path}: {exc}") from exc

    log_debug(f"Loaded settings from {settings_path}: {sorted(overrides)}", LogCategory.CONFIG)
    return settings
