#!/usr/bin/env python3
"""
Runtime settings - environment driven defaults for the qmr tools

Values are read from the process environment after loading a `.env` file
from the project root (falling back to `config.env.example`).

Recognised variables:
- QMR_JOBS: default worker count for `qmr bench`
- QMR_MAX_ENTRIES: storage guard for n*d^2 matrix entries
- QMR_LOG_LEVEL: logging level used by the CLI
"""

import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from .errors import InvalidConfigError

project_root = Path(__file__).parent.parent.parent

DEFAULT_MAX_ENTRIES = 2_000_000_000


class Settings(BaseModel):
    """Process-wide defaults"""
    jobs: int = Field(default=1, ge=1)
    max_entries: int = Field(default=DEFAULT_MAX_ENTRIES, ge=1)
    log_level: str = "INFO"

    @field_validator("log_level")
    @classmethod
    def _upper_level(cls, value: str) -> str:
        return value.strip().upper()


def load_environment() -> None:
    """Load `.env` (or the example template) into os.environ without overriding"""
    env_file = project_root / ".env"
    if not env_file.exists():
        env_file = project_root / "config.env.example"
    if env_file.exists():
        load_dotenv(env_file, override=False)


def load_settings() -> Settings:
    """Build Settings from the environment

    Returns:
        Settings populated from QMR_* variables

    Raises:
        InvalidConfigError: if a variable cannot be parsed
    """
    load_environment()
    raw = {
        "jobs": os.getenv("QMR_JOBS", "1"),
        "max_entries": os.getenv("QMR_MAX_ENTRIES", str(DEFAULT_MAX_ENTRIES)),
        "log_level": os.getenv("QMR_LOG_LEVEL", "INFO"),
    }
    try:
        return Settings.model_validate(raw)
    except ValidationError as e:
        raise InvalidConfigError(f"Invalid QMR_* environment settings: {e}") from e
