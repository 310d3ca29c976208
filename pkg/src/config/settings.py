"""
Process configuration using Pydantic Settings.

Reads SWITCHDIFF_* environment variables and the .env file.
Run-specific parameters live in the JSON run config (src.config.schema).
"""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="SWITCHDIFF_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # caps Monte Carlo and epsilon-schedule parallelism
    threads: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    out_dir: str = "out"

    # spectral defaults
    truncation: int = Field(default=12, ge=1)
    quadrature_nodes: int = Field(default=64, ge=2)

    # boundary-value defaults
    grid: int = Field(default=400, ge=16)


@lru_cache
def get_settings() -> Settings:
    return Settings()
