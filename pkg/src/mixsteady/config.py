"""Process-level settings for mixsteady."""
from __future__ import annotations

from typing import Optional

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables.

    Problem definitions (grid, mixture, continuation, data) live in the YAML
    problem config, not here.
    """

    # Default problem config used when --config is omitted
    MIXSTEADY_CONFIG: str = "config/smoke.yml"

    # Outputs
    OUTPUT_DIR: str = "out"

    # Sweep parallelism (1 = sequential warm-start chain)
    JOBS: int = 1

    # General
    ENVIRONMENT: str = "development"
    LOG_LEVEL: str = "INFO"

    model_config = SettingsConfigDict(
        env_file=[".env.local", ".env"],
        case_sensitive=True,
        extra="allow",
    )

    @field_validator("JOBS")
    @classmethod
    def _jobs_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("JOBS must be >= 1")
        return v


# Lazy-loaded singleton
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get application settings (lazy loaded)."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings
