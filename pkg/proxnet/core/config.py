"""
Library configuration using Pydantic Settings.
All settings are loaded from environment variables or .env file.
"""

from typing import Literal

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical defaults and runtime settings with type validation."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "proxnet"
    APP_VERSION: str = "0.1.0"

    # Logging
    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "WARNING"
    LOG_FORMAT: Literal["json", "text"] = "text"
    LOG_EVERY: int = 1000  # engine progress cadence (debug level)

    # Linear algebra
    SPECTRAL_NORM_TOL: float = 1e-12
    SPECTRAL_NORM_MAX_ITER: int = 10000
    SVD_FALLBACK_DIM: int = 64  # matrices up to this size use a full SVD

    # Prox oracle
    PROX_ORACLE_TOL: float = 1e-8
    PROX_BRACKET_PAD: float = 10.0

    # Certification
    CERT_SLACK: float = 1e-12
    ALPHA_GRID_STEP: float = 1e-3
    BETA_GRID_STEP: float = 1e-3
    ETA_GRID_POINTS: int = 1000
    SIGN_VERTEX_MAX_DIM: int = 16
    NORM_SAMPLES: int = 2000

    # Iteration
    DEFAULT_TOL: float = 1e-10
    DEFAULT_MAX_ITER: int = 1_000_000
    DIVERGENCE_NORM: float = 1e12

    # Variational inequality checks
    KERNEL_TOL: float = 1e-10
    MONOTONE_TOL: float = 1e-10

    # Randomness
    DEFAULT_SEED: int = 0

    @field_validator("ALPHA_GRID_STEP", "BETA_GRID_STEP")
    @classmethod
    def validate_grid_step(cls, v: float) -> float:
        """Grid steps must split the unit interval into at least two cells."""
        if not 0.0 < v <= 0.25:
            raise ValueError("grid step must lie in (0, 0.25]")
        return v

    @field_validator("ETA_GRID_POINTS")
    @classmethod
    def validate_eta_grid(cls, v: int) -> int:
        """The eta search needs both interval endpoints."""
        if v < 2:
            raise ValueError("ETA_GRID_POINTS must be at least 2")
        return v

    @field_validator(
        "SPECTRAL_NORM_TOL",
        "PROX_ORACLE_TOL",
        "DEFAULT_TOL",
        "DIVERGENCE_NORM",
        "KERNEL_TOL",
    )
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Tolerances and thresholds are strictly positive."""
        if v <= 0:
            raise ValueError("value must be positive")
        return v

    @property
    def is_json_logging(self) -> bool:
        """Check if log records are emitted as JSON."""
        return self.LOG_FORMAT == "json"


# Global settings instance
settings = Settings()
