"""
Process-level configuration for the contact process toolkit.

Holds defaults shared by every run (truncation horizon, replica counts,
worker count, limits). Per-run parameters live in run_config.
"""

import logging
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


class SimulationConfig(BaseSettings):
    """
    Global simulation settings.

    Loads from environment variables and .env file.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore"
    )

    # === Execution ===

    WORKERS: int = Field(
        default=1,
        description="Worker processes for replica-parallel runs (1 = serial)"
    )

    LOG_LEVEL: str = Field(
        default="INFO",
        description="Log level: DEBUG, INFO, WARNING, ERROR"
    )

    OUTPUT_DIR: str = Field(
        default="results",
        description="Default directory for CSV, JSON and manifest outputs"
    )

    # === Monte Carlo Defaults ===

    T_MAX: float = Field(
        default=50.0,
        description="Truncation horizon standing in for 'for all t'"
    )

    REPLICAS: int = Field(
        default=10000,
        description="Default replica count per estimate"
    )

    CRITICAL_THRESHOLD: float = Field(
        default=0.02,
        description="Survival proxy level used by critical-value bisection"
    )

    TRUNCATION_ALLOWANCE: float = Field(
        default=0.02,
        description="Additive allowance for finite-volume truncation in mixture checks"
    )

    DECAY_EPSILON: float = Field(
        default=0.02,
        description="Terminal level below which a decaying probability passes"
    )

    # === Limits ===

    ORACLE_MAX_SITES: int = Field(
        default=8,
        description="Largest graph the exact oracle accepts (3^N states)"
    )

    MAX_ANCESTOR_ENTRIES: int = Field(
        default=200000,
        description="Ancestor list size at which the dual gives up"
    )

    UNIFORMIZATION_TOL: float = Field(
        default=1e-12,
        description="Poisson tail mass dropped by uniformization"
    )

    @field_validator("WORKERS", "REPLICAS", "MAX_ANCESTOR_ENTRIES")
    @classmethod
    def validate_positive(cls, v: int, info) -> int:
        """Counts must be positive."""
        if v < 1:
            raise ValueError(f"{info.field_name} must be >= 1, got {v}")
        return v

    @field_validator("T_MAX")
    @classmethod
    def validate_horizon(cls, v: float) -> float:
        """Horizon must be positive."""
        if v <= 0:
            raise ValueError(f"T_MAX must be positive, got {v}")
        return v

    @field_validator("CRITICAL_THRESHOLD", "TRUNCATION_ALLOWANCE", "DECAY_EPSILON")
    @classmethod
    def validate_probability(cls, v: float, info) -> float:
        """Probability levels live strictly inside (0, 1)."""
        if not 0.0 < v < 1.0:
            raise ValueError(f"{info.field_name} must be in (0, 1), got {v}")
        return v

    @field_validator("ORACLE_MAX_SITES")
    @classmethod
    def validate_oracle_limit(cls, v: int) -> int:
        """3^10 states is already ~59k; beyond that uniformization is not desk scale."""
        if not 1 <= v <= 10:
            raise ValueError(f"ORACLE_MAX_SITES must be between 1 and 10, got {v}")
        return v

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level"""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v = v.upper()
        if v not in valid_levels:
            raise ValueError(f"LOG_LEVEL must be one of {valid_levels}")
        return v

    def workers_from_env(self) -> Optional[int]:
        """Worker count if it was set explicitly (env or .env), else None."""
        if "WORKERS" in self.model_fields_set:
            return self.WORKERS
        return None

    def to_dict(self) -> dict:
        """Convert config to dictionary."""
        return self.model_dump()


def load_config() -> SimulationConfig:
    """
    Load simulation configuration from environment.

    Returns:
        SimulationConfig instance
    """
    config = SimulationConfig()
    logger.debug(f"Loaded config: workers={config.WORKERS}, T_MAX={config.T_MAX}")
    return config


# Singleton instance (lazy loaded)
_config: Optional[SimulationConfig] = None


def get_config() -> SimulationConfig:
    """
    Get singleton config instance.

    Returns:
        SimulationConfig instance
    """
    global _config
    if _config is None:
        _config = load_config()
    return _config


def reset_config() -> None:
    """Reset singleton config (for testing)."""
    global _config
    _config = None
