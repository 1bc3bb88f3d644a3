"""Application configuration and settings."""

from functools import lru_cache
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical defaults loaded from environment variables or `.env`."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="JACOBIGREEN_",
        case_sensitive=False,
    )

    # Application
    app_name: str = "jacobigreen"
    app_version: str = "1.0.0"
    log_level: str = Field(default="INFO", description="Root logging level")

    # Continued fractions
    tol: float = Field(default=1e-14, description="Relative Cauchy tolerance")
    nmax: int = Field(default=100_000, description="Maximum continued-fraction depth")
    bm_depth: int = Field(default=0, description="Bauer-Muir levels applied before evaluation")
    tail: Literal["zero", "plus", "minus"] = "plus"
    table_tol: float = Field(
        default=1e-6,
        description="Tolerance used to mark convergence-table variants as converged",
    )
    floor_tol: float = Field(
        default=1e-8,
        description="Largest relative gap accepted when the approximants stall at rounding level",
    )

    # Green's matrix
    truncation: int = Field(default=20, ge=1, description="Default truncation size N")
    pivot_tol: float = Field(
        default=1e-13,
        description="Pivot threshold, relative to the row norm, for the dense LU fallback",
    )
    miller_depth: int = 400
    method_a_max_n: int = 30
    instability_guard: float = 1e-6

    # Special functions
    hyp_tol: float = 1e-15
    hyp_nmax: int = 1_000_000

    # Validation
    contour_points: int = Field(default=32, ge=4, description="Gauss points per contour arc")
    quad_panels: int = 48
    quad_order: int = 16

    # Output
    output: Literal["json", "csv", "text"] = "json"

    @field_validator(
        "tol", "table_tol", "floor_tol", "pivot_tol", "hyp_tol", "instability_guard"
    )
    @classmethod
    def positive_tolerance(cls, v: float) -> float:
        """Tolerances must be strictly positive."""
        if v <= 0:
            raise ValueError("tolerance must be positive")
        return v

    @field_validator("nmax")
    @classmethod
    def minimum_depth(cls, v: int) -> int:
        """The Cauchy test needs at least two approximants."""
        if v < 2:
            raise ValueError("nmax must be at least 2")
        return v

    @field_validator("hyp_nmax")
    @classmethod
    def positive_terms(cls, v: int) -> int:
        """The hypergeometric series needs a positive term budget."""
        if v < 1:
            raise ValueError("hyp_nmax must be positive")
        return v

    @field_validator("bm_depth")
    @classmethod
    def non_negative_depth(cls, v: int) -> int:
        """Bauer-Muir depth counts levels."""
        if v < 0:
            raise ValueError("bm_depth must be non-negative")
        return v

    @field_validator("log_level")
    @classmethod
    def upper_level(cls, v: str) -> str:
        """Normalize level names for logging.basicConfig."""
        return v.upper()


@lru_cache
def get_settings() -> Settings:
    """Get cached application settings."""
    return Settings()
