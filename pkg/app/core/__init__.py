"""Core module for base interfaces and abstractions."""

from app.core.exceptions import (
    ConfigurationError,
    ContinuedFractionError,
    JacobiGreenError,
    NonConvergenceError,
    SpecialFunctionError,
)
from app.core.operator import JacobiOperator

__all__ = [
    "ConfigurationError",
    "ContinuedFractionError",
    "JacobiGreenError",
    "JacobiOperator",
    "NonConvergenceError",
    "SpecialFunctionError",
]
