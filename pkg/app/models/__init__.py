"""Domain models package."""

from app.models.physics import (
    CoulombModel,
    EnergyPoint,
    OscillatorModel,
    physical_energy,
    scaled_charge,
    scaled_energy,
)
from app.models.results import (
    CheckResult,
    ContourSpec,
    ConvergenceRow,
    ConvergenceTable,
    EvaluationReport,
    GreensMatrix,
    QuadratureRule,
    ResidueReport,
)
from app.models.run import RunConfig

__all__ = [
    "CheckResult",
    "ContourSpec",
    "ConvergenceRow",
    "ConvergenceTable",
    "CoulombModel",
    "EnergyPoint",
    "EvaluationReport",
    "GreensMatrix",
    "OscillatorModel",
    "QuadratureRule",
    "ResidueReport",
    "RunConfig",
    "physical_energy",
    "scaled_charge",
    "scaled_energy",
]
