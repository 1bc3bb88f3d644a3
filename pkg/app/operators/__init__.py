"""Jacobi-matrix operators of the supported Hamiltonians."""

from app.core.operator import JacobiOperator
from app.models.physics import CoulombModel, OscillatorModel
from app.operators.coulomb import (
    CoulombOperator,
    coulomb_bound_wavefunction,
    coulomb_jacobi,
    coulomb_spectrum,
    cs_function,
    cs_overlap,
)
from app.operators.oscillator import (
    OscillatorOperator,
    oscillator_basis_function,
    oscillator_jacobi,
    oscillator_spectrum,
    oscillator_wavefunction,
)


def build_operator(
    model: CoulombModel | OscillatorModel, printed_sign: bool = False
) -> JacobiOperator:
    """Operator for a model; ``printed_sign`` applies to the Coulomb model only."""
    if isinstance(model, CoulombModel):
        return CoulombOperator(model, printed_sign=printed_sign)
    return OscillatorOperator(model)


__all__ = [
    "CoulombOperator",
    "OscillatorOperator",
    "build_operator",
    "coulomb_bound_wavefunction",
    "coulomb_jacobi",
    "coulomb_spectrum",
    "cs_function",
    "cs_overlap",
    "oscillator_basis_function",
    "oscillator_jacobi",
    "oscillator_spectrum",
    "oscillator_wavefunction",
]
