"""Test configuration and fixtures."""

import pytest

from app.config import Settings
from app.models.physics import CoulombModel, OscillatorModel
from app.operators.coulomb import CoulombOperator
from app.operators.oscillator import OscillatorOperator
from app.services.greens import GreensService
from app.services.validation import ValidationService


@pytest.fixture
def settings() -> Settings:
    """Provide default settings, isolated from any local .env file."""
    return Settings(_env_file=None)


@pytest.fixture
def coulomb_model() -> CoulombModel:
    """Hydrogen-like s-wave model with Z'=2 and bS=1 (ground state at eps=-1)."""
    return CoulombModel(D=3, l=0, Zp=2.0, bS=1.0)


@pytest.fixture
def coulomb_op(coulomb_model: CoulombModel) -> CoulombOperator:
    """Provide the Coulomb-Sturmian operator of the default model."""
    return CoulombOperator(coulomb_model)


@pytest.fixture
def oscillator_model() -> OscillatorModel:
    """Three-dimensional oscillator on a basis of frequency 1.3."""
    return OscillatorModel(D=3, l=0, omega=1.0, omegaP=1.3)


@pytest.fixture
def oscillator_op(oscillator_model: OscillatorModel) -> OscillatorOperator:
    """Provide the mismatched-frequency oscillator operator."""
    return OscillatorOperator(oscillator_model)


@pytest.fixture
def greens(settings: Settings) -> GreensService:
    """Provide a Green's matrix service."""
    return GreensService(settings)


@pytest.fixture
def validation(settings: Settings, greens: GreensService) -> ValidationService:
    """Provide a validation service sharing the Green's matrix service."""
    return ValidationService(settings, greens)
