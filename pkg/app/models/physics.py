"""Physical model parameters and energy points."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.constants import ModelKind


class EnergyPoint(BaseModel):
    """Complex energy with its physical-sheet wave number.

    For the Coulomb problem ``eps`` is the scaled energy 2mE/hbar^2; for the
    oscillator it is E itself with hbar = m = 1.
    """

    model_config = ConfigDict(frozen=True)

    eps: complex

    @field_validator("eps")
    @classmethod
    def finite_energy(cls, v: complex) -> complex:
        """Reject NaN and infinite components."""
        if not (np.isfinite(v.real) and np.isfinite(v.imag)):
            raise ValueError("energy must be finite")
        return complex(v)

    @classmethod
    def of(cls, re: float, im: float = 0.0) -> "EnergyPoint":
        """Create an energy point from its real and imaginary parts."""
        return cls(eps=complex(re, im))

    @property
    def k(self) -> complex:
        """Wave number with k^2 = eps on the branch Im k >= 0."""
        root = complex(np.sqrt(np.complex128(self.eps)))
        if root.imag < 0:
            root = -root
        return root

    def shifted(self, delta: complex) -> "EnergyPoint":
        """Energy point displaced by ``delta``."""
        return EnergyPoint(eps=self.eps + delta)


class CoulombModel(BaseModel):
    """D-dimensional Coulomb problem on a Coulomb-Sturmian basis (scaled units)."""

    model_config = ConfigDict(frozen=True)

    kind: ModelKind = ModelKind.COULOMB
    D: int = Field(default=3, ge=2, description="Spatial dimension")
    l: int = Field(default=0, ge=0, description="Partial wave")  # noqa: E741
    Zp: float = Field(default=2.0, description="Scaled charge Z' = 2mZ/hbar^2")
    bS: float = Field(default=1.0, gt=0, description="Sturmian scale parameter")

    @property
    def lp(self) -> float:
        """Effective angular momentum l' = l + (D-3)/2."""
        return self.l + (self.D - 3) / 2

    @model_validator(mode="after")
    def positive_square_roots(self) -> "CoulombModel":
        if 2 * self.lp + 2 <= 0:
            raise ValueError("2l'+2 must be positive")
        return self


class OscillatorModel(BaseModel):
    """D-dimensional oscillator of frequency omega on a basis of frequency omegaP."""

    model_config = ConfigDict(frozen=True)

    kind: ModelKind = ModelKind.OSCILLATOR
    D: int = Field(default=3, ge=1)
    l: int = Field(default=0, ge=0)  # noqa: E741
    omega: float = Field(default=1.0, gt=0)
    omegaP: float = Field(default=1.3, gt=0)

    @property
    def nu(self) -> float:
        """Index l + D/2 of the radial oscillator functions."""
        return self.l + self.D / 2

    @property
    def is_diagonal(self) -> bool:
        """Matched frequencies make the basis the eigenbasis."""
        return self.omega == self.omegaP


def scaled_energy(E: complex, mass: float = 1.0, hbar: float = 1.0) -> complex:
    """Scaled energy eps = 2mE/hbar^2."""
    return 2 * mass * E / hbar**2


def physical_energy(eps: complex, mass: float = 1.0, hbar: float = 1.0) -> complex:
    """Inverse of :func:`scaled_energy`."""
    return eps * hbar**2 / (2 * mass)


def scaled_charge(Z: float, mass: float = 1.0, hbar: float = 1.0) -> float:
    """Scaled Coulomb strength Z' = 2mZ/hbar^2."""
    return 2 * mass * Z / hbar**2
