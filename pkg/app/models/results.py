"""Result, contour and table models produced by the numerical services."""

from collections.abc import Callable
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.constants import Method
from app.models.physics import EnergyPoint


class QuadratureRule(BaseModel):
    """Gauss rule on (-1, 1)."""

    model_config = ConfigDict(frozen=True)

    nodes: list[float]
    weights: list[float]
    order: int = Field(ge=1)

    @model_validator(mode="after")
    def consistent_lengths(self) -> "QuadratureRule":
        if len(self.nodes) != self.order or len(self.weights) != self.order:
            raise ValueError("nodes and weights must both have `order` entries")
        return self

    def arrays(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Nodes and weights as numpy arrays."""
        return np.asarray(self.nodes), np.asarray(self.weights)

    def integrate(
        self, f: Callable[[NDArray[np.float64]], NDArray[Any]], lo: float, hi: float
    ) -> Any:
        """Integrate a vectorized function over [lo, hi]."""
        x, w = self.arrays()
        half = 0.5 * (hi - lo)
        return half * np.sum(w * f(lo + half * (x + 1.0)))

    def composite(
        self,
        f: Callable[[NDArray[np.float64]], NDArray[Any]],
        lo: float,
        hi: float,
        panels: int,
    ) -> Any:
        """Integrate over [lo, hi] split into equal panels."""
        x, w = self.arrays()
        edges = np.linspace(lo, hi, panels + 1)
        half = 0.5 * np.diff(edges)
        points = edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)
        return np.sum(half[:, None] * w[None, :] * f(points))


class EvaluationReport(BaseModel):
    """Outcome of a continued-fraction evaluation."""

    value: complex
    n_used: int = Field(ge=0)
    converged: bool
    history: list[tuple[int, complex]] = Field(default_factory=list)
    # Cauchy gap actually met; larger than the requested tol after a stall
    tolerance: float | None = None
    bm_depth: int = Field(default=0, ge=0)


class GreensMatrix(BaseModel):
    """Truncated Green's matrix G^(N) with the tail closure used to build it."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    ratio: complex
    energy: EnergyPoint
    method: Method
    diagnostics: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def square_matrix(self) -> "GreensMatrix":
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError("values must be a square matrix")
        self.values.setflags(write=False)
        return self

    @property
    def N(self) -> int:
        """Truncation size."""
        return int(self.values.shape[0])

    @property
    def g00(self) -> complex:
        """The (0, 0) element."""
        return complex(self.values[0, 0])

    def symmetry_error(self) -> float:
        """
        max |G - G^T| relative to max |G|.

        Builders symmetrize their result, so the asymmetry they measured
        before doing so is stored as ``diagnostics["asymmetry"]`` and wins.
        """
        if "asymmetry" in self.diagnostics:
            return float(self.diagnostics["asymmetry"])
        scale = float(np.max(np.abs(self.values))) or 1.0
        return float(np.max(np.abs(self.values - self.values.T))) / scale


class ContourSpec(BaseModel):
    """Counterclockwise axis-aligned ellipse in the complex energy plane."""

    model_config = ConfigDict(frozen=True)

    center: complex
    radius_x: float = Field(gt=0)
    radius_y: float = Field(gt=0)
    points_per_quadrant: int = Field(default=32, ge=4)
    rule: QuadratureRule | None = None

    @classmethod
    def circle(cls, center: complex, radius: float, points: int = 32) -> "ContourSpec":
        """Circle contour."""
        return cls(center=center, radius_x=radius, radius_y=radius, points_per_quadrant=points)

    def point(self, theta: NDArray[np.float64]) -> NDArray[np.complex128]:
        """Contour point at parameter theta."""
        return np.asarray(
            self.center + self.radius_x * np.cos(theta) + 1j * self.radius_y * np.sin(theta)
        )

    def tangent(self, theta: NDArray[np.float64]) -> NDArray[np.complex128]:
        """d(point)/d(theta)."""
        return np.asarray(-self.radius_x * np.sin(theta) + 1j * self.radius_y * np.cos(theta))

    def encloses(self, z: complex) -> bool:
        """Strict interior test."""
        dx = (z.real - self.center.real) / self.radius_x
        dy = (z.imag - self.center.imag) / self.radius_y
        return bool(dx * dx + dy * dy < 1.0)

    def meets_cut(self) -> bool:
        """Whether the closed ellipse touches the real half-line [0, inf)."""
        x = max(0.0, self.center.real)
        dx = (x - self.center.real) / self.radius_x
        dy = self.center.imag / self.radius_y
        return bool(dx * dx + dy * dy <= 1.0)

    def distance_to(self, z: complex, samples: int = 4096) -> float:
        """Approximate distance from ``z`` to the contour curve."""
        theta = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
        return float(np.min(np.abs(self.point(theta) - z)))


class ResidueReport(BaseModel):
    """Contour integral compared with the expected residue sum."""

    label: str = ""
    integral: complex
    expected: complex
    abs_error: float = Field(ge=0)
    poles_enclosed: list[int] = Field(default_factory=list)

    @classmethod
    def compare(
        cls, integral: complex, expected: complex, poles: list[int], label: str = ""
    ) -> "ResidueReport":
        """Build a report from the two values."""
        return cls(
            label=label,
            integral=integral,
            expected=expected,
            abs_error=abs(integral - expected),
            poles_enclosed=poles,
        )


class ConvergenceRow(BaseModel):
    """Approximants of G00 at one depth; None marks a diverged variant."""

    n: int = Field(ge=1)
    values: list[complex | None]


class ConvergenceTable(BaseModel):
    """G00 approximants against depth for several tail/transform variants."""

    variants: list[str]
    rows: list[ConvergenceRow] = Field(default_factory=list)
    converged: dict[str, bool] = Field(default_factory=dict)
    reasons: dict[str, str] = Field(default_factory=dict)
    exact: complex | None = None

    def column(self, label: str) -> list[complex | None]:
        """All values of one variant."""
        index = self.variants.index(label)
        return [row.values[index] for row in self.rows]


class CheckResult(BaseModel):
    """Pass/fail outcome of one validation check."""

    name: str
    passed: bool
    value: float | None = None
    threshold: float | None = None
    detail: str = ""

    @classmethod
    def at_most(cls, name: str, value: float, threshold: float, detail: str = "") -> "CheckResult":
        """Check that passes when ``value`` does not exceed ``threshold``."""
        return cls(
            name=name,
            passed=bool(value <= threshold),
            value=value,
            threshold=threshold,
            detail=detail,
        )

    @classmethod
    def failed(cls, name: str, detail: str) -> "CheckResult":
        """Check that could not be carried out."""
        return cls(name=name, passed=False, detail=detail)
