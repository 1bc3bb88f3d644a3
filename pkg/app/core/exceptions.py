"""Custom exceptions for jacobigreen."""

from typing import Any


class JacobiGreenError(Exception):
    """Base exception for all jacobigreen errors."""

    def __init__(self, message: str, code: str | None = None) -> None:
        self.message = message
        self.code = code or "JACOBIGREEN_ERROR"
        super().__init__(self.message)

    def to_record(self) -> dict[str, Any]:
        """Structured error record for machine-readable output."""
        record: dict[str, Any] = {"code": self.code, "message": self.message}
        for key, value in vars(self).items():
            if key in ("message", "code"):
                continue
            if isinstance(value, complex):
                value = {"re": value.real, "im": value.imag}
            record[key] = value
        return record


class SpecialFunctionError(JacobiGreenError):
    """Base exception for special-function evaluation."""


class PoleError(SpecialFunctionError):
    """Raised when a function is evaluated at one of its poles."""

    def __init__(self, argument: complex) -> None:
        self.argument = complex(argument)
        super().__init__(f"Pole at argument {argument}", "POLE")


class DomainError(SpecialFunctionError):
    """Raised when arguments fall outside the supported region."""

    def __init__(self, message: str, function: str | None = None) -> None:
        self.function = function
        super().__init__(message, "DOMAIN")


class NonConvergenceError(JacobiGreenError):
    """Raised when an iterative evaluation exhausts its budget."""

    def __init__(self, message: str, last_value: complex, n_used: int) -> None:
        self.last_value = complex(last_value)
        self.n_used = n_used
        super().__init__(message, "NON_CONVERGENCE")


class ContinuedFractionError(JacobiGreenError):
    """Base exception for continued-fraction evaluation."""


class CoefficientError(ContinuedFractionError):
    """Raised when a partial numerator vanishes."""

    def __init__(self, index: int) -> None:
        self.index = index
        super().__init__(f"Partial numerator a_{index} is zero", "ZERO_COEFFICIENT")


class DivisionByZeroError(ContinuedFractionError):
    """Raised when a denominator b_k + tail is exactly zero."""

    def __init__(self, depth: int) -> None:
        self.depth = depth
        super().__init__(f"Division by zero at depth {depth}", "DIVISION_BY_ZERO")


class TransformUndefinedError(ContinuedFractionError):
    """Raised when a Bauer-Muir lambda vanishes."""

    def __init__(self, index: int) -> None:
        self.index = index
        super().__init__(
            f"Bauer-Muir transform undefined: lambda_{index} = 0", "TRANSFORM_UNDEFINED"
        )


class DegenerateRootsError(ContinuedFractionError):
    """Raised when the two fixed points cannot be told apart."""

    def __init__(self, roots: tuple[complex, complex]) -> None:
        self.roots = [complex(r) for r in roots]
        super().__init__(
            f"Degenerate fixed points {roots[0]:.6g}, {roots[1]:.6g}", "DEGENERATE_ROOTS"
        )

    def to_record(self) -> dict[str, Any]:
        record = super().to_record()
        record["roots"] = [{"re": r.real, "im": r.imag} for r in self.roots]
        return record


class SingularEnergyError(JacobiGreenError):
    """Raised when the operator's off-diagonal vanishes at the requested energy."""

    def __init__(self, eps: complex) -> None:
        self.eps = complex(eps)
        super().__init__(f"Operator is singular at energy {eps}", "SINGULAR_ENERGY")


class SingularMatrixError(JacobiGreenError):
    """Raised when the truncated inverse is singular (resolvent pole)."""

    def __init__(self, pivot: int, magnitude: float) -> None:
        self.pivot = pivot
        self.magnitude = magnitude
        super().__init__(
            f"Singular matrix: pivot {pivot} has magnitude {magnitude:.3e}", "SINGULAR_MATRIX"
        )


class InstabilityError(JacobiGreenError):
    """Raised when a forward recurrence loses accuracy past the guard."""

    def __init__(self, residual: float, row: int) -> None:
        self.residual = residual
        self.row = row
        super().__init__(
            f"Recurrence residual {residual:.3e} at row {row} exceeds guard", "INSTABILITY"
        )


class NoBoundStatesError(JacobiGreenError):
    """Raised when a model without bound states is asked for one."""

    def __init__(self, charge: float) -> None:
        self.charge = charge
        super().__init__(f"No bound states for charge Z'={charge}", "NO_BOUND_STATES")


class ContourInvalidError(JacobiGreenError):
    """Raised when a contour crosses the cut or passes too close to a pole."""

    def __init__(self, reason: str) -> None:
        self.reason = reason
        super().__init__(f"Invalid contour: {reason}", "CONTOUR_INVALID")


class QuadratureDisagreementError(JacobiGreenError):
    """Raised when two quadrature rules disagree beyond tolerance."""

    def __init__(self, difference: float) -> None:
        self.difference = difference
        super().__init__(
            f"Quadrature rules disagree by {difference:.3e}", "QUADRATURE_DISAGREEMENT"
        )


class ConfigurationError(JacobiGreenError):
    """Raised when run configuration is invalid or inconsistent."""

    def __init__(self, message: str, field: str | None = None) -> None:
        self.field = field
        super().__init__(message, "CONFIG")
