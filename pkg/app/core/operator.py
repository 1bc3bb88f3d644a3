"""Abstract Jacobi-operator interface consumed by both Green's matrix methods."""

from abc import ABC, abstractmethod
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.exceptions import DomainError

ComplexArray = NDArray[np.complex128]


class JacobiOperator(ABC):
    """Symmetric tridiagonal representation J(eps) of (E - H) on a countable basis.

    Implementations provide the diagonal and first off-diagonal bands as
    vectorized functions of the basis index. Everything else, including the
    continued-fraction coefficients, is derived from those two bands.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Operator identifier."""
        ...

    @property
    def is_diagonal(self) -> bool:
        """True when the off-diagonal band vanishes identically."""
        return False

    @abstractmethod
    def diag(self, i: ArrayLike, eps: complex) -> ComplexArray:
        """
        Diagonal elements J_ii(eps).

        Args:
            i: Basis index or array of indices (>= 0).
            eps: Complex energy.

        Returns:
            Array of J_ii with the shape of ``i``.
        """
        ...

    @abstractmethod
    def offdiag(self, i: ArrayLike, eps: complex) -> ComplexArray:
        """
        Off-diagonal elements J_{i,i+1}(eps) = J_{i+1,i}(eps).

        Args:
            i: Basis index or array of indices (>= 0).
            eps: Complex energy.

        Returns:
            Array of J_{i,i+1} with the shape of ``i``.
        """
        ...

    @abstractmethod
    def limit_coefficients(self, eps: complex) -> tuple[complex, complex]:
        """
        Limits (a, b) of the continued-fraction coefficients as i -> infinity.

        Raises:
            SingularEnergyError: If the limits do not exist at ``eps``.
            DomainError: If the operator has no limit-periodic fraction.
        """
        ...

    @abstractmethod
    def diag_mp(self, i: int, eps: Any) -> Any:
        """Diagonal element in mpmath arithmetic at the current working precision."""
        ...

    @abstractmethod
    def offdiag_mp(self, i: int, eps: Any) -> Any:
        """Off-diagonal element in mpmath arithmetic."""
        ...

    def check_energy(self, eps: complex) -> None:
        """Raise if ``eps`` is not admissible. The default accepts every energy."""
        return None

    def closed_form_tail(self, eps: complex) -> complex | None:
        """Physical-sheet tail fixed point in closed form, when the model has one."""
        return None

    def exact_g00(
        self, eps: complex, tol: float | None = None, nmax: int | None = None
    ) -> complex:
        """Closed-form G00 in double precision; tol and nmax bound any series it sums."""
        raise DomainError(f"{self.name} has no closed-form G00", "exact_g00")

    def exact_g00_mp(self, eps: Any) -> Any:
        """Closed-form G00 in mpmath arithmetic."""
        raise DomainError(f"{self.name} has no closed-form G00", "exact_g00_mp")

    @property
    def has_exact_g00(self) -> bool:
        """Whether Method A can be seeded."""
        return False

    def cf_a(self, i: ArrayLike, eps: complex) -> ComplexArray:
        """Partial numerators a_i = -J_{i,i-1} / J_{i,i+1} (i >= 1)."""
        idx = np.asarray(i)
        return -self.offdiag(idx - 1, eps) / self.offdiag(idx, eps)

    def cf_b(self, i: ArrayLike, eps: complex) -> ComplexArray:
        """Partial denominators b_i = -J_ii / J_{i,i+1}."""
        idx = np.asarray(i)
        return -self.diag(idx, eps) / self.offdiag(idx, eps)

    def coefficients(
        self, eps: complex, start: int, count: int
    ) -> tuple[ComplexArray, ComplexArray]:
        """cf_a and cf_b for indices start, ..., start + count - 1 in one pass."""
        idx = np.arange(start, start + count)
        upper = self.offdiag(np.arange(start - 1, start + count), eps)
        lower, here = upper[:-1], upper[1:]
        return -lower / here, -self.diag(idx, eps) / here

    def block(self, eps: complex, N: int) -> tuple[ComplexArray, ComplexArray]:
        """Diagonal J_00..J_{N-1,N-1} and off-diagonal J_{01}..J_{N-1,N}."""
        idx = np.arange(N)
        return self.diag(idx, eps), self.offdiag(idx, eps)

    def dense(self, eps: complex, M: int) -> ComplexArray:
        """Raw M x M block of J as a dense matrix."""
        d, o = self.block(eps, M)
        J = np.diag(d).astype(np.complex128)
        J += np.diag(o[:-1], 1) + np.diag(o[:-1], -1)
        return J
