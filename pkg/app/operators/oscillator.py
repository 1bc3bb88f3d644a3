"""D-dimensional harmonic oscillator on an oscillator basis of a different frequency."""

import logging
from typing import Any

import mpmath
import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.exceptions import DomainError, PoleError
from app.core.operator import ComplexArray, JacobiOperator
from app.models.physics import OscillatorModel
from app.services.specfun import HYP_NMAX, HYP_TOL, hyp2f1, laguerre, log_gamma

logger = logging.getLogger(__name__)


class OscillatorOperator(JacobiOperator):
    """
    J = E - H for H = p^2/2 + omega^2 r^2/2 on the basis of frequency omegaP (hbar = m = 1).

    With s = (omega^2 + omegaP^2)/(2 omegaP), t = (omega^2 - omegaP^2)/(2 omegaP)
    and nu = l + D/2:

    J_nn = E - s(2n + nu)
    J_{n,n+1} = t sqrt((n+1)(n+nu))

    The fraction converges for every E off the spectrum, so there is no
    closed-form tail; the fixed points are real with product one.
    """

    def __init__(self, model: OscillatorModel) -> None:
        """
        Initialize the operator.

        Args:
            model: Oscillator model parameters.
        """
        self.model = model
        self._nu = model.nu
        self._s = (model.omega**2 + model.omegaP**2) / (2 * model.omegaP)
        self._t = (model.omega**2 - model.omegaP**2) / (2 * model.omegaP)

    @property
    def name(self) -> str:
        """Operator identifier."""
        return "oscillator"

    @property
    def is_diagonal(self) -> bool:
        return self._t == 0

    @property
    def overlap_base(self) -> float:
        """z = ((omega - omegaP)/(omega + omegaP))^2."""
        omega, omegaP = self.model.omega, self.model.omegaP
        return ((omega - omegaP) / (omega + omegaP)) ** 2

    def diag(self, i: ArrayLike, eps: complex) -> ComplexArray:
        n = np.asarray(i, dtype=np.float64)
        return np.asarray(eps - self._s * (2 * n + self._nu), dtype=np.complex128)

    def offdiag(self, i: ArrayLike, eps: complex) -> ComplexArray:
        n = np.asarray(i, dtype=np.float64)
        return np.asarray(self._t * np.sqrt((n + 1) * (n + self._nu)), dtype=np.complex128)

    def limit_coefficients(self, eps: complex) -> tuple[complex, complex]:
        """(a, b) = (-1, 2s/t)."""
        if self.is_diagonal:
            raise DomainError("matched frequencies give a diagonal operator", "limit_coefficients")
        return -1.0 + 0j, complex(2 * self._s / self._t)

    def diag_mp(self, i: int, eps: Any) -> Any:
        s = (mpmath.mpf(self.model.omega) ** 2 + mpmath.mpf(self.model.omegaP) ** 2) / (
            2 * mpmath.mpf(self.model.omegaP)
        )
        nu = mpmath.mpf(self.model.l) + mpmath.mpf(self.model.D) / 2
        return eps - s * (2 * i + nu)

    def offdiag_mp(self, i: int, eps: Any) -> Any:
        t = (mpmath.mpf(self.model.omega) ** 2 - mpmath.mpf(self.model.omegaP) ** 2) / (
            2 * mpmath.mpf(self.model.omegaP)
        )
        nu = mpmath.mpf(self.model.l) + mpmath.mpf(self.model.D) / 2
        return t * mpmath.sqrt((i + 1) * (i + nu))

    @property
    def has_exact_g00(self) -> bool:
        return True

    def exact_g00(
        self, eps: complex, tol: float | None = None, nmax: int | None = None
    ) -> complex:
        """
        Closed-form G00.

        G00 = (1 - z)/(E - omega nu) * 2F1(1 - nu/2 - E/(2 omega), 1; 1 + nu/2 - E/(2 omega); z)

        Raises:
            PoleError: At an eigenvalue omega(2n + nu).
        """
        eps = complex(eps)
        omega = self.model.omega
        level = (eps.real / omega - self._nu) / 2
        if eps.imag == 0 and level >= 0 and level == np.floor(level):
            raise PoleError(eps)
        z = self.overlap_base
        x = eps / (2 * omega)
        series = hyp2f1(
            1 - self._nu / 2 - x,
            1.0,
            1 + self._nu / 2 - x,
            z,
            tol=HYP_TOL if tol is None else tol,
            nmax=HYP_NMAX if nmax is None else nmax,
        )
        return complex((1 - z) / (eps - omega * self._nu) * series)

    def exact_g00_mp(self, eps: Any) -> Any:
        """Closed-form G00 in mpmath arithmetic."""
        eps = mpmath.mpc(eps)
        omega = mpmath.mpf(self.model.omega)
        omegaP = mpmath.mpf(self.model.omegaP)
        nu = mpmath.mpf(self.model.l) + mpmath.mpf(self.model.D) / 2
        z = ((omega - omegaP) / (omega + omegaP)) ** 2
        x = eps / (2 * omega)
        return (1 - z) / (eps - omega * nu) * mpmath.hyp2f1(1 - nu / 2 - x, 1, 1 + nu / 2 - x, z)

    def eigen_overlaps(self, count: int) -> NDArray[np.float64]:
        """|<m|0'>|^2 = (1-z)^nu (nu)_m z^m / m! for m = 0..count-1."""
        z = self.overlap_base
        m = np.arange(count, dtype=np.float64)
        if z == 0:
            return np.where(m == 0, 1.0, 0.0)
        log_terms = np.array(
            [
                log_gamma(k + self._nu).real - log_gamma(self._nu).real - log_gamma(k + 1).real
                for k in range(count)
            ]
        )
        return np.asarray(np.exp(self._nu * np.log1p(-z) + log_terms + m * np.log(z)))


def oscillator_jacobi(model: OscillatorModel) -> OscillatorOperator:
    """Build the oscillator Jacobi operator of ``model``."""
    return OscillatorOperator(model)


def oscillator_spectrum(model: OscillatorModel, n: int) -> float:
    """Eigenvalue omega (2n + l + D/2)."""
    if n < 0:
        raise DomainError(f"radial quantum number must be >= 0, got {n}", "oscillator_spectrum")
    return model.omega * (2 * n + model.nu)


def _oscillator_function(
    n: int, frequency: float, model: OscillatorModel, r: ArrayLike
) -> NDArray[np.float64]:
    nu = model.nu
    rs = np.asarray(r, dtype=np.float64)
    log_norm = np.log(2.0) + nu * np.log(frequency)
    log_norm += log_gamma(n + 1).real - log_gamma(n + nu).real
    x = frequency * rs * rs
    power = model.l + (model.D - 1) / 2
    shape = rs**power * np.exp(-0.5 * x) * laguerre(n, nu - 1, x)
    return np.asarray(np.exp(0.5 * log_norm) * shape)


def oscillator_wavefunction(n: int, model: OscillatorModel, r: ArrayLike) -> NDArray[np.float64]:
    """
    Normalized radial eigenfunction of frequency omega.

    psi_n = (2 omega^nu n!/Gamma(n+nu))^(1/2) r^(l+(D-1)/2) exp(-omega r^2/2) L_n^(nu-1)(omega r^2),
    normalized as the integral of psi^2 over r in (0, inf).
    """
    return _oscillator_function(n, model.omega, model, r)


def oscillator_basis_function(n: int, model: OscillatorModel, r: ArrayLike) -> NDArray[np.float64]:
    """Basis function of frequency omegaP, same form as :func:`oscillator_wavefunction`."""
    return _oscillator_function(n, model.omegaP, model, r)
