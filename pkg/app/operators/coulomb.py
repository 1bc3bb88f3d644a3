"""D-dimensional Coulomb problem on the Coulomb-Sturmian basis, scaled units."""

import logging
from typing import Any

import mpmath
import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.constants import SINGULAR_ENERGY_BAND
from app.core.exceptions import NoBoundStatesError, PoleError, SingularEnergyError
from app.core.operator import ComplexArray, JacobiOperator
from app.models.physics import CoulombModel, EnergyPoint
from app.services.specfun import HYP_NMAX, HYP_TOL, hyp2f1, laguerre, log_gamma

logger = logging.getLogger(__name__)

POLE_GUARD = 1e-12
_SERIES_RADIUS = 0.99
_CONTINUUM_DPS = 30


class CoulombOperator(JacobiOperator):
    """
    Scaled operator J = (2m/hbar^2)(E - H) on the Coulomb-Sturmian basis.

    J_ii = (i+l'+1)(eps-bS^2)/bS + Z'
    J_{i,i+1} = -sqrt((i+1)(i+2l'+2)) (eps+bS^2)/(2bS)

    With ``printed_sign`` the charge term enters with the opposite sign. That
    variant describes the repulsive problem and exists only as a negative
    control for pole matching.
    """

    def __init__(self, model: CoulombModel, printed_sign: bool = False) -> None:
        """
        Initialize the operator.

        Args:
            model: Coulomb model parameters.
            printed_sign: Flip the sign of the charge term.
        """
        self.model = model
        self.printed_sign = printed_sign
        self._lp = model.lp
        self._bS = model.bS
        self._charge = -model.Zp if printed_sign else model.Zp

    @property
    def name(self) -> str:
        """Operator identifier."""
        return "coulomb-printed-sign" if self.printed_sign else "coulomb"

    @property
    def charge(self) -> float:
        """Charge term actually used in the diagonal."""
        return self._charge

    def check_energy(self, eps: complex) -> None:
        """The off-diagonal band vanishes at eps = -bS^2."""
        bS2 = self._bS**2
        if abs(eps + bS2) <= SINGULAR_ENERGY_BAND * (abs(eps) + bS2):
            raise SingularEnergyError(eps)

    def diag(self, i: ArrayLike, eps: complex) -> ComplexArray:
        n = np.asarray(i, dtype=np.float64)
        return np.asarray(
            (n + self._lp + 1) * (eps - self._bS**2) / self._bS + self._charge,
            dtype=np.complex128,
        )

    def offdiag(self, i: ArrayLike, eps: complex) -> ComplexArray:
        n = np.asarray(i, dtype=np.float64)
        root = np.sqrt((n + 1) * (n + 2 * self._lp + 2))
        return np.asarray(-root * (eps + self._bS**2) / (2 * self._bS), dtype=np.complex128)

    def limit_coefficients(self, eps: complex) -> tuple[complex, complex]:
        """(a, b) = (-1, 2(eps - bS^2)/(eps + bS^2))."""
        self.check_energy(eps)
        bS2 = self._bS**2
        return -1.0 + 0j, complex(2 * (eps - bS2) / (eps + bS2))

    def closed_form_tail(self, eps: complex) -> complex:
        """Physical fixed point -(k - i bS)/(k + i bS) with Im k >= 0."""
        k = EnergyPoint(eps=eps).k
        return -(k - 1j * self._bS) / (k + 1j * self._bS)

    def diag_mp(self, i: int, eps: Any) -> Any:
        lp = mpmath.mpf(self.model.l) + mpmath.mpf(self.model.D - 3) / 2
        bS = mpmath.mpf(self._bS)
        return (i + lp + 1) * (eps - bS**2) / bS + mpmath.mpf(self._charge)

    def offdiag_mp(self, i: int, eps: Any) -> Any:
        lp = mpmath.mpf(self.model.l) + mpmath.mpf(self.model.D - 3) / 2
        bS = mpmath.mpf(self._bS)
        return -mpmath.sqrt((i + 1) * (i + 2 * lp + 2)) * (eps + bS**2) / (2 * bS)

    @property
    def has_exact_g00(self) -> bool:
        return True

    def _hyp_parameters(self, k: complex) -> tuple[complex, complex, complex, complex]:
        i_gamma = -1j * self._charge / (2 * k)
        z = ((self._bS + 1j * k) / (self._bS - 1j * k)) ** 2
        return -self._lp + i_gamma, self._lp + 1 + i_gamma, self._lp + 2 + i_gamma, z

    def exact_g00(
        self, eps: complex, tol: float | None = None, nmax: int | None = None
    ) -> complex:
        """
        Closed-form G00 in scaled units.

        G00 = -2bS/(bS-ik)^2 / (l'+1+i gamma) * 2F1(-l'+i gamma, 1; l'+2+i gamma; z)
        with gamma = -Z'/(2k) and z = ((bS+ik)/(bS-ik))^2.

        For |z| >= 0.99, which covers the continuum, the value comes from the
        mpmath form at 30 digits. Elsewhere ``tol`` and ``nmax`` bound the series.

        Raises:
            PoleError: At or within 1e-12 (in |1/G00|) of a bound-state pole.
            DomainError: If the series region excludes the argument.
        """
        self.check_energy(eps)
        k = EnergyPoint(eps=eps).k
        if k == 0:
            raise PoleError(eps)
        a, lead, c, z = self._hyp_parameters(k)
        if lead == 0 or (c.imag == 0 and c.real <= 0 and c.real == np.floor(c.real)):
            raise PoleError(eps)
        if abs(z) >= _SERIES_RADIUS:
            with mpmath.workdps(_CONTINUUM_DPS):
                value = complex(self.exact_g00_mp(eps))
        else:
            prefactor = -2 * self._bS / (self._bS - 1j * k) ** 2
            series = hyp2f1(
                a,
                1.0,
                c,
                z,
                tol=HYP_TOL if tol is None else tol,
                nmax=HYP_NMAX if nmax is None else nmax,
            )
            value = prefactor / lead * series
        if abs(1 / value) < POLE_GUARD:
            raise PoleError(eps)
        return complex(value)

    def exact_g00_mp(self, eps: Any) -> Any:
        """Closed-form G00 in mpmath arithmetic at the current precision."""
        eps = mpmath.mpc(eps)
        k = mpmath.sqrt(eps)
        if mpmath.im(k) < 0:
            k = -k
        lp = mpmath.mpf(self.model.l) + mpmath.mpf(self.model.D - 3) / 2
        bS = mpmath.mpf(self._bS)
        i_gamma = -1j * mpmath.mpf(self._charge) / (2 * k)
        z = ((bS + 1j * k) / (bS - 1j * k)) ** 2
        prefactor = -2 * bS / (bS - 1j * k) ** 2
        return prefactor / (lp + 1 + i_gamma) * mpmath.hyp2f1(-lp + i_gamma, 1, lp + 2 + i_gamma, z)


def coulomb_jacobi(model: CoulombModel, printed_sign: bool = False) -> CoulombOperator:
    """Build the Coulomb-Sturmian Jacobi operator of ``model``."""
    return CoulombOperator(model, printed_sign=printed_sign)


def cs_overlap(n: int, np_: int, model: CoulombModel) -> float:
    """Overlap <n l | n' l> of two Coulomb-Sturmian functions."""
    if n < 0 or np_ < 0:
        raise ValueError("basis indices must be non-negative")
    if n == np_:
        return (n + model.lp + 1) / model.bS
    if abs(n - np_) == 1:
        k = min(n, np_)
        return float(-np.sqrt((k + 1) * (k + 2 * model.lp + 2)) / (2 * model.bS))
    return 0.0


def coulomb_spectrum(model: CoulombModel, nr: int) -> float:
    """Scaled bound-state energy -Z'^2 / (4 (nr + l + (D-1)/2)^2)."""
    if model.Zp <= 0:
        raise NoBoundStatesError(model.Zp)
    return -(model.Zp**2) / (4 * (nr + model.lp + 1) ** 2)


def cs_function(n: int, model: CoulombModel, r: ArrayLike) -> NDArray[np.float64]:
    """
    Coulomb-Sturmian function phi_n(bS, r).

    phi_n = (n!/Gamma(n+2l'+2))^(1/2) (2 bS r)^(l'+1) exp(-bS r) L_n^(2l'+1)(2 bS r)
    """
    lp, bS = model.lp, model.bS
    x = 2 * bS * np.asarray(r, dtype=np.float64)
    norm = np.exp(0.5 * (log_gamma(n + 1).real - log_gamma(n + 2 * lp + 2).real))
    return np.asarray(norm * x ** (lp + 1) * np.exp(-0.5 * x) * laguerre(n, 2 * lp + 1, x))


def coulomb_bound_wavefunction(nr: int, model: CoulombModel, r: ArrayLike) -> NDArray[np.float64]:
    """
    Normalized radial bound state psi_{nr,l}(r).

    With nu = nr + l' + 1 and a0 = Z'/nu:
    psi = (a0 nr! / (2 nu Gamma(nr+2l'+2)))^(1/2) (a0 r)^(l'+1) exp(-a0 r/2) L_nr^(2l'+1)(a0 r)
    """
    if model.Zp <= 0:
        raise NoBoundStatesError(model.Zp)
    lp = model.lp
    nu = nr + lp + 1
    a0 = model.Zp / nu
    x = a0 * np.asarray(r, dtype=np.float64)
    log_norm = np.log(a0 / (2 * nu)) + log_gamma(nr + 1).real - log_gamma(nr + 2 * lp + 2).real
    return np.asarray(
        np.exp(0.5 * log_norm) * x ** (lp + 1) * np.exp(-0.5 * x) * laguerre(nr, 2 * lp + 1, x)
    )
