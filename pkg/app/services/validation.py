"""Validation service: contour integrals of G00, bound-state overlaps and structural checks."""

import logging
from collections.abc import Callable

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from app.config import Settings, get_settings
from app.core.exceptions import (
    ContourInvalidError,
    JacobiGreenError,
    NoBoundStatesError,
    PoleError,
    QuadratureDisagreementError,
    SingularEnergyError,
)
from app.core.operator import JacobiOperator
from app.models.physics import CoulombModel, EnergyPoint
from app.models.results import CheckResult, ContourSpec, ResidueReport
from app.operators.coulomb import (
    CoulombOperator,
    coulomb_bound_wavefunction,
    coulomb_spectrum,
    cs_function,
)
from app.operators.oscillator import OscillatorOperator, oscillator_spectrum
from app.services.continued_fraction import TailStrategy
from app.services.greens import GreensService
from app.services.specfun import gauss_legendre

logger = logging.getLogger(__name__)

POLE_CLEARANCE = 1e-6
OVERLAP_AGREEMENT = 1e-11
POLE_MATCH_TOL = 1e-8
_KNOWN_POLES = 200
_TAIL_CUTOFF = 1e-16

# structural thresholds of the invariant suite
SYMMETRY_TOL = 1e-12
FACTORIZATION_TOL = 1e-10
RECURRENCE_TOL = 1e-11
RESOLVENT_TOL = 1e-12
DENSE_ORACLE_TOL = 1e-9
CROSS_METHOD_TOL = 1e-10


def pole_positions(op: JacobiOperator, count: int = _KNOWN_POLES) -> list[float]:
    """First ``count`` poles of G00 known in closed form; empty when there are none."""
    if isinstance(op, CoulombOperator):
        if op.charge <= 0:
            return []
        return [coulomb_spectrum(op.model, n) for n in range(count)]
    if isinstance(op, OscillatorOperator):
        return [oscillator_spectrum(op.model, n) for n in range(count)]
    return []


def has_continuum(op: JacobiOperator) -> bool:
    """Whether G00 has a branch cut along [0, inf)."""
    return isinstance(op, CoulombOperator)


class ValidationService:
    """
    Service for independent physics checks of the Green's matrices.

    Provides:
    - Cauchy contour integrals of G00 on ellipses in the energy plane
    - Overlaps of the first Sturmian function with bound states by quadrature
    - Residue, pole-matching and structural invariant suites
    """

    def __init__(
        self, settings: Settings | None = None, greens: GreensService | None = None
    ) -> None:
        """
        Initialize the service.

        Args:
            settings: Numerical defaults.
            greens: Green's matrix service used for every G00 evaluation.
        """
        self._settings = settings or get_settings()
        self._greens = greens or GreensService(self._settings)

    # ------------------------------------------------------------------
    # Contours
    # ------------------------------------------------------------------

    def check_contour(self, op: JacobiOperator, contour: ContourSpec) -> list[int]:
        """
        Validate a contour and list the indices of the enclosed poles.

        Raises:
            ContourInvalidError: If the contour meets the continuum cut or
                passes within 1e-6 of a pole.
        """
        if has_continuum(op) and contour.meets_cut():
            raise ContourInvalidError("contour intersects the continuum cut [0, inf)")
        enclosed = []
        for n, pole in enumerate(pole_positions(op)):
            if contour.distance_to(pole) < POLE_CLEARANCE:
                raise ContourInvalidError(f"contour passes within 1e-6 of pole {n} at {pole}")
            if contour.encloses(pole):
                enclosed.append(n)
        return enclosed

    def contour_integral_g00(
        self,
        op: JacobiOperator,
        contour: ContourSpec,
        tail: TailStrategy | None = None,
        bm_depth: int | None = None,
        tol: float | None = None,
    ) -> complex:
        """
        (1/2 pi i) times the counterclockwise integral of G00 around ``contour``.

        The ellipse is split into four arcs centered on its extreme points and
        each arc is integrated with the contour's Gauss-Legendre rule.

        Args:
            op: Jacobi operator.
            contour: Closed contour.
            tail: Tail strategy; the physical tail at each node if omitted.
            bm_depth: Bauer-Muir levels.
            tol: Relative tolerance of each G00 evaluation.

        Returns:
            The normalized contour integral.

        Raises:
            ContourInvalidError: If the contour is invalid.
        """
        self.check_contour(op, contour)
        rule = contour.rule or gauss_legendre(contour.points_per_quadrant)
        x, w = rule.arrays()
        total = 0j
        for k in range(4):
            lo = np.pi / 4 + k * np.pi / 2
            half = np.pi / 4
            theta = lo + half * (x + 1.0)
            nodes = contour.point(theta)
            values = np.array(
                [self._greens.g00(op, complex(z), tail, bm_depth, tol) for z in nodes]
            )
            total += half * complex(np.sum(w * values * contour.tangent(theta)))
        result = total / (2j * np.pi)
        logger.debug(f"[Validation] Contour at {contour.center} gives {result}")
        return complex(result)

    # ------------------------------------------------------------------
    # Overlaps and residues
    # ------------------------------------------------------------------

    def _integration_range(
        self, integrand: Callable[[NDArray[np.float64]], NDArray[np.float64]], rate: float
    ) -> float:
        R = 10.0 / rate
        for _ in range(60):
            grid = np.linspace(0.0, R, 2001)[1:]
            values = np.abs(integrand(grid))
            if values[-1] <= _TAIL_CUTOFF * max(float(np.max(values)), _TAIL_CUTOFF):
                return R
            R *= 1.5
        return R

    def overlap_cs_bound(self, model: CoulombModel, nr: int) -> float:
        """
        Overlap of the dual of the first Sturmian function with a bound state.

        Integrates phi_0(bS, r)/r psi_{nr,l}(r) over [0, R] by composite
        Gauss-Legendre, with R chosen so the integrand has decayed below 1e-16,
        and repeats the integral with doubled order.

        Raises:
            NoBoundStatesError: If Z' <= 0.
            QuadratureDisagreementError: If the two rules differ by more than 1e-11.
        """
        if model.Zp <= 0:
            raise NoBoundStatesError(model.Zp)

        def integrand(r: NDArray[np.float64]) -> NDArray[np.float64]:
            return cs_function(0, model, r) / r * coulomb_bound_wavefunction(nr, model, r)

        a0 = model.Zp / (nr + model.lp + 1)
        R = self._integration_range(integrand, model.bS + a0 / 2)
        panels, order = self._settings.quad_panels, self._settings.quad_order
        coarse = float(gauss_legendre(order).composite(integrand, 0.0, R, panels))
        fine = float(gauss_legendre(2 * order).composite(integrand, 0.0, R, panels))
        if abs(coarse - fine) > OVERLAP_AGREEMENT:
            raise QuadratureDisagreementError(abs(coarse - fine))
        return fine

    def single_pole_contour(self, model: CoulombModel, nr: int) -> ContourSpec:
        """Circle around level nr that stays clear of its neighbors and of zero."""
        level = coulomb_spectrum(model, nr)
        gaps = [abs(level), coulomb_spectrum(model, nr + 1) - level]
        if nr > 0:
            gaps.append(level - coulomb_spectrum(model, nr - 1))
        return ContourSpec.circle(level, 0.5 * min(gaps), self._settings.contour_points)

    def multi_pole_contour(
        self, model: CoulombModel, levels: int, points: int = 96
    ) -> ContourSpec:
        """Circle enclosing levels 0..levels-1 and no other pole."""
        first = coulomb_spectrum(model, 0)
        last = coulomb_spectrum(model, levels - 1)
        following = coulomb_spectrum(model, levels)
        left = first - 0.2 * abs(first)
        right = last + 0.4 * (following - last)
        return ContourSpec.circle(0.5 * (left + right), 0.5 * (right - left), points)

    def pole_free_contour(self, model: CoulombModel) -> ContourSpec:
        """Small circle below the spectrum."""
        center = -10.0
        if model.Zp > 0:
            center = min(center, 2 * coulomb_spectrum(model, 0) - 1.0)
        return ContourSpec.circle(center, 0.1, self._settings.contour_points)

    def residue_report(
        self,
        op: JacobiOperator,
        model: CoulombModel,
        contour: ContourSpec,
        label: str,
    ) -> ResidueReport:
        """Contour integral of ``op`` against the bound-state overlaps of ``model``."""
        # expected residues come from the model, so a mis-signed operator shows up here
        enclosed = [
            n
            for n in range(_KNOWN_POLES if model.Zp > 0 else 0)
            if contour.encloses(coulomb_spectrum(model, n))
        ]
        integral = self.contour_integral_g00(op, contour)
        expected = sum(self.overlap_cs_bound(model, n) ** 2 for n in enclosed)
        report = ResidueReport.compare(integral, complex(expected), enclosed, label)
        logger.info(f"[Validation] {label}: error {report.abs_error:.3e}, poles {enclosed}")
        return report

    def residue_suite(
        self, model: CoulombModel, n_poles: int, op: JacobiOperator | None = None
    ) -> list[ResidueReport]:
        """
        One pole-free report plus one report per pole 0..n_poles-1.

        Args:
            model: Coulomb model.
            n_poles: Number of single-pole contours (at most 3).
            op: Operator to integrate; the model's own operator if omitted.
        """
        if not 0 <= n_poles <= 3:
            raise ValueError("n_poles must be between 0 and 3")
        operator = op or CoulombOperator(model)
        reports = [self.residue_report(operator, model, self.pole_free_contour(model), "pole-free")]
        for nr in range(n_poles):
            contour = self.single_pole_contour(model, nr)
            reports.append(self.residue_report(operator, model, contour, f"pole {nr}"))
        return reports

    # ------------------------------------------------------------------
    # Poles
    # ------------------------------------------------------------------

    def inverse_g00(self, op: JacobiOperator, eps: complex) -> complex:
        """1/G00 by Method B, continued through the energies where J01 vanishes."""
        try:
            return 1 / self._greens.g00(op, eps)
        except SingularEnergyError:
            # the basis decouples there and 1/G00 reduces to J00
            return complex(op.diag(0, eps))
        except PoleError:
            return 0j

    def locate_pole(self, op: JacobiOperator, bracket: tuple[float, float]) -> float:
        """
        Real root of 1/G00 inside ``bracket`` by Brent's method on Method B.

        Raises:
            ValueError: If 1/G00 does not change sign over the bracket.
        """

        def inverse(e: float) -> float:
            return float(self.inverse_g00(op, complex(e)).real)

        root = brentq(inverse, bracket[0], bracket[1], xtol=1e-15, rtol=1e-15, maxiter=200)
        return float(root)

    def pole_matching(
        self, op: JacobiOperator, model: CoulombModel, levels: int = 3
    ) -> list[CheckResult]:
        """Compare the poles of G00 from ``op`` with the spectrum of ``model``."""
        checks = []
        for n in range(levels):
            name = f"pole-match {n}"
            expected = coulomb_spectrum(model, n)
            delta = 0.1 * (coulomb_spectrum(model, n + 1) - expected)
            try:
                found = self.locate_pole(op, (expected - delta, expected + delta))
                residual = abs(self.inverse_g00(op, complex(found)))
            except (ValueError, JacobiGreenError) as exc:
                checks.append(CheckResult.failed(name, str(exc)))
                continue
            detail = f"expected {expected!r}, found {found!r}"
            if residual > 1e-6:
                checks.append(CheckResult.failed(name, f"{detail}: sign change is not a pole"))
                continue
            checks.append(CheckResult.at_most(name, abs(found - expected), POLE_MATCH_TOL, detail))
        return checks

    # ------------------------------------------------------------------
    # Structural invariants
    # ------------------------------------------------------------------

    def invariant_suite(self, op: JacobiOperator, eps: EnergyPoint, N: int) -> list[CheckResult]:
        """
        Structural checks of the Method B matrix at ``eps``.

        Symmetry, factorization, interior recurrence residual and resolvent
        identity always run. The dense-block oracle runs in the bound region
        (Re eps < 0) and the cross-method comparison when Method A is available.
        """
        greens = self._greens
        try:
            G = greens.greens_matrix_B(op, eps, N)
        except JacobiGreenError as exc:
            return [CheckResult.failed("method-B", exc.message)]

        checks = [
            CheckResult.at_most("symmetry", G.symmetry_error(), SYMMETRY_TOL),
            CheckResult.at_most("factorization", greens.factorization_check(G), FACTORIZATION_TOL),
            CheckResult.at_most("recurrence", greens.recurrence_residual(op, G), RECURRENCE_TOL),
            CheckResult.at_most("resolvent", greens.resolvent_identity(op, G), RESOLVENT_TOL),
        ]
        if eps.eps.real < 0:
            dense = greens.dense_block_inverse(op, eps, N)
            checks.append(
                CheckResult.at_most(
                    "dense-oracle", greens.max_deviation(G.values, dense), DENSE_ORACLE_TOL
                )
            )
        if op.has_exact_g00:
            try:
                A = greens.greens_matrix_A(op, eps, N)
                deviation = greens.max_deviation(A.values, G.values)
                checks.append(CheckResult.at_most("cross-method", deviation, CROSS_METHOD_TOL))
            except JacobiGreenError as exc:
                checks.append(CheckResult.failed("cross-method", exc.message))
        return checks
