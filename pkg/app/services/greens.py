"""Green's matrix service.

Method B closes the truncated operator with the continued-fraction ratio of
the minimal solution and inverts the resulting tridiagonal matrix. Method A
starts from a closed-form G00 and runs the three-term recurrence forward in
mpmath arithmetic.
"""

import logging
from typing import Any

import mpmath
import numpy as np
import scipy.linalg

from app.config import Settings, get_settings
from app.constants import FIXED_POINT_TIE, CliTail, Method, Sheet
from app.core.exceptions import (
    DegenerateRootsError,
    DomainError,
    InstabilityError,
    NonConvergenceError,
    PoleError,
    SingularMatrixError,
)
from app.core.operator import ComplexArray, JacobiOperator
from app.models.physics import CoulombModel, EnergyPoint, OscillatorModel
from app.models.results import EvaluationReport, GreensMatrix
from app.operators.coulomb import CoulombOperator
from app.operators.oscillator import OscillatorOperator
from app.services.continued_fraction import (
    ContinuedFraction,
    TailStrategy,
    approximant,
    bauer_muir_iterated,
    evaluate,
    fixed_points,
)

logger = logging.getLogger(__name__)

Energy = EnergyPoint | complex | float

# depth of the modified approximant used by the generic sheet test
_SHEET_TEST_DEPTH = 400
_BASE_DPS = 30
_MAX_DPS = 400
_RESCALE = 1e100


def _as_complex(eps: Energy) -> complex:
    return eps.eps if isinstance(eps, EnergyPoint) else complex(eps)


class GreensService:
    """
    Service building truncated Green's matrices of Jacobi operators.

    Provides:
    - Tail ratios G_{N+1,0}/G_{N,0} from continued fractions, with fixed-point
      tails and Bauer-Muir acceleration
    - A Miller backward-recurrence oracle for the same ratio
    - Method B matrices by tridiagonal solve with a dense LU fallback
    - Method A matrices from closed-form G00 in extended precision
    - Structural checks (factorization, recurrence residual, resolvent identity)
    """

    def __init__(self, settings: Settings | None = None) -> None:
        """
        Initialize the service.

        Args:
            settings: Numerical defaults; the cached application settings if omitted.
        """
        self._settings = settings or get_settings()

    # ------------------------------------------------------------------
    # Tails and ratios
    # ------------------------------------------------------------------

    def continued_fraction(
        self, op: JacobiOperator, eps: Energy, offset: int = 0
    ) -> ContinuedFraction:
        """
        Fraction K_{i=offset+1}^inf (a_i / b_i) of the operator at ``eps``.

        Raises:
            SingularEnergyError: If the operator is singular at ``eps``.
        """
        e = _as_complex(eps)
        op.check_energy(e)
        try:
            limits: tuple[complex, complex] | None = op.limit_coefficients(e)
        except DomainError:
            limits = None

        def source(start: int, count: int) -> tuple[ComplexArray, ComplexArray]:
            return op.coefficients(e, offset + start, count)

        return ContinuedFraction(0.0, source, limits=limits, label=f"{op.name}@{offset}")

    def physical_tail(
        self, op: JacobiOperator, eps: Energy, sheet: Sheet = Sheet.PHYSICAL
    ) -> complex:
        """
        Fixed point of w^2 + b w - a = 0 on the requested sheet.

        The operator's closed form is used when it has one. Otherwise the
        smaller-modulus root is physical; on a modulus tie the root giving
        Im G00 < 0 in the upper half plane wins.

        Args:
            op: Jacobi operator.
            eps: Energy.
            sheet: Physical or unphysical sheet.

        Returns:
            The fixed point on ``sheet``.

        Raises:
            DegenerateRootsError: If the two roots coincide or the sign test
                cannot separate them.
        """
        e = _as_complex(eps)
        a, b = op.limit_coefficients(e)
        closed = op.closed_form_tail(e)
        if closed is not None:
            # the two roots multiply to -a
            return closed if sheet == Sheet.PHYSICAL else -a / closed

        points = fixed_points(a, b)
        physical, other = points.attractive, points.repulsive
        if points.degenerate:
            scale = max(abs(physical), abs(other), 1.0)
            if abs(physical - other) <= FIXED_POINT_TIE * scale:
                raise DegenerateRootsError((physical, other))
            physical, other = self._sign_rule(op, e, physical, other)
        return physical if sheet == Sheet.PHYSICAL else other

    def _sign_rule(
        self, op: JacobiOperator, eps: complex, first: complex, second: complex
    ) -> tuple[complex, complex]:
        cf = self.continued_fraction(op, eps)
        j00, j01 = complex(op.diag(0, eps)), complex(op.offdiag(0, eps))
        wanted = -1.0 if eps.imag >= 0 else 1.0
        good = [
            w
            for w in (first, second)
            if wanted * (1 / (j00 - j01 * approximant(cf, _SHEET_TEST_DEPTH, w))).imag > 0
        ]
        if len(good) != 1:
            raise DegenerateRootsError((first, second))
        return (first, second) if good[0] == first else (second, first)

    def resolve_tail(self, op: JacobiOperator, eps: Energy, choice: CliTail) -> TailStrategy:
        """Map a command-line tail name to a tail strategy at ``eps``."""
        if choice == CliTail.ZERO or op.is_diagonal:
            return TailStrategy.zero()
        sheet = Sheet.PHYSICAL if choice == CliTail.PLUS else Sheet.UNPHYSICAL
        return TailStrategy.explicit(self.physical_tail(op, eps, sheet))

    def ratio_report(
        self,
        op: JacobiOperator,
        eps: Energy,
        N: int,
        tail: TailStrategy | None = None,
        bm_depth: int | None = None,
        tol: float | None = None,
        nmax: int | None = None,
    ) -> EvaluationReport:
        """
        Evaluate r_N = G_{N+1,0}/G_{N,0} = -K_{i=N+1}^inf (a_i / b_i) without raising
        on non-convergence.

        Returns:
            EvaluationReport whose value is r_N itself.
        """
        if N < 0:
            raise DomainError(f"ratio index must be >= 0, got {N}", "tail_ratio")
        e = _as_complex(eps)
        op.check_energy(e)
        if op.is_diagonal:
            return EvaluationReport(value=0j, n_used=0, converged=True)

        settings = self._settings
        depth = settings.bm_depth if bm_depth is None else bm_depth
        if tail is None:
            tail = self.resolve_tail(op, e, CliTail(settings.tail))
        cf = bauer_muir_iterated(self.continued_fraction(op, e, N), tail, depth)
        report = evaluate(
            cf,
            tail,
            tol=settings.tol if tol is None else tol,
            nmax=settings.nmax if nmax is None else nmax,
            floor_tol=settings.floor_tol,
        )
        return report.model_copy(update={"value": -report.value})

    def tail_ratio(
        self,
        op: JacobiOperator,
        eps: Energy,
        N: int,
        tail: TailStrategy | None = None,
        bm_depth: int | None = None,
        tol: float | None = None,
        nmax: int | None = None,
    ) -> complex:
        """
        Tail ratio r_N = G_{N+1,0}/G_{N,0}.

        Args:
            op: Jacobi operator.
            eps: Energy.
            N: Ratio index (>= 0).
            tail: Tail strategy; the configured command-line tail if omitted.
            bm_depth: Bauer-Muir levels applied before evaluation.
            tol: Relative Cauchy tolerance.
            nmax: Maximum depth.

        Returns:
            The converged ratio.

        Raises:
            NonConvergenceError: If the fraction does not converge to ``tol``.
        """
        report = self.ratio_report(op, eps, N, tail, bm_depth, tol, nmax)
        if not report.converged:
            raise NonConvergenceError(
                f"Tail ratio r_{N} not converged at eps={_as_complex(eps)}",
                report.value,
                report.n_used,
            )
        return report.value

    def miller_ratio(
        self, op: JacobiOperator, eps: Energy, N: int, depth: int | None = None
    ) -> complex:
        """
        Ratio r_N of the minimal solution by backward recurrence from N + depth.

        Starts from f_{M+1} = 0, f_M = 1 and rescales whenever the running
        values grow past 1e100.
        """
        e = _as_complex(eps)
        op.check_energy(e)
        if op.is_diagonal:
            return 0j
        M = N + (self._settings.miller_depth if depth is None else depth)
        idx = np.arange(M + 1)
        d, o = op.diag(idx, e), op.offdiag(idx, e)
        f_next, f = 0j, 1.0 + 0j
        for i in range(M, N, -1):
            f_next, f = f, -(d[i] * f + o[i] * f_next) / o[i - 1]
            scale = abs(f)
            if scale > _RESCALE:
                f_next, f = f_next / scale, f / scale
        return complex(f_next / f)

    def g00(
        self,
        op: JacobiOperator,
        eps: Energy,
        tail: TailStrategy | None = None,
        bm_depth: int | None = None,
        tol: float | None = None,
    ) -> complex:
        """
        Method B G00 = 1 / (J00 + J01 r_0) without building a matrix.

        Raises:
            PoleError: If the denominator vanishes.
        """
        e = _as_complex(eps)
        r0 = self.tail_ratio(op, e, 0, tail, bm_depth, tol)
        denominator = complex(op.diag(0, e)) + complex(op.offdiag(0, e)) * r0
        if denominator == 0:
            raise PoleError(e)
        return 1 / denominator

    # ------------------------------------------------------------------
    # Method B
    # ------------------------------------------------------------------

    def truncated_bands(
        self, op: JacobiOperator, eps: Energy, N: int, ratio: complex
    ) -> tuple[ComplexArray, ComplexArray]:
        """Diagonal and off-diagonal of (G^(N))^-1; only the last diagonal entry is modified."""
        if N < 1:
            raise DomainError(f"truncation must be >= 1, got {N}", "truncated_inverse")
        e = _as_complex(eps)
        diag, off = op.block(e, N)
        diag = diag.copy()
        diag[N - 1] = diag[N - 1] + off[N - 1] * ratio
        return diag, off[: N - 1].copy()

    def truncated_inverse(
        self, op: JacobiOperator, eps: Energy, N: int, ratio: complex
    ) -> ComplexArray:
        """
        (G^(N))^-1 as a dense N x N matrix.

        Equal to the raw J block except at (N-1, N-1), which becomes
        J_{N-1,N-1} + J_{N-1,N} * ratio with ratio = G_{N,0}/G_{N-1,0}.
        """
        diag, off = self.truncated_bands(op, eps, N, ratio)
        return np.asarray(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1), dtype=np.complex128)

    def solve_tridiagonal(self, diag: ComplexArray, off: ComplexArray) -> ComplexArray:
        """
        Inverse of a symmetric tridiagonal matrix.

        Forward elimination and back substitution run on all columns of the
        identity at once. A pivot smaller than pivot_tol times its row norm
        switches to a dense partial-pivot LU.

        Raises:
            SingularMatrixError: If the LU factorization also breaks down.
        """
        N = len(diag)
        pivot_tol = self._settings.pivot_tol
        upper = np.zeros(N, dtype=np.complex128)
        rhs = np.eye(N, dtype=np.complex128)
        for i in range(N):
            lower = off[i - 1] if i > 0 else 0j
            pivot = diag[i] - (lower * upper[i - 1] if i > 0 else 0j)
            row_norm = abs(diag[i]) + abs(lower) + (abs(off[i]) if i < N - 1 else 0.0)
            if abs(pivot) <= pivot_tol * row_norm:
                logger.warning(f"[Greens] Tiny pivot at row {i}, falling back to dense LU")
                return self._dense_inverse(diag, off)
            if i < N - 1:
                upper[i] = off[i] / pivot
            if i > 0:
                rhs[i] -= lower * rhs[i - 1]
            rhs[i] /= pivot
        for i in range(N - 2, -1, -1):
            rhs[i] -= upper[i] * rhs[i + 1]
        return rhs

    def _dense_inverse(self, diag: ComplexArray, off: ComplexArray) -> ComplexArray:
        matrix = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
        lu, piv = scipy.linalg.lu_factor(matrix, check_finite=True)
        pivots = np.abs(np.diag(lu))
        row_norms = np.sum(np.abs(matrix), axis=1)
        worst = int(np.argmin(pivots / row_norms))
        if pivots[worst] <= self._settings.pivot_tol * row_norms[worst]:
            raise SingularMatrixError(worst, float(pivots[worst]))
        return np.asarray(scipy.linalg.lu_solve((lu, piv), np.eye(len(diag))), dtype=np.complex128)

    def greens_matrix_B(
        self,
        op: JacobiOperator,
        eps: Energy,
        N: int | None = None,
        tail: TailStrategy | None = None,
        bm_depth: int | None = None,
        tol: float | None = None,
    ) -> GreensMatrix:
        """
        Truncated Green's matrix by the continued-fraction closure.

        Args:
            op: Jacobi operator.
            eps: Energy.
            N: Truncation size; the configured default if omitted.
            tail: Tail strategy for the ratio.
            bm_depth: Bauer-Muir levels.
            tol: Relative Cauchy tolerance of the ratio.

        Returns:
            Symmetric GreensMatrix with method B.

        Raises:
            NonConvergenceError: If the tail ratio does not converge.
            SingularMatrixError: At a resolvent pole.
        """
        size = self._settings.truncation if N is None else N
        energy = eps if isinstance(eps, EnergyPoint) else EnergyPoint(eps=complex(eps))
        report = self.ratio_report(op, energy.eps, size - 1, tail, bm_depth, tol)
        if not report.converged:
            raise NonConvergenceError(
                f"Tail ratio r_{size - 1} not converged at eps={energy.eps}",
                report.value,
                report.n_used,
            )
        diag, off = self.truncated_bands(op, energy.eps, size, report.value)
        raw = self.solve_tridiagonal(diag, off)
        asymmetry, _ = self._asymmetry(raw)
        values = 0.5 * (raw + raw.T)
        logger.info(
            f"[Greens] Method B N={size} at eps={energy.eps} (ratio depth {report.n_used})"
        )
        return GreensMatrix(
            values=values,
            ratio=report.value,
            energy=energy,
            method=Method.B,
            diagnostics={
                "n_used": report.n_used,
                "converged": report.converged,
                "tolerance": report.tolerance,
                "bm_depth": report.bm_depth,
                "asymmetry": asymmetry,
            },
        )

    # ------------------------------------------------------------------
    # Closed forms and Method A
    # ------------------------------------------------------------------

    def g00_coulomb_exact(self, model: CoulombModel, eps: Energy) -> complex:
        """Closed-form Coulomb G00 in scaled units."""
        settings = self._settings
        return CoulombOperator(model).exact_g00(
            _as_complex(eps), tol=settings.hyp_tol, nmax=settings.hyp_nmax
        )

    def g00_oscillator_exact(self, model: OscillatorModel, E: Energy) -> complex:
        """Closed-form oscillator G00."""
        settings = self._settings
        return OscillatorOperator(model).exact_g00(
            _as_complex(E), tol=settings.hyp_tol, nmax=settings.hyp_nmax
        )

    def working_precision(self, op: JacobiOperator, eps: Energy, N: int) -> int:
        """
        Decimal digits for the Method A recurrence.

        The forward recurrence amplifies errors by the dominant-to-minimal
        growth ratio per step, so 30 digits plus N log10 of that ratio are
        used, capped at 400.
        """
        e = _as_complex(eps)
        try:
            points = fixed_points(*op.limit_coefficients(e))
        except DomainError:
            return _BASE_DPS
        if points.attractive == 0:
            return _MAX_DPS
        growth = abs(points.repulsive) / abs(points.attractive)
        return int(min(_MAX_DPS, _BASE_DPS + N * max(0.0, float(np.log10(growth)))))

    def _method_a_raw(
        self, op: JacobiOperator, eps: complex, N: int, g00: complex | None, dps: int
    ) -> tuple[ComplexArray, complex]:
        with mpmath.workdps(dps):
            e = mpmath.mpc(eps)
            first = op.exact_g00_mp(e) if g00 is None else mpmath.mpc(g00)
            d = [op.diag_mp(i, e) for i in range(N)]
            o = [op.offdiag_mp(i, e) for i in range(N)]
            # column 0 forward to G_{N,0}, then row 0 by symmetry
            column = [first, (1 - d[0] * first) / o[0]]
            for i in range(1, N):
                column.append(-(o[i - 1] * column[i - 1] + d[i] * column[i]) / o[i])
            rows: list[list[Any]] = [list(column[:N])]
            if N > 1:
                rows.append([((1 if j == 0 else 0) - d[0] * rows[0][j]) / o[0] for j in range(N)])
            for i in range(1, N - 1):
                rows.append(
                    [
                        ((1 if i == j else 0) - o[i - 1] * rows[i - 1][j] - d[i] * rows[i][j])
                        / o[i]
                        for j in range(N)
                    ]
                )
            ratio = complex(column[N] / column[N - 1])
            values = np.array([[complex(x) for x in row] for row in rows], dtype=np.complex128)
            return values, ratio

    def recurrence_asymmetry(
        self,
        op: JacobiOperator,
        eps: Energy,
        N: int,
        g00: complex | None = None,
        dps: int | None = None,
    ) -> tuple[float, int]:
        """
        Relative asymmetry max|G - G^T| / max|G| of the raw Method A matrix.

        Returns:
            The asymmetry and the row where it is largest.
        """
        e = _as_complex(eps)
        precision = self.working_precision(op, e, N) if dps is None else dps
        raw, _ = self._method_a_raw(op, e, N, g00, precision)
        return self._asymmetry(raw)

    @staticmethod
    def _asymmetry(raw: ComplexArray) -> tuple[float, int]:
        gap = np.abs(raw - raw.T)
        scale = float(np.max(np.abs(raw)))
        if not np.isfinite(scale) or not np.all(np.isfinite(gap)):
            return float("inf"), int(np.argmax(~np.isfinite(gap).all(axis=1)))
        scale = scale or 1.0
        row = int(np.argmax(np.max(gap, axis=1)))
        return float(np.max(gap)) / scale, row

    def greens_matrix_A(
        self,
        op: JacobiOperator,
        eps: Energy,
        N: int | None = None,
        g00: complex | None = None,
        dps: int | None = None,
    ) -> GreensMatrix:
        """
        Green's matrix from a closed-form G00 and the forward recurrence.

        G10 = (1 - J00 G00)/J01, then the three-term recurrence fills column 0
        and the same recurrence, applied to every column, fills the rows.

        Args:
            op: Jacobi operator with a closed-form G00.
            eps: Energy.
            N: Truncation size.
            g00: Seed value; the operator's closed form at working precision if omitted.
            dps: Decimal digits; 15 reproduces double-precision behavior.

        Returns:
            Symmetrized GreensMatrix with method A.

        Raises:
            DomainError: If no seed is available.
            InstabilityError: If the raw asymmetry exceeds the instability guard.
        """
        size = self._settings.truncation if N is None else N
        energy = eps if isinstance(eps, EnergyPoint) else EnergyPoint(eps=complex(eps))
        if g00 is None and not op.has_exact_g00:
            raise DomainError(f"{op.name} has no closed-form G00 to seed Method A", "method_a")
        op.check_energy(energy.eps)

        precision = self.working_precision(op, energy.eps, size) if dps is None else dps
        if precision <= 15 and size > self._settings.method_a_max_n:
            logger.warning(
                f"[Greens] Method A at {precision} digits with N={size} exceeds the stable range"
            )
        logger.info(f"[Greens] Method A N={size} at eps={energy.eps} with {precision} digits")

        raw, ratio = self._method_a_raw(op, energy.eps, size, g00, precision)
        residual, row = self._asymmetry(raw)
        if residual > self._settings.instability_guard:
            raise InstabilityError(residual, row)
        values = 0.5 * (raw + raw.T)
        return GreensMatrix(
            values=values,
            ratio=ratio,
            energy=energy,
            method=Method.A,
            diagnostics={"dps": precision, "residual": residual, "asymmetry": residual},
        )

    # ------------------------------------------------------------------
    # Structure checks
    # ------------------------------------------------------------------

    @staticmethod
    def factorization_check(G: GreensMatrix | ComplexArray) -> float:
        """
        max |G_ij G_kl - G_il G_kj| / max|G|^2 over i, k <= min(j, l).

        Zero for the inverse of any Jacobi matrix.
        """
        values = G.values if isinstance(G, GreensMatrix) else np.asarray(G)
        scale = float(np.max(np.abs(values))) ** 2 or 1.0
        N = values.shape[0]
        worst = 0.0
        for j in range(N):
            for l in range(j, N):  # noqa: E741
                u, v = values[: j + 1, j], values[: j + 1, l]
                gap = np.abs(np.outer(u, v) - np.outer(v, u))
                worst = max(worst, float(np.max(gap)))
        return worst / scale

    @staticmethod
    def recurrence_residual(op: JacobiOperator, G: GreensMatrix) -> float:
        """
        Largest interior residual of the three-term recurrence.

        max |J_{i,i-1} G_{i-1,j} + J_ii G_ij + J_{i,i+1} G_{i+1,j} - delta_ij| over rows 1..N-2.
        """
        N = G.N
        if N < 3:
            return 0.0
        diag, off = op.block(G.energy.eps, N)
        values = G.values
        i = np.arange(1, N - 1)
        rows = (
            off[i - 1, None] * values[i - 1]
            + diag[i, None] * values[i]
            + off[i, None] * values[i + 1]
        )
        return float(np.max(np.abs(rows - np.eye(N)[i])))

    def resolvent_identity(self, op: JacobiOperator, G: GreensMatrix) -> float:
        """max |(G^(N))^-1 G - I| with the closure ratio stored in ``G``."""
        inverse = self.truncated_inverse(op, G.energy, G.N, G.ratio)
        return float(np.max(np.abs(inverse @ G.values - np.eye(G.N))))

    @staticmethod
    def dense_block_inverse(
        op: JacobiOperator, eps: Energy, N: int, extra: int = 60
    ) -> ComplexArray:
        """Top-left N x N block of the inverse of the raw (N + extra)-dimensional J block."""
        dense = op.dense(_as_complex(eps), N + extra)
        return np.asarray(scipy.linalg.inv(dense)[:N, :N], dtype=np.complex128)

    @staticmethod
    def max_deviation(first: ComplexArray, second: ComplexArray, floor: float = 1e-3) -> float:
        """
        Element-relative deviation max |A - B| / max(|B|, floor * max|B|).

        Entries far below the largest one are compared against the floor.
        """
        reference = np.abs(second)
        scale = np.maximum(reference, floor * float(np.max(reference)))
        return float(np.max(np.abs(first - second) / scale))
