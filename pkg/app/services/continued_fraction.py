"""Continued-fraction kernel.

Fractions are written b0 + a1/(b1 + a2/(b2 + ...)). Approximants are
evaluated tail-first so the tail value w enters explicitly:
S_n(w) = b0 + a1/(b1 + ... + a_n/(b_n + w)).
"""

import logging
import math
import threading
from collections.abc import Callable, Iterator, Sequence
from itertools import pairwise
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, model_validator

from app.constants import FIXED_POINT_TIE, TailKind
from app.core.exceptions import (
    CoefficientError,
    DegenerateRootsError,
    DivisionByZeroError,
    DomainError,
    TransformUndefinedError,
)
from app.models.results import EvaluationReport

logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]
# (start, count) -> (a_start..a_{start+count-1}, b_start..b_{start+count-1}), start >= 1
CoefficientSource = Callable[[int, int], tuple[ComplexArray, ComplexArray]]
TailSequence = complex | Sequence[complex] | Callable[[NDArray[np.int64]], ComplexArray]

DEFAULT_TOL = 1e-14
DEFAULT_NMAX = 100_000
_LINEAR_SCHEDULE_END = 128
_SCHEDULE_GROWTH = 1.25
_INITIAL_CACHE = 64

DEFAULT_FLOOR_TOL = 1e-8
ACCELERATION_LEVELS = (8, 4, 2)
_STALL_GROWTH = 4
_STALL_MIN_DEPTH = 256
_TAIL_MATCH = 1e-8
_LIMIT_CHECK_DEPTHS = (1_000, 10_000)
_LIMIT_NOISE = 1e-12


class TailStrategy(BaseModel):
    """How the tail of a fraction is closed."""

    model_config = ConfigDict(frozen=True)

    kind: TailKind
    w: complex | None = None

    @model_validator(mode="after")
    def explicit_needs_value(self) -> "TailStrategy":
        if self.kind == TailKind.EXPLICIT and self.w is None:
            raise ValueError("explicit tails need a value")
        return self

    @classmethod
    def zero(cls) -> "TailStrategy":
        return cls(kind=TailKind.ZERO)

    @classmethod
    def attractive(cls) -> "TailStrategy":
        return cls(kind=TailKind.ATTRACTIVE)

    @classmethod
    def repulsive(cls) -> "TailStrategy":
        return cls(kind=TailKind.REPULSIVE)

    @classmethod
    def explicit(cls, w: complex) -> "TailStrategy":
        return cls(kind=TailKind.EXPLICIT, w=complex(w))


class FixedPoints(NamedTuple):
    """Roots of w^2 + b w - a = 0, smaller modulus first."""

    attractive: complex
    repulsive: complex
    degenerate: bool


def fixed_points(a: complex, b: complex) -> FixedPoints:
    """
    Fixed points of the linear fractional map w -> a / (b + w).

    Args:
        a: Limit of the partial numerators.
        b: Limit of the partial denominators.

    Returns:
        FixedPoints with the attractive (smaller modulus) root first. The
        degenerate flag is set for a double root or for equal moduli.

    Raises:
        DomainError: If a = b = 0.
    """
    a, b = complex(a), complex(b)
    if a == 0 and b == 0:
        raise DomainError("fixed points undefined for a = b = 0", "fixed_points")

    disc = b * b + 4 * a
    root = complex(np.sqrt(np.complex128(disc)))
    if (b.conjugate() * root).real < 0:
        root = -root
    large = -(b + root) / 2
    small = -a / large if large != 0 else 0j
    if abs(small) > abs(large):
        small, large = large, small

    scale = max(abs(small), abs(large))
    degenerate = abs(disc) <= 1e-14 * (abs(b) ** 2 + abs(a)) or (
        abs(large) - abs(small) <= FIXED_POINT_TIE * scale
    )
    return FixedPoints(small, large, degenerate)


class ContinuedFraction:
    """
    A fraction b0 + K(a_n / b_n) with lazily generated coefficients.

    Coefficients are produced in blocks by ``source`` and cached; the cache
    grows by doubling so repeated evaluation at increasing depth costs
    amortized linear time.
    """

    def __init__(
        self,
        b0: complex,
        source: CoefficientSource,
        limits: tuple[complex, complex] | None = None,
        label: str = "cf",
    ) -> None:
        """
        Initialize the fraction.

        Args:
            b0: Leading term.
            source: Block generator of (a_n, b_n) for n >= 1.
            limits: Limits (a, b) of the coefficients, if the fraction is
                limit 1-periodic.
            label: Name used in log messages.
        """
        self.b0 = complex(b0)
        self.limits = (complex(limits[0]), complex(limits[1])) if limits else None
        self.label = label
        self._source = source
        self._a: ComplexArray = np.empty(0, dtype=np.complex128)
        self._b: ComplexArray = np.empty(0, dtype=np.complex128)
        self._lock = threading.Lock()

    @classmethod
    def constant(cls, a: complex, b: complex, b0: complex = 0.0) -> "ContinuedFraction":
        """Fraction with a_n = a and b_n = b for every n."""

        def source(start: int, count: int) -> tuple[ComplexArray, ComplexArray]:
            return (
                np.full(count, complex(a), dtype=np.complex128),
                np.full(count, complex(b), dtype=np.complex128),
            )

        return cls(b0, source, limits=(a, b), label=f"const({a},{b})")

    @classmethod
    def from_arrays(
        cls,
        a: Sequence[complex],
        b: Sequence[complex],
        b0: complex = 0.0,
        limits: tuple[complex, complex] | None = None,
    ) -> "ContinuedFraction":
        """Finite coefficient list a_1..a_m, b_1..b_m."""
        a_arr = np.asarray(a, dtype=np.complex128)
        b_arr = np.asarray(b, dtype=np.complex128)

        def source(start: int, count: int) -> tuple[ComplexArray, ComplexArray]:
            stop = start - 1 + count
            if stop > len(a_arr):
                raise DomainError(f"only {len(a_arr)} coefficients available", "from_arrays")
            return a_arr[start - 1 : stop], b_arr[start - 1 : stop]

        return cls(b0, source, limits=limits, label="array")

    def coefficients(self, n: int) -> tuple[ComplexArray, ComplexArray]:
        """
        Arrays (a_1..a_n, b_1..b_n).

        Raises:
            CoefficientError: If some a_k with k <= n is zero.
            DomainError: If a finite fraction has fewer than n coefficients.
        """
        with self._lock:
            have = len(self._a)
            if n > have:
                want = max(n, 2 * have, _INITIAL_CACHE)
                try:
                    a_new, b_new = self._source(have + 1, want - have)
                except (TransformUndefinedError, DomainError) as exc:
                    # only indices up to n count as queried
                    if isinstance(exc, TransformUndefinedError) and exc.index <= n:
                        raise
                    a_new, b_new = self._source(have + 1, n - have)
                zero = np.flatnonzero(a_new == 0)
                if zero.size:
                    # keep the valid prefix so the error index is reproducible
                    cut = int(zero[0])
                    self._a = np.concatenate([self._a, a_new[:cut]])
                    self._b = np.concatenate([self._b, b_new[:cut]])
                else:
                    self._a = np.concatenate([self._a, a_new])
                    self._b = np.concatenate([self._b, b_new])
            if n > len(self._a):
                raise CoefficientError(len(self._a) + 1)
            return self._a[:n], self._b[:n]

    def coeff(self, n: int) -> tuple[complex, complex]:
        """Single pair (a_n, b_n), n >= 1."""
        a, b = self.coefficients(n)
        return complex(a[n - 1]), complex(b[n - 1])

    def check_limits(self, depths: Sequence[int] = _LIMIT_CHECK_DEPTHS) -> list[float]:
        """
        Spot-check that the coefficients approach the declared limits.

        Returns:
            max(|a_n - a|, |b_n - b|) at each depth, relative to the larger
            limit (at least 1).

        Raises:
            DomainError: If no limits are declared, or if the deviation does
                not shrink between successive depths while above 1e-12.
        """
        if self.limits is None:
            raise DomainError(f"{self.label} declares no limits", "check_limits")
        a_lim, b_lim = self.limits
        scale = max(abs(a_lim), abs(b_lim), 1.0)
        deviations = []
        for n in depths:
            a_n, b_n = self.coeff(n)
            deviations.append(max(abs(a_n - a_lim), abs(b_n - b_lim)) / scale)
        for (n0, d0), (n1, d1) in pairwise(zip(depths, deviations, strict=True)):
            if d1 > _LIMIT_NOISE and d1 >= d0:
                raise DomainError(
                    f"{self.label} coefficients do not approach their limits: "
                    f"deviation {d0:.3g} at depth {n0}, {d1:.3g} at depth {n1}",
                    "check_limits",
                )
        logger.debug(f"[CF] {self.label} limit deviations {deviations} at depths {list(depths)}")
        return deviations

    def tail_value(self, tail: TailStrategy) -> complex:
        """
        Resolve a tail strategy to a number.

        Raises:
            DomainError: If a fixed-point tail is requested without limits.
            DegenerateRootsError: If the fixed points cannot be ordered.
        """
        if tail.kind == TailKind.ZERO:
            return 0j
        if tail.kind == TailKind.EXPLICIT:
            return complex(tail.w)  # type: ignore[arg-type]
        if self.limits is None:
            raise DomainError(f"{self.label} has no limits for a fixed-point tail", "tail_value")
        points = fixed_points(*self.limits)
        if points.degenerate:
            raise DegenerateRootsError((points.attractive, points.repulsive))
        return points.attractive if tail.kind == TailKind.ATTRACTIVE else points.repulsive


def approximant(cf: ContinuedFraction, n: int, w: complex) -> complex:
    """
    Modified approximant S_n(w) by backward recursion from depth n.

    Raises:
        CoefficientError: If a_k = 0 for some k <= n.
        DivisionByZeroError: If b_k + (running tail) is exactly zero at depth k.
    """
    if n < 0:
        raise DomainError(f"approximant depth must be >= 0, got {n}", "approximant")
    if n == 0:
        return cf.b0 + complex(w)
    a, b = cf.coefficients(n)
    t = complex(w)
    depth = n
    for ak, bk in zip(reversed(a.tolist()), reversed(b.tolist()), strict=True):
        denominator = bk + t
        if denominator == 0:
            raise DivisionByZeroError(depth)
        t = ak / denominator
        depth -= 1
    return cf.b0 + t


def _depth_schedule(nmax: int) -> Iterator[int]:
    n = 2
    last = 1
    while n <= nmax:
        yield n
        last = n
        n = n + 1 if n < _LINEAR_SCHEDULE_END else int(n * _SCHEDULE_GROWTH)
    if last < nmax:
        yield nmax


def _relative_gap(current: complex, before: complex) -> float:
    if current == 0:
        return 0.0 if before == 0 else math.inf
    return abs(current - before) / abs(current)


def _evaluate_plain(
    cf: ContinuedFraction,
    w: complex,
    tol: float,
    nmax: int,
    stride: int,
    floor_tol: float,
) -> EvaluationReport:
    history: list[tuple[int, complex]] = []
    previous_n, previous = 1, approximant(cf, 1, w)
    current, n_used = previous, 1
    last_gap = math.inf
    best_gap, best_n, best_value = math.inf, 1, previous
    anchor_gap, anchor_n = math.inf, 1
    for check, n in enumerate(_depth_schedule(nmax), start=1):
        current = approximant(cf, n, w)
        before = previous if previous_n == n - 1 else approximant(cf, n - 1, w)
        previous_n, previous, n_used = n, current, n
        if stride and check % stride == 0:
            history.append((n, current))

        gap = _relative_gap(current, before)
        # the gap must hold at two consecutive checked depths
        pair, last_gap = max(gap, last_gap), gap
        if pair <= tol:
            logger.debug(f"[CF] {cf.label} converged at depth {n}")
            return EvaluationReport(
                value=current, n_used=n, converged=True, history=history, tolerance=pair
            )
        if pair < best_gap:
            best_gap, best_n, best_value = pair, n, current
        if pair <= 0.5 * anchor_gap:
            anchor_gap, anchor_n = pair, n
        elif anchor_gap <= floor_tol and n >= max(_STALL_MIN_DEPTH, _STALL_GROWTH * anchor_n):
            # no halving of the gap over a fourfold depth: rounding floor reached
            logger.info(
                f"[CF] {cf.label} stalled at relative gap {best_gap:.2e} "
                f"(depth {best_n}, requested {tol:.0e})"
            )
            return EvaluationReport(
                value=best_value,
                n_used=best_n,
                converged=True,
                history=history,
                tolerance=best_gap,
            )

    if best_gap <= floor_tol:
        logger.info(f"[CF] {cf.label} reached relative gap {best_gap:.2e} at depth {best_n}")
        return EvaluationReport(
            value=best_value, n_used=best_n, converged=True, history=history, tolerance=best_gap
        )
    logger.info(f"[CF] {cf.label} not converged within depth {nmax}")
    return EvaluationReport(value=current, n_used=n_used, converged=False, history=history)


def _acceleration_tail(cf: ContinuedFraction, w: complex) -> complex | None:
    if cf.limits is None or w == 0:
        return None
    try:
        points = fixed_points(*cf.limits)
    except DomainError:
        return None
    for root in (points.attractive, points.repulsive):
        if abs(w - root) <= _TAIL_MATCH * max(abs(root), 1.0):
            return root
    return None


def evaluate(
    cf: ContinuedFraction,
    tail: TailStrategy,
    tol: float = DEFAULT_TOL,
    nmax: int = DEFAULT_NMAX,
    stride: int = 0,
    floor_tol: float = DEFAULT_FLOOR_TOL,
    accelerate: bool = True,
) -> EvaluationReport:
    """
    Evaluate a fraction to a relative Cauchy tolerance.

    Depth grows one at a time up to 128 and geometrically afterwards. At each
    checked depth n the relative gap |S_n(w) - S_{n-1}(w)| / |S_n(w)| is
    measured, and the fraction counts as converged once the gap is within
    ``tol`` at two consecutive checked depths.

    Near the real scattering axis the approximants converge only by a power
    law and level off at a rounding floor above 1e-14. When the gap has
    dropped below ``floor_tol`` and then fails to halve while the depth grows
    fourfold, or when ``nmax`` is spent with the gap below ``floor_tol``, the
    smallest gap seen is accepted and reported as ``tolerance``. If the plain
    fraction misses ``tol`` and w is one of the fixed points, Bauer-Muir
    transforms with that tail are tried at 8, 4 and 2 levels, and the report
    with the smallest tolerance wins.

    Non-convergence is reported through ``converged=False``, not raised.

    Args:
        cf: The fraction.
        tail: Tail strategy, resolved once to a number w.
        tol: Relative tolerance.
        nmax: Maximum depth.
        stride: Record every stride-th checked depth in the history (0: none).
        floor_tol: Largest gap accepted when the approximants stall.
        accelerate: Allow the automatic Bauer-Muir retry.

    Returns:
        EvaluationReport with the accepted approximant; ``bm_depth`` counts
        the Bauer-Muir levels added here.
    """
    if tol <= 0:
        raise DomainError("tol must be positive", "evaluate")
    if floor_tol <= 0:
        raise DomainError("floor_tol must be positive", "evaluate")
    if nmax < 2:
        raise DomainError("nmax must be at least 2", "evaluate")

    w = cf.tail_value(tail)
    if cf.limits is not None and logger.isEnabledFor(logging.DEBUG):
        depths = [n for n in _LIMIT_CHECK_DEPTHS if n <= nmax]
        if len(depths) > 1:
            cf.check_limits(depths)

    report = _evaluate_plain(cf, w, tol, nmax, stride, floor_tol)
    strict = report.converged and report.tolerance is not None and report.tolerance <= tol
    target = _acceleration_tail(cf, w) if accelerate and not strict else None
    if target is None:
        return report

    best = report if report.converged else None
    for level in ACCELERATION_LEVELS:
        try:
            accelerated = bauer_muir_iterated(cf, TailStrategy.explicit(target), level)
            attempt = _evaluate_plain(accelerated, target, tol, nmax, stride, floor_tol)
        except (TransformUndefinedError, DivisionByZeroError) as exc:
            logger.warning(f"[CF] {cf.label}: {level} Bauer-Muir levels unavailable: {exc}")
            continue
        attempt = attempt.model_copy(update={"bm_depth": level})
        if not attempt.converged or attempt.tolerance is None:
            continue
        if attempt.tolerance <= tol:
            return attempt
        if best is None or best.tolerance is None or attempt.tolerance < best.tolerance:
            best = attempt
    if best is not None and best.bm_depth:
        logger.info(f"[CF] {cf.label} accepted with {best.bm_depth} Bauer-Muir levels")
    return best if best is not None else report


def _tail_array(w: TailSequence, count: int) -> ComplexArray:
    if callable(w):
        return np.asarray(w(np.arange(count)), dtype=np.complex128)
    if isinstance(w, complex | float | int):
        return np.full(count, complex(w), dtype=np.complex128)
    values = np.asarray(w, dtype=np.complex128)
    if len(values) < count:
        raise DomainError(f"tail sequence has {len(values)} entries, {count} needed", "bauer_muir")
    return values[:count]


def bauer_muir(cf: ContinuedFraction, w: TailSequence) -> ContinuedFraction:
    """
    Bauer-Muir transform of ``cf`` with respect to the tail sequence w_n.

    The classical approximants of the result equal the modified approximants
    S_n(w_n) of the input. With lambda_i = a_i - w_{i-1}(b_i + w_i) and
    q_i = lambda_{i+1} / lambda_i the new coefficients are
    d0 = b0 + w0, c1 = lambda_1, d1 = b1 + w1,
    c_i = a_{i-1} q_{i-1}, d_i = b_i + w_i - w_{i-2} q_{i-1}  (i >= 2).

    Args:
        cf: Input fraction.
        w: Constant, finite sequence, or vectorized callable n -> w_n (n >= 0).

    Returns:
        Transformed fraction; coefficients are generated lazily.

    Raises:
        TransformUndefinedError: When lambda_i = 0 at a queried index.
    """

    def source(start: int, count: int) -> tuple[ComplexArray, ComplexArray]:
        last = start + count - 1
        a, b = cf.coefficients(last)
        wv = _tail_array(w, last + 1)
        lam = a - wv[:-1] * (b + wv[1:])
        zero = np.flatnonzero(lam == 0)
        if zero.size:
            raise TransformUndefinedError(int(zero[0]) + 1)
        c = np.empty(last, dtype=np.complex128)
        d = np.empty(last, dtype=np.complex128)
        c[0] = lam[0]
        d[0] = b[0] + wv[1]
        if last >= 2:
            q = lam[1:] / lam[:-1]
            c[1:] = a[:-1] * q
            d[1:] = b[1:] + wv[2:] - wv[:-2] * q
        return c[start - 1 :], d[start - 1 :]

    w0 = complex(_tail_array(w, 1)[0])
    return ContinuedFraction(cf.b0 + w0, source, limits=cf.limits, label=f"bm({cf.label})")


def bauer_muir_iterated(
    cf: ContinuedFraction, tail_for_each_level: TailStrategy, depth: int
) -> ContinuedFraction:
    """
    Apply ``depth`` Bauer-Muir transforms, each with the constant tail of its level.

    A constant tail leaves the coefficient limits (a, b) unchanged, so every
    level resolves the same fixed point.
    """
    if depth < 0:
        raise DomainError(f"Bauer-Muir depth must be >= 0, got {depth}", "bauer_muir_iterated")
    current = cf
    for _ in range(depth):
        current = bauer_muir(current, current.tail_value(tail_for_each_level))
    return current
