"""Complex special functions and Gauss-Legendre rules.

Everything here is a pure function of its arguments. The hypergeometric
series and the Laguerre recurrence are vectorized with numpy; the gamma
function uses a fixed Lanczos coefficient set.
"""

import logging
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.exceptions import DomainError, NonConvergenceError, PoleError
from app.models.results import QuadratureRule

logger = logging.getLogger(__name__)

# Lanczos approximation, g = 7, nine terms
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)
_HALF_LOG_TWO_PI = 0.5 * np.log(2 * np.pi)

HYP_TOL = 1e-15
HYP_NMAX = 1_000_000
_HYP_FIRST_BLOCK = 64
_HYP_MAX_BLOCK = 65_536
_UNIT_CIRCLE_SLACK = 1e-12


def _is_non_positive_integer(z: complex) -> bool:
    return z.imag == 0 and z.real <= 0 and z.real == np.floor(z.real)


def _lanczos_log_gamma(z: complex) -> complex:
    """log Gamma(z) for Re z >= 0.5, on the branch continuous from the real axis."""
    z = z - 1
    x = _LANCZOS_COEFFS[0] + np.sum(_LANCZOS_COEFFS[1:] / (z + np.arange(1, 9)))
    t = z + _LANCZOS_G + 0.5
    return complex(_HALF_LOG_TWO_PI + (z + 0.5) * np.log(t) - t + np.log(x))


def log_gamma(z: complex) -> complex:
    """
    Principal-branch logarithm of Gamma(z).

    Args:
        z: Complex argument, not a non-positive integer.

    Returns:
        log Gamma(z) with imaginary part in (-pi, pi].

    Raises:
        PoleError: If z is 0, -1, -2, ...
        DomainError: If z is not finite.
    """
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise DomainError(f"log_gamma argument {z} is not finite", "log_gamma")
    if _is_non_positive_integer(z):
        raise PoleError(z)

    if z.real < 0.5:
        # Gamma(z) Gamma(1-z) = pi / sin(pi z)
        value = complex(
            np.log(np.pi) - np.log(np.sin(np.pi * np.complex128(z))) - _lanczos_log_gamma(1 - z)
        )
    else:
        value = _lanczos_log_gamma(z)
    return complex(value.real, float(np.angle(np.exp(1j * value.imag))))


def _gauss_sum(a: complex, b: complex, c: complex) -> complex:
    """2F1(a, b; c; 1) = Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b)), Re(c-a-b) > 0."""
    if _is_non_positive_integer(c - a) or _is_non_positive_integer(c - b):
        return 0j
    log_value = log_gamma(c) + log_gamma(c - a - b) - log_gamma(c - a) - log_gamma(c - b)
    return complex(np.exp(log_value))


def hyp2f1(
    a: complex,
    b: complex,
    c: complex,
    z: complex,
    tol: float = HYP_TOL,
    nmax: int = HYP_NMAX,
) -> complex:
    """
    Gauss hypergeometric function by its defining power series.

    The series is summed in growing numpy blocks with the term ratio
    (a+n)(b+n) z / ((c+n)(n+1)); it stops at the first term with
    |term| <= tol * |partial sum|. At z = 1 the Gauss summation formula is
    used instead.

    Args:
        a, b, c: Parameters; c must not be a non-positive integer.
        z: Argument with |z| < 1, or |z| = 1 when Re(c - a - b) > 0.
        tol: Relative size of the last accepted term.
        nmax: Maximum number of terms.

    Returns:
        2F1(a, b; c; z).

    Raises:
        DomainError: Outside the series' convergence region.
        NonConvergenceError: If nmax terms are exhausted.
    """
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if _is_non_positive_integer(c):
        raise DomainError(f"c = {c} is a non-positive integer", "hyp2f1")
    if z == 0:
        return 1.0 + 0.0j

    modulus = abs(z)
    if modulus > 1 + _UNIT_CIRCLE_SLACK:
        raise DomainError(f"|z| = {modulus:.6g} > 1 outside series region", "hyp2f1")
    if modulus >= 1 - _UNIT_CIRCLE_SLACK and (c - a - b).real <= 0:
        raise DomainError("|z| = 1 requires Re(c - a - b) > 0", "hyp2f1")
    if z == 1:
        return _gauss_sum(a, b, c)

    total = 1.0 + 0.0j
    term = 1.0 + 0.0j
    start = 0
    block = _HYP_FIRST_BLOCK
    while start < nmax:
        size = min(block, nmax - start)
        n = np.arange(start, start + size, dtype=np.float64)
        ratios = (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        terms = term * np.cumprod(ratios)
        partial = total + np.cumsum(terms)
        small = np.abs(terms) <= tol * np.abs(partial)
        if small.any():
            k = int(np.argmax(small))
            logger.debug(f"[SpecFun] hyp2f1 converged after {start + k + 1} terms")
            return complex(partial[k])
        term, total = complex(terms[-1]), complex(partial[-1])
        if not np.isfinite(total):
            raise NonConvergenceError("hyp2f1 series overflowed", total, start + size)
        start += size
        block = min(2 * block, _HYP_MAX_BLOCK)

    raise NonConvergenceError(f"hyp2f1 did not converge in {nmax} terms", total, nmax)


def laguerre(n: int, alpha: float, x: ArrayLike) -> NDArray[np.float64]:
    """
    Generalized Laguerre polynomial L_n^(alpha)(x) by upward recurrence.

    (k+1) L_{k+1} = (2k+1+alpha-x) L_k - (k+alpha) L_{k-1}
    """
    if n < 0:
        raise DomainError(f"Laguerre degree must be >= 0, got {n}", "laguerre")
    if alpha <= -1:
        raise DomainError(f"Laguerre alpha must exceed -1, got {alpha}", "laguerre")
    xs = np.asarray(x, dtype=np.float64)
    previous = np.ones_like(xs)
    if n == 0:
        return previous
    current = 1.0 + alpha - xs
    for k in range(1, n):
        following = ((2 * k + 1 + alpha - xs) * current - (k + alpha) * previous) / (k + 1)
        previous, current = current, following
    return current


def _legendre_and_derivative(
    order: int, x: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, order + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = order * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@lru_cache(maxsize=64)
def _gauss_legendre_arrays(order: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    i = np.arange(1, order + 1)
    x = np.cos(np.pi * (i - 0.25) / (order + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(order, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= 1e-15:
            break
    _, dp = _legendre_and_derivative(order, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    return tuple(x[::-1].tolist()), tuple(w[::-1].tolist())


def gauss_legendre(order: int) -> QuadratureRule:
    """
    Gauss-Legendre nodes and weights on (-1, 1).

    Nodes are the roots of P_order found by Newton iteration from the
    Chebyshev-like initial guesses cos(pi (i - 1/4) / (order + 1/2)).
    """
    if order < 1:
        raise DomainError(f"quadrature order must be >= 1, got {order}", "gauss_legendre")
    nodes, weights = _gauss_legendre_arrays(order)
    return QuadratureRule(nodes=list(nodes), weights=list(weights), order=order)
