"""This module contains the numerical kernel shared by every other module.

Special functions and their zeros, bracketed root finding, adaptive
quadrature, Chebyshev grids with their quadrature rules, and the dense
symmetric generalized eigensolver.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional

import numpy as np
from scipy import integrate, linalg, optimize, special
from scipy.interpolate import BarycentricInterpolator

from pyspl.consts import (BESSEL_MAX_ARG, BESSEL_MAX_ORDER, BESSEL_MAX_ZERO_INDEX,
                          RESIDUAL_TOL, SIGN_FIX_THRESHOLD)

logger = logging.getLogger(__name__)


class DomainError(ValueError):
    pass


class NumericalError(Exception):
    pass


class BracketError(NumericalError):
    pass


class NotPositiveDefinite(NumericalError):
    pass


def _check_bessel_range(order: float, x) -> None:
    if order < 0 or order > BESSEL_MAX_ORDER:
        raise DomainError(f"Bessel order {order} outside [0, {BESSEL_MAX_ORDER}]")
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0) or np.any(xs > BESSEL_MAX_ARG):
        raise DomainError(f"Bessel argument outside [0, {BESSEL_MAX_ARG}]")


def bessel_j(order: float, x):
    """Evaluate the Bessel function of the first kind.

    Args:
        order (float): Order in [0, 10]
        x (float | np.ndarray): Argument(s) in [0, 100]
    Returns:
        float | np.ndarray: J_order(x)
    Raises:
        DomainError: If the order or the argument is outside the supported range
    """
    _check_bessel_range(order, x)
    value = special.jv(order, x)
    if np.ndim(value) == 0:
        return float(value)
    return value


def bessel_zero(order: float, n: int) -> float:
    """Return the n-th positive zero j_{order,n} of J_order.

    Integer orders use the tabulated zeros of scipy; other orders are found
    by scanning J_order for sign changes and polishing each bracket.

    Args:
        order (float): Order in [0, 10]
        n (int): Zero index in [1, 10]
    Returns:
        float: The zero
    Raises:
        DomainError: If the order or the index is unsupported
        NumericalError: If the scan does not find enough sign changes
    """
    if n < 1 or n > BESSEL_MAX_ZERO_INDEX:
        raise DomainError(f"Zero index {n} outside [1, {BESSEL_MAX_ZERO_INDEX}]")
    _check_bessel_range(order, 0.0)
    return _bessel_zero(float(order), int(n))


@lru_cache(maxsize=4096)
def _bessel_zero(order: float, n: int) -> float:
    if float(order).is_integer():
        return float(special.jn_zeros(int(order), n)[-1])

    step = 0.25
    x_prev = 1e-3
    f_prev = special.jv(order, x_prev)
    found = 0
    while x_prev < BESSEL_MAX_ARG:
        x = x_prev + step
        f = special.jv(order, x)
        if f_prev * f < 0:
            found += 1
            if found == n:
                return bracketed_root(lambda t: special.jv(order, t), x_prev, x, tol=1e-14)
        x_prev, f_prev = x, f
    raise NumericalError(f"Could not bracket zero {n} of J_{order}")


def bracketed_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Find a root of a continuous function inside a sign-changing bracket.

    Args:
        f (Callable[[float], float]): Scalar function
        lo (float): Lower end of the bracket
        hi (float): Upper end of the bracket
        tol (float): Absolute bracket width at convergence
    Returns:
        float: The root
    Raises:
        BracketError: If f(lo) and f(hi) have the same sign
        NumericalError: If the iteration does not converge
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if f_lo * f_hi > 0:
        raise BracketError(f"No sign change on [{lo}, {hi}]")
    try:
        return optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)
    except RuntimeError as e:
        raise NumericalError(f"Root iteration failed on [{lo}, {hi}]: {str(e)}")


def adaptive_quad(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
                  endpoint_exponent: Optional[float] = None, levels: int = 40) -> float:
    """Integrate f over [a, b] to an absolute tolerance.

    When `endpoint_exponent` is given, f is assumed to behave like
    (x - a)**endpoint_exponent at the left end and the interval is
    subdivided geometrically toward a.

    Args:
        f (Callable[[float], float]): Integrand
        a (float): Left end
        b (float): Right end
        tol (float): Absolute error target
        endpoint_exponent (float): Optional exponent of the left-end behaviour
        levels (int): Number of geometric subdivision points
    Returns:
        float: Integral value
    Raises:
        NumericalError: If the estimated error does not meet the tolerance
    """
    points = None
    if endpoint_exponent is not None:
        points = a + (b - a) * 0.5 ** np.arange(1, levels + 1)
    result = integrate.quad(f, a, b, epsabs=tol, epsrel=0.0, limit=500, points=points, full_output=1)
    value, error = result[0], result[1]
    if len(result) > 3 or error > tol:
        message = result[3] if len(result) > 3 else "error estimate above tolerance"
        raise NumericalError(f"Quadrature did not converge on [{a}, {b}] (error {error:.2e}): {message}")
    return float(value)


class ChebGrid:
    """Chebyshev–Gauss–Lobatto points on [-1, 1] with differentiation matrices.

    Attributes:
        n (int): Number of points
        nodes (np.ndarray): Points cos(pi*j/(n-1)), strictly decreasing
        D (np.ndarray): First-derivative matrix
        D2 (np.ndarray): Second-derivative matrix
    """

    def __init__(self, n: int):
        if n < 2:
            raise DomainError(f"A Chebyshev grid needs at least 2 points, got {n}")
        self.n = n
        big_n = n - 1
        j = np.arange(n)
        self.nodes = np.sin(np.pi * (big_n - 2 * j) / (2 * big_n))

        c = np.ones(n)
        c[0] = c[-1] = 2.0
        c = c * (-1.0) ** j
        i_idx, j_idx = np.meshgrid(j, j, indexing="ij")
        # x_i - x_j via the product formula keeps full relative accuracy
        dx = 2.0 * np.sin(np.pi * (i_idx + j_idx) / (2 * big_n)) * np.sin(np.pi * (j_idx - i_idx) / (2 * big_n))
        np.fill_diagonal(dx, 1.0)
        D = np.outer(c, 1.0 / c) / dx
        np.fill_diagonal(D, 0.0)
        D = D - np.diag(D.sum(axis=1))
        self.D = D
        self.D2 = D @ D

    def interpolation_matrix(self, x) -> np.ndarray:
        """Matrix mapping nodal values to the interpolant at points x."""
        return interpolation_matrix(self.n, np.atleast_1d(np.asarray(x, dtype=float)))


@lru_cache(maxsize=64)
def cheb_grid(n: int) -> ChebGrid:
    return ChebGrid(n)


def interpolation_matrix(n: int, x: np.ndarray) -> np.ndarray:
    grid = cheb_grid(n)
    return BarycentricInterpolator(grid.nodes, np.eye(n))(x)


@lru_cache(maxsize=64)
def clenshaw_curtis(n: int):
    """Clenshaw–Curtis nodes (decreasing, Chebyshev–Lobatto) and weights on [-1, 1]."""
    big_n = n - 1
    theta = np.pi * np.arange(n) / big_n
    nodes = np.cos(theta)
    weights = np.zeros(n)
    interior = np.arange(1, big_n)
    v = np.ones(big_n - 1)
    if big_n % 2 == 0:
        weights[0] = weights[-1] = 1.0 / (big_n ** 2 - 1)
        for k in range(1, big_n // 2):
            v -= 2.0 * np.cos(2 * k * theta[interior]) / (4 * k ** 2 - 1)
        v -= np.cos(big_n * theta[interior]) / (big_n ** 2 - 1)
    else:
        weights[0] = weights[-1] = 1.0 / big_n ** 2
        for k in range(1, (big_n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[interior]) / (4 * k ** 2 - 1)
    weights[interior] = 2.0 * v / big_n
    return nodes, weights


@lru_cache(maxsize=64)
def gauss_legendre(m: int):
    return np.polynomial.legendre.leggauss(m)


@dataclass
class EigenPair:
    """One eigenpair of a symmetric definite pencil.

    Attributes:
        value (float): Eigenvalue
        vector (np.ndarray): B-normalized eigenvector
        residual (float): ||A v - value B v|| / ||v||
    """
    value: float
    vector: np.ndarray
    residual: float

    @property
    def accepted(self) -> bool:
        return self.residual < RESIDUAL_TOL * (1.0 + abs(self.value))


def fix_sign(vector: np.ndarray) -> np.ndarray:
    """Flip the vector so that its first entry of magnitude above threshold is positive."""
    big = np.flatnonzero(np.abs(vector) > SIGN_FIX_THRESHOLD)
    if len(big) and vector[big[0]] < 0:
        return -vector
    return vector


def sym_generalized_eigs(A: np.ndarray, B: np.ndarray, count: int) -> List[EigenPair]:
    """Compute the smallest eigenpairs of A v = lambda B v.

    Args:
        A (np.ndarray): Symmetric matrix
        B (np.ndarray): Symmetric positive definite matrix
        count (int): Number of eigenpairs
    Returns:
        List[EigenPair]: Pairs in ascending order with B-orthonormal vectors
    Raises:
        NotPositiveDefinite: If the Cholesky factorization of B fails
    """
    size = A.shape[0]
    count = min(count, size)
    try:
        linalg.cholesky(B, lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"Mass matrix is not positive definite: {str(e)}")
    try:
        values, vectors = linalg.eigh(A, B, subset_by_index=[0, count - 1], check_finite=False)
    except linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"Generalized eigensolve failed: {str(e)}")

    pairs = []
    for k in range(count):
        v = fix_sign(vectors[:, k])
        r = A @ v - values[k] * (B @ v)
        residual = float(np.linalg.norm(r) / np.linalg.norm(v))
        pair = EigenPair(float(values[k]), v, residual)
        if not pair.accepted:
            logger.warning(f"Eigenpair {k} residual {residual:.2e} above threshold")
        pairs.append(pair)
    logger.debug(f"Solved pencil of size {size}, {count} pairs, lowest {pairs[0].value:.10g}")
    return pairs
