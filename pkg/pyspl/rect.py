"""This module contains the closed-form spectral data of the rectangle
(0, alpha*pi) x (0, pi) and the analysis of its (2,2) nodal cross.
"""

from dataclasses import dataclass
from fractions import Fraction
import logging
import math
from typing import List, Optional, Tuple, Union

import numpy as np

from pyspl.boundary import BoundaryField
from pyspl.consts import DEFAULT_ARC_SAMPLES
from pyspl.numerics import BracketError, DomainError, bracketed_root
from pyspl.partition import InterfaceArc, Partition, build_rect_partition

logger = logging.getLogger(__name__)

RATIONAL_TOL = 1e-12

AlphaSquared = Optional[Union[Fraction, str, int]]


def _exact_alpha_squared(alpha: float, alpha_squared: AlphaSquared) -> Optional[Fraction]:
    if alpha_squared is not None:
        return Fraction(alpha_squared)
    if isinstance(alpha, (int, Fraction)):
        return Fraction(alpha) ** 2
    return None


def _check_mode(m: int, n: int, alpha: float) -> None:
    if m < 1 or n < 1:
        raise DomainError(f"Mode indices must be positive, got ({m}, {n})")
    if alpha <= 0:
        raise DomainError(f"Aspect ratio must be positive, got {alpha}")


@dataclass(frozen=True)
class RectMode:
    """The Dirichlet eigenfunction sin(m x / alpha) sin(n y).

    Attributes:
        m (int): Horizontal index
        n (int): Vertical index
        alpha (float): Aspect ratio
    """
    m: int
    n: int
    alpha: float

    @property
    def eigenvalue(self) -> float:
        return rect_eigenvalue(self.m, self.n, self.alpha)

    def __call__(self, x, y):
        return np.sin(self.m * np.asarray(x) / self.alpha) * np.sin(self.n * np.asarray(y))

    def gradient(self, x, y) -> Tuple[np.ndarray, np.ndarray]:
        x, y = np.asarray(x), np.asarray(y)
        k = self.m / self.alpha
        return k * np.cos(k * x) * np.sin(self.n * y), self.n * np.sin(k * x) * np.cos(self.n * y)


def rect_eigenvalue(m: int, n: int, alpha: float) -> float:
    """lambda_{m,n} = (m/alpha)^2 + n^2."""
    _check_mode(m, n, float(alpha))
    return (m / float(alpha)) ** 2 + n ** 2


def _mode_keys(m: int, n: int, alpha: float, alpha_squared: AlphaSquared):
    """Enumerate every mode whose eigenvalue can tie with or undercut lambda_{m,n}.

    Yields (m', n', compare) where compare is negative, zero or positive as
    lambda_{m',n'} is below, equal to or above lambda_{m,n}.
    """
    exact = _exact_alpha_squared(alpha, alpha_squared)
    lam = rect_eigenvalue(m, n, alpha)
    m_max = math.ceil(alpha * math.sqrt(lam)) + 2
    n_max = math.ceil(math.sqrt(lam)) + 2
    if exact is not None:
        p, q = exact.numerator, exact.denominator
        # lambda = (m^2 q + n^2 p) / p
        target = m * m * q + n * n * p
        for i in range(1, m_max + 1):
            for j in range(1, n_max + 1):
                yield i, j, (i * i * q + j * j * p) - target
    else:
        for i in range(1, m_max + 1):
            for j in range(1, n_max + 1):
                diff = rect_eigenvalue(i, j, alpha) - lam
                yield i, j, 0 if abs(diff) <= RATIONAL_TOL * lam else diff


def rect_spectral_position(m: int, n: int, alpha: float, alpha_squared: AlphaSquared = None) -> Tuple[int, int]:
    """Position of lambda_{m,n} in the Dirichlet spectrum of the rectangle.

    Comparisons are exact when alpha^2 is rational (given as `alpha_squared`,
    or alpha passed as an int or Fraction) and use a relative tolerance of
    1e-12 otherwise.

    Args:
        m (int): Horizontal index
        n (int): Vertical index
        alpha (float): Aspect ratio
        alpha_squared: Optional exact alpha^2
    Returns:
        Tuple[int, int]: Smallest position of the eigenvalue and its multiplicity
    """
    _check_mode(m, n, float(alpha))
    below = equal = 0
    for _, _, cmp in _mode_keys(m, n, float(alpha), alpha_squared):
        if cmp < 0:
            below += 1
        elif cmp == 0:
            equal += 1
    return below + 1, equal


def degenerate_pairs(alpha: float, alpha_squared: AlphaSquared = None,
                     m: int = 2, n: int = 2) -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
    """Modes sharing the eigenvalue of (m, n), paired with (m, n)."""
    pairs = []
    for i, j, cmp in _mode_keys(m, n, float(alpha), alpha_squared):
        if cmp == 0 and (i, j) != (m, n):
            pairs.append(((m, n), (i, j)))
    return pairs


def courant_sharp_22(alpha: float, alpha_squared: AlphaSquared = None) -> bool:
    """Whether the nodal cross of psi_{2,2} is a minimal 4-partition: 3/5 <= alpha^2 <= 5/3."""
    if alpha <= 0:
        raise DomainError(f"Aspect ratio must be positive, got {alpha}")
    exact = _exact_alpha_squared(alpha, alpha_squared)
    if exact is not None:
        return Fraction(3, 5) <= exact <= Fraction(5, 3)
    a2 = float(alpha) ** 2
    return 0.6 - RATIONAL_TOL <= a2 <= 5.0 / 3.0 + RATIONAL_TOL


@dataclass(frozen=True)
class GammaPair:
    """Solution of the matching system of the (2,2) cross.

    Attributes:
        alpha (float): Aspect ratio
        gamma1 (float): Horizontal frequency in (3/alpha, 4/alpha)
        gamma2 (float): Vertical frequency in (1, 2)
        sigma (float): Magnitude of the negative DtN eigenvalue
    """
    alpha: float
    gamma1: float
    gamma2: float
    sigma: float

    @property
    def constraint_residual(self) -> float:
        return abs(self.gamma1 ** 2 + self.gamma2 ** 2 - rect_eigenvalue(2, 2, self.alpha))

    @property
    def matching_residual(self) -> float:
        return abs(_cot_term(self.gamma1, self.alpha * math.pi / 2) - _cot_term(self.gamma2, math.pi / 2))


def _cot_term(g: float, half: float) -> float:
    return g * math.cos(g * half) / math.sin(g * half)


def gamma_residual(gamma1: float, alpha: float) -> float:
    """gamma1 cot(gamma1 alpha pi/2) - gamma2 cot(gamma2 pi/2) with gamma2 eliminated."""
    gamma2 = math.sqrt(rect_eigenvalue(2, 2, alpha) - gamma1 ** 2)
    return _cot_term(gamma1, alpha * math.pi / 2) - _cot_term(gamma2, math.pi / 2)


def solve_gamma_pair(alpha: float) -> GammaPair:
    """Solve gamma1^2 + gamma2^2 = lambda_{2,2}, gamma1 cot(gamma1 alpha pi/2) = gamma2 cot(gamma2 pi/2).

    gamma2 is eliminated and the residual is rooted in gamma1 on
    [3/alpha, sqrt(lambda_{2,2} - 1)]: there gamma1 alpha pi/2 lies in
    [3pi/2, 2pi) and gamma2 in (1, 2], so neither cotangent has a pole, the
    residual is positive at the left end and negative at the right end.

    Args:
        alpha (float): Aspect ratio with 5/3 < alpha^2 < 4
    Returns:
        GammaPair: The solution
    Raises:
        BracketError: If alpha is outside the regime where the bracket holds
    """
    a2 = alpha * alpha
    if not 5.0 / 3.0 < a2 < 4.0:
        raise BracketError(f"No gamma bracket for alpha^2 = {a2:.6g}; need 5/3 < alpha^2 < 4")
    lam = rect_eigenvalue(2, 2, alpha)
    lo = 3.0 / alpha
    hi = math.sqrt(lam - 1.0)
    gamma1 = bracketed_root(lambda g: gamma_residual(g, alpha), lo, hi, tol=1e-15)
    gamma2 = math.sqrt(lam - gamma1 ** 2)
    sigma = -2.0 * _cot_term(gamma1, alpha * math.pi / 2)
    pair = GammaPair(float(alpha), gamma1, gamma2, sigma)
    logger.debug(f"alpha={alpha}: gamma1={gamma1:.12g}, gamma2={gamma2:.12g}, sigma={sigma:.12g}")
    return pair


def gamma_residual_scan(alpha: float, step: float = 1e-4) -> Tuple[float, float]:
    """Brute-force (gamma1, gamma2) by scanning the constraint curve for the smallest |residual|."""
    lam = rect_eigenvalue(2, 2, alpha)
    g1 = np.arange(3.0 / alpha + step, math.sqrt(lam - 1.0), step)
    g2 = np.sqrt(lam - g1 ** 2)
    res = np.abs(g1 / np.tan(g1 * alpha * math.pi / 2) - g2 / np.tan(g2 * math.pi / 2))
    i = int(np.argmin(res))
    return float(g1[i]), float(g2[i])


def cross_partition(alpha: float) -> Partition:
    """The nodal cross of psi_{2,2}: cuts x = alpha pi/2 and y = pi/2."""
    w = alpha * math.pi
    return build_rect_partition(alpha, [((w / 2, 0.0), (w / 2, math.pi)), ((0.0, math.pi / 2), (w, math.pi / 2))])


@dataclass
class Profile22:
    """The negative DtN eigenfunction on the nodal cross.

    Attributes:
        gamma (GammaPair): Frequencies
        partition (Partition): Cross partition
        field (BoundaryField): Samples of f on every arc
        horizontal_zero (float): Zero of the left horizontal half-arm, x = pi / gamma1
        vertical_sign (int): Sign of f on the vertical arm
        center_value (float): f at the centre of the cross
    """
    gamma: GammaPair
    partition: Partition
    field: BoundaryField
    horizontal_zero: float
    vertical_sign: int
    center_value: float

    def value(self, points: np.ndarray) -> np.ndarray:
        return cross_profile(self.gamma, points)

    @property
    def sign_pattern(self) -> dict:
        return {"horizontal_near_boundary": 1, "horizontal_near_center": -1, "vertical": self.vertical_sign}


def cross_profile(gamma: GammaPair, points: np.ndarray) -> np.ndarray:
    """f on the cross, reflected evenly about both symmetry axes."""
    pts = np.atleast_2d(points)
    w = gamma.alpha * math.pi
    x, y = pts[:, 0], pts[:, 1]
    on_vertical = np.abs(x - w / 2) < np.abs(y - math.pi / 2)
    xr = np.minimum(x, w - x)
    yr = np.minimum(y, math.pi - y)
    horizontal = np.sin(gamma.gamma1 * xr) * math.sin(gamma.gamma2 * math.pi / 2)
    vertical = math.sin(gamma.gamma1 * w / 2) * np.sin(gamma.gamma2 * yr)
    return np.where(on_vertical, vertical, horizontal)


def dtn_negative_profile_22(alpha: float, n: int = DEFAULT_ARC_SAMPLES) -> Profile22:
    """Sample the negative DtN eigenfunction of the (2,2) cross.

    The amplitude is left as in the closed form; it is not normalized.

    Args:
        alpha (float): Aspect ratio with 5/3 < alpha^2 < 4
        n (int): Samples per arc
    Returns:
        Profile22: Profile with its sign data
    """
    gamma = solve_gamma_pair(alpha)
    partition = cross_partition(alpha)

    def f(points: np.ndarray, arc: InterfaceArc) -> np.ndarray:
        return cross_profile(gamma, points)

    field = BoundaryField.from_function(partition, f, n)
    w = alpha * math.pi
    center = float(math.sin(gamma.gamma1 * w / 2) * math.sin(gamma.gamma2 * math.pi / 2))
    vertical_sign = int(np.sign(math.sin(gamma.gamma1 * w / 2)))
    return Profile22(gamma, partition, field, math.pi / gamma.gamma1, vertical_sign, center)
