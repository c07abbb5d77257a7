"""This module contains the analysis of radial partitions of the unit disk.

Energies and spectral positions come from Bessel zeros; negative directions
of the two-sided Dirichlet-to-Neumann form are built from the order alpha
matching the second zero j_{alpha,2} to the energy j_{k/2,1}.
"""

from dataclasses import dataclass
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import special

from pyspl.consts import MULTIPLICITY_TOL, SPECTRAL_FLOW_SIGMA_MAX, SPECTRAL_FLOW_SIGMA_STEP
from pyspl.numerics import (BracketError, DomainError, NumericalError, adaptive_quad,
                            bessel_zero, bracketed_root)

logger = logging.getLogger(__name__)

MAX_SECTORS = 12
MAX_ZERO_INDEX = 10


def _check_k(k: int, lo: int = 2, hi: Optional[int] = None) -> None:
    if k < lo or (hi is not None and k > hi):
        raise DomainError(f"Sector count {k} outside [{lo}, {hi if hi is not None else 'inf'}]")


def radial_energy(k: int) -> float:
    """Energy j_{k/2,1}^2 of the radial k-partition."""
    _check_k(k)
    return bessel_zero(k / 2, 1) ** 2


def radial_spectrum(k: int, bound: Optional[float] = None) -> List[Tuple[float, int, float, int]]:
    """Partition Laplacian spectrum of the radial k-partition up to `bound`.

    Even k gives the Dirichlet spectrum of the disk (orders 0, 1, ...);
    odd k gives the half-integer orders 1/2, 3/2, ..., every value double.

    Args:
        k (int): Sector count
        bound (float): Largest eigenvalue listed, the energy by default
    Returns:
        List[Tuple[float, int, float, int]]: (value, multiplicity, order, zero index), ascending
    """
    _check_k(k, 2, MAX_SECTORS)
    if bound is None:
        bound = radial_energy(k) * (1.0 + MULTIPLICITY_TOL)
    shift = 0.0 if k % 2 == 0 else 0.5
    out = []
    m = 0
    while m + shift <= 10.0:
        order = m + shift
        if bessel_zero(order, 1) ** 2 > bound:
            break
        mult = 1 if order == 0 else 2
        for idx in range(1, MAX_ZERO_INDEX + 1):
            value = bessel_zero(order, idx) ** 2
            if value > bound:
                break
            out.append((value, mult, order, idx))
        m += 1
    out.sort(key=lambda e: e[0])
    return out


def radial_deficiency(k: int) -> Tuple[int, int]:
    """Spectral position and deficiency of the radial k-partition.

    Args:
        k (int): Sector count in [2, 12]
    Returns:
        Tuple[int, int]: (position, deficiency = position - k)
    """
    _check_k(k, 2, MAX_SECTORS)
    energy = radial_energy(k)
    below = sum(mult for value, mult, _, _ in radial_spectrum(k)
                if value < energy - MULTIPLICITY_TOL * (1.0 + energy))
    position = below + 1
    return position, position - k


def solve_alpha_match(k: int) -> float:
    """The order alpha in (1/2, k/2) with j_{alpha,2} = j_{k/2,1}.

    Raises:
        BracketError: If k < 6, where no such order exists
    """
    if k < 6:
        raise BracketError(f"No matched order for k = {k}; it exists for k >= 6")
    target = bessel_zero(k / 2, 1)
    alpha = bracketed_root(lambda a: bessel_zero(a, 2) - target, 0.5, k / 2, tol=1e-13)
    logger.debug(f"k={k}: matched order {alpha:.12g}")
    return alpha


def weighted_bessel_integral(alpha: float, j: float) -> float:
    """Integral of J_alpha(j r)^2 / r over (0, 1).

    Raises:
        DomainError: If alpha <= 1/2
    """
    if alpha <= 0.5:
        raise DomainError(f"Order must exceed 1/2, got {alpha}")
    return adaptive_quad(lambda r: special.jv(alpha, j * r) ** 2 / r, 0.0, 1.0, tol=1e-10,
                         endpoint_exponent=2 * alpha - 1)


def negative_form_even(k: int) -> float:
    """Form value -2 k alpha tan(alpha pi / k) times the weighted integral, for even k >= 6."""
    if k < 6 or k % 2:
        raise DomainError(f"Even sector count >= 6 required, got {k}")
    alpha = solve_alpha_match(k)
    j = bessel_zero(k / 2, 1)
    value = -2.0 * k * alpha * math.tan(alpha * math.pi / k) * weighted_bessel_integral(alpha, j)
    logger.debug(f"k={k}: even form {value:.12g}")
    return value


@dataclass(frozen=True)
class EvenModeProfile:
    """Closed-form extension J_alpha(j r) cos(alpha (theta - pi/k)) / cos(alpha pi/k) on one sector.

    Attributes:
        k (int): Sector count
        alpha (float): Matched order
        j (float): j_{k/2,1}
        integral (float): Weighted Bessel integral
    """
    k: int
    alpha: float
    j: float
    integral: float

    def __call__(self, r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return (special.jv(self.alpha, self.j * r) * np.cos(self.alpha * (theta - math.pi / self.k))
                / math.cos(self.alpha * math.pi / self.k))

    def trace(self, r):
        """Boundary data f(r) on both rays of the sector."""
        return special.jv(self.alpha, self.j * np.asarray(r, dtype=float))

    @property
    def sector_contribution(self) -> float:
        return -2.0 * self.alpha * math.tan(self.alpha * math.pi / self.k) * self.integral

    @property
    def form(self) -> float:
        return self.k * self.sector_contribution


def even_mode_profile(k: int) -> EvenModeProfile:
    if k < 6 or k % 2:
        raise DomainError(f"Even sector count >= 6 required, got {k}")
    alpha = solve_alpha_match(k)
    j = bessel_zero(k / 2, 1)
    return EvenModeProfile(k, alpha, j, weighted_bessel_integral(alpha, j))


@dataclass
class SpectralFlowSolution:
    """Piecewise trigonometric solution of -T'' = alpha^2 T with jumps sigma T at the rays.

    Attributes:
        k (int): Odd sector count
        alpha (float): Matched order
        sigma (float): Jump strength
        intervals (np.ndarray): (amplitude, phase) per interval, T = A sin(alpha (theta - theta_i) + phase)
        node_values (np.ndarray): T at theta_i = 2 pi i / k, i = 1..k-1
        slopes (np.ndarray): (T'(theta_i-), T'(theta_i+)) per interior node
        integral (float): Weighted Bessel integral
        sign_changes (int): Sign changes of T(2 pi) seen by the sigma scan
        roots (Tuple[float, ...]): Polished sigma of every sign change
        positive_roots (Tuple[float, ...]): Roots whose profile is positive on (0, 2 pi)
    """
    k: int
    alpha: float
    sigma: float
    intervals: np.ndarray
    node_values: np.ndarray
    slopes: np.ndarray
    integral: float
    sign_changes: int
    roots: Tuple[float, ...] = ()
    positive_roots: Tuple[float, ...] = ()

    @property
    def nodes(self) -> np.ndarray:
        return 2 * np.pi * np.arange(1, self.k) / self.k

    def evaluate(self, theta) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        h = 2 * np.pi / self.k
        idx = np.clip((theta // h).astype(int), 0, self.k - 1)
        amp, phase = self.intervals[idx, 0], self.intervals[idx, 1]
        return amp * np.sin(self.alpha * (theta - idx * h) + phase)

    @property
    def jump_residual(self) -> float:
        jumps = self.slopes[:, 1] - self.slopes[:, 0]
        return float(np.max(np.abs(jumps - self.sigma * self.node_values)))

    @property
    def normalization_spread(self) -> float:
        """Relative spread of T(theta_i) / sin(theta_i / 2)."""
        ratio = self.node_values / np.sin(self.nodes / 2)
        return float((ratio.max() - ratio.min()) / abs(ratio.mean()))

    @property
    def contributions(self) -> np.ndarray:
        """Boundary term of each sector; they add up to the form value."""
        t = np.concatenate([[0.0], self.node_values, [0.0]])
        left = np.concatenate([[self.intervals[0, 0] * self.alpha * math.cos(self.intervals[0, 1])],
                               self.slopes[:, 1]])
        right = np.concatenate([self.slopes[:, 0], [self._end_slope()]])
        return self.integral * (t[1:] * right - t[:-1] * left)

    def _end_slope(self) -> float:
        amp, phase = self.intervals[-1]
        return amp * self.alpha * math.cos(self.alpha * 2 * math.pi / self.k + phase)

    @property
    def form(self) -> float:
        return float(-self.sigma * np.sum(self.node_values ** 2) * self.integral)


def _shoot(alpha: float, k: int, sigma: np.ndarray) -> np.ndarray:
    """T(2 pi) for each sigma, starting from T(0) = 0, T'(0) = 1."""
    h = 2 * math.pi / k
    c, s = math.cos(alpha * h), math.sin(alpha * h)
    T = np.zeros_like(sigma)
    dT = np.ones_like(sigma)
    for i in range(k):
        T, dT = c * T + s / alpha * dT, -alpha * s * T + c * dT
        if i < k - 1:
            dT = dT + sigma * T
    return T


def _profile(alpha: float, k: int, sigma: float):
    h = 2 * math.pi / k
    c, s = math.cos(alpha * h), math.sin(alpha * h)
    T, dT = 0.0, 1.0
    intervals = []
    values, slopes = [], []
    for i in range(k):
        intervals.append((math.hypot(T, dT / alpha), math.atan2(T, dT / alpha)))
        T, dT = c * T + s / alpha * dT, -alpha * s * T + c * dT
        if i < k - 1:
            values.append(T)
            slopes.append((dT, dT + sigma * T))
            dT = dT + sigma * T
    return np.array(intervals), np.array(values), np.array(slopes), T


def spectral_flow_odd(k: int, sigma_max: float = SPECTRAL_FLOW_SIGMA_MAX,
                      step: float = SPECTRAL_FLOW_SIGMA_STEP) -> SpectralFlowSolution:
    """Solve the odd-k angular problem for the jump strength sigma.

    T(2 pi) is tabulated on a sigma grid, the sign change whose solution is
    positive on (0, 2 pi) is polished by bisection, and T is rescaled so that
    T(theta_i) = sin(theta_i / 2).

    Args:
        k (int): Odd sector count >= 7
        sigma_max (float): Upper end of the sigma scan
        step (float): Scan step
    Returns:
        SpectralFlowSolution: The solution
    Raises:
        NumericalError: If no admissible sign change is found in (0, sigma_max)
    """
    if k < 7 or k % 2 == 0:
        raise DomainError(f"Odd sector count >= 7 required, got {k}")
    alpha = solve_alpha_match(k)
    j = bessel_zero(k / 2, 1)

    grid = np.arange(step, sigma_max + step / 2, step)
    ends = _shoot(alpha, k, grid)
    changes = np.flatnonzero(np.sign(ends[:-1]) * np.sign(ends[1:]) < 0)
    logger.debug(f"k={k}: {len(changes)} sign changes of T(2pi) on (0, {sigma_max})")

    theta = np.linspace(0, 2 * np.pi, 40 * k + 1)[1:-1]
    roots, positive = [], []
    for idx in changes:
        root = bracketed_root(lambda x: float(_shoot(alpha, k, np.array([x]))[0]),
                              float(grid[idx]), float(grid[idx + 1]), tol=1e-14)
        roots.append(root)
        intervals, values, _, _ = _profile(alpha, k, root)
        trial = SpectralFlowSolution(k, alpha, root, intervals, values, np.zeros((k - 1, 2)), 0.0, len(changes))
        if np.all(trial.evaluate(theta) > 0):
            positive.append(root)
    if not positive:
        raise NumericalError(f"No positive spectral-flow solution for k = {k} with sigma in (0, {sigma_max})")
    sigma = positive[0]
    if len(positive) > 1:
        logger.warning(f"k={k}: {len(positive)} roots give positive profiles, keeping sigma={sigma:.6g}")
    for r in roots:
        if r not in positive:
            logger.info(f"k={k}: root sigma={r:.6g} of T(2pi) rejected, profile changes sign on (0, 2pi)")

    intervals, values, slopes, end = _profile(alpha, k, sigma)
    nodes = 2 * np.pi * np.arange(1, k) / k
    scale = math.sin(nodes[0] / 2) / values[0]
    intervals[:, 0] *= scale
    solution = SpectralFlowSolution(k, alpha, sigma, intervals, values * scale, slopes * scale,
                                    weighted_bessel_integral(alpha, j), len(changes), tuple(roots), tuple(positive))
    logger.debug(f"k={k}: sigma={sigma:.12g}, T(2pi)={end * scale:.3e}, form={solution.form:.12g}")
    return solution


@dataclass(frozen=True)
class RadialPartitionData:
    """Summary of the radial k-partition.

    Attributes:
        k (int): Sector count
        energy (float): j_{k/2,1}^2
        matched_order (Optional[float]): Order alpha for k >= 6
        position (int): Spectral position of the energy
        deficiency (int): position - k
    """
    k: int
    energy: float
    matched_order: Optional[float]
    position: int
    deficiency: int


def radial_partition_data(k: int) -> RadialPartitionData:
    position, deficiency = radial_deficiency(k)
    alpha = solve_alpha_match(k) if k >= 6 else None
    return RadialPartitionData(k, radial_energy(k), alpha, position, deficiency)
