"""This module contains the ground states of single subdomains and the
boundary pieces their Hadamard integrals run over.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
import logging
import math
from typing import Callable, List, Tuple

import numpy as np
from scipy import special

from pyspl.numerics import DomainError, bessel_zero, clenshaw_curtis

logger = logging.getLogger(__name__)


class BoundaryPiece(ABC):
    """
    This interface defines a smooth piece of a domain boundary with its outward normal.
    """

    @abstractmethod
    def quadrature(self, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """This method must be implemented by subclasses to return a quadrature rule.

        Args:
            n (int): Number of nodes
        Returns:
            Tuple[np.ndarray, np.ndarray, np.ndarray]: Points (n, 2), outward normals (n, 2), weights (n,)
        """
        pass


@dataclass(frozen=True)
class Segment(BoundaryPiece):
    start: Tuple[float, float]
    end: Tuple[float, float]
    normal: Tuple[float, float]

    def quadrature(self, n):
        """See base class."""
        t, w = clenshaw_curtis(n)
        a, b = np.array(self.start), np.array(self.end)
        pts = a[None, :] + (0.5 * (t + 1))[:, None] * (b - a)[None, :]
        length = float(np.linalg.norm(b - a))
        return pts, np.tile(self.normal, (n, 1)), 0.5 * length * w


@dataclass(frozen=True)
class CircleArc(BoundaryPiece):
    center: Tuple[float, float]
    radius: float
    theta0: float
    theta1: float

    def quadrature(self, n):
        """See base class."""
        span = self.theta1 - self.theta0
        if abs(abs(span) - 2 * math.pi) < 1e-12:
            # periodic integrand: trapezoid rule
            theta = self.theta0 + span * np.arange(n) / n
            w = np.full(n, abs(span) * self.radius / n)
        else:
            t, cw = clenshaw_curtis(n)
            theta = self.theta0 + 0.5 * (t + 1) * span
            w = 0.5 * abs(span) * self.radius * cw
        nrm = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        pts = np.array(self.center)[None, :] + self.radius * nrm
        return pts, nrm, w


class GroundState(ABC):
    """
    This interface defines an L2-normalized eigenfunction of one subdomain.

    Attributes:
        value (float): Eigenvalue
    """

    value: float

    @abstractmethod
    def __call__(self, points: np.ndarray) -> np.ndarray:
        """This method must be implemented by subclasses to evaluate the eigenfunction at points (N, 2)."""
        pass

    @abstractmethod
    def gradient(self, points: np.ndarray) -> np.ndarray:
        """This method must be implemented by subclasses to return the gradient at points, shape (N, 2)."""
        pass

    def boundary_pieces(self) -> List[BoundaryPiece]:
        """Pieces of the subdomain boundary; empty when the shape is not known in closed form."""
        return []

    def normal_derivative(self, points: np.ndarray, normals: np.ndarray) -> np.ndarray:
        return np.sum(self.gradient(np.atleast_2d(points)) * np.atleast_2d(normals), axis=1)


class RectGroundState(GroundState):
    """
    This class is c sin(m pi (x - x0)/w) sin(n pi (y - y0)/h) on the cell [x0, x1] x [y0, y1].
    """

    def __init__(self, x0: float, x1: float, y0: float, y1: float, m: int = 1, n: int = 1):
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1
        self.kx = m * math.pi / (x1 - x0)
        self.ky = n * math.pi / (y1 - y0)
        self.c = 2.0 / math.sqrt((x1 - x0) * (y1 - y0))
        self.value = self.kx ** 2 + self.ky ** 2

    def __call__(self, points):
        """See base class."""
        p = np.atleast_2d(points)
        return self.c * np.sin(self.kx * (p[:, 0] - self.x0)) * np.sin(self.ky * (p[:, 1] - self.y0))

    def gradient(self, points):
        """See base class."""
        p = np.atleast_2d(points)
        sx, cx = np.sin(self.kx * (p[:, 0] - self.x0)), np.cos(self.kx * (p[:, 0] - self.x0))
        sy, cy = np.sin(self.ky * (p[:, 1] - self.y0)), np.cos(self.ky * (p[:, 1] - self.y0))
        return self.c * np.stack([self.kx * cx * sy, self.ky * sx * cy], axis=1)

    def boundary_pieces(self):
        """See base class."""
        x0, x1, y0, y1 = self.x0, self.x1, self.y0, self.y1
        return [Segment((x0, y0), (x1, y0), (0.0, -1.0)), Segment((x1, y0), (x1, y1), (1.0, 0.0)),
                Segment((x1, y1), (x0, y1), (0.0, 1.0)), Segment((x0, y1), (x0, y0), (-1.0, 0.0))]


def _polar(points: np.ndarray, center=(0.0, 0.0)):
    p = np.atleast_2d(points) - np.asarray(center)[None, :]
    return np.hypot(p[:, 0], p[:, 1]), np.arctan2(p[:, 1], p[:, 0])


def _polar_gradient(dr, dtheta_over_r, theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([c * dr - s * dtheta_over_r, s * dr + c * dtheta_over_r], axis=1)


class SectorGroundState(GroundState):
    """
    This class is the ground state c J_nu(j r/R) sin(nu (theta - theta0)) of a sector, nu = pi / width.
    """

    def __init__(self, theta0: float, width: float, radius: float = 1.0):
        if not 0 < width <= 2 * math.pi:
            raise DomainError(f"Sector width {width} outside (0, 2pi]")
        self.theta0, self.width, self.radius = theta0, width, radius
        self.order = math.pi / width
        self.j = bessel_zero(self.order, 1)
        self.c = 1.0 / math.sqrt(width * radius ** 2 * special.jv(self.order + 1, self.j) ** 2 / 4.0)
        self.value = (self.j / radius) ** 2

    def _angle(self, theta):
        # unwrap into [theta0, theta0 + 2pi)
        return np.mod(theta - self.theta0, 2 * np.pi)

    def __call__(self, points):
        """See base class."""
        r, theta = _polar(points)
        phi = self._angle(theta)
        inside = phi <= self.width + 1e-12
        out = self.c * special.jv(self.order, self.j * r / self.radius) * np.sin(self.order * phi)
        return np.where(inside, out, 0.0)

    def gradient(self, points):
        """See base class."""
        r, theta = _polar(points)
        phi = self._angle(theta)
        # near theta0 + 2pi the wrapped angle belongs to the starting ray
        phi = np.where(phi > self.width + 1e-9, phi - 2 * np.pi, phi)
        x = self.j * r / self.radius
        dr = self.c * self.j / self.radius * special.jvp(self.order, x) * np.sin(self.order * phi)
        safe = np.where(r > 0, r, 1.0)
        dt = np.where(r > 0, self.c * special.jv(self.order, x) * self.order * np.cos(self.order * phi) / safe, 0.0)
        return _polar_gradient(dr, dt, theta)

    def boundary_pieces(self):
        """See base class."""
        t0, t1, R = self.theta0, self.theta0 + self.width, self.radius
        return [Segment((0.0, 0.0), (R * math.cos(t0), R * math.sin(t0)), (math.sin(t0), -math.cos(t0))),
                CircleArc((0.0, 0.0), R, t0, t1),
                Segment((R * math.cos(t1), R * math.sin(t1)), (0.0, 0.0), (-math.sin(t1), math.cos(t1)))]


class DiskModeState(GroundState):
    """
    This class is the disk eigenfunction c J_m(j_{m,n} r/R) cos(m theta) (or sin).
    """

    def __init__(self, m: int = 0, n: int = 1, radius: float = 1.0, kind: str = "cos"):
        if kind not in ("cos", "sin") or (m == 0 and kind == "sin"):
            raise DomainError(f"Invalid disk mode ({m}, {n}, {kind})")
        self.m, self.n, self.radius, self.kind = m, n, radius, kind
        self.j = bessel_zero(m, n)
        if m == 0:
            self.c = 1.0 / (math.sqrt(math.pi) * radius * abs(special.jv(1, self.j)))
        else:
            self.c = math.sqrt(2.0) / (math.sqrt(math.pi) * radius * abs(special.jv(m + 1, self.j)))
        self.value = (self.j / radius) ** 2

    def _angular(self, theta):
        if self.kind == "cos":
            return np.cos(self.m * theta), -self.m * np.sin(self.m * theta)
        return np.sin(self.m * theta), self.m * np.cos(self.m * theta)

    def __call__(self, points):
        """See base class."""
        r, theta = _polar(points)
        a, _ = self._angular(theta)
        return self.c * special.jv(self.m, self.j * r / self.radius) * a

    def gradient(self, points):
        """See base class."""
        r, theta = _polar(points)
        a, da = self._angular(theta)
        x = self.j * r / self.radius
        dr = self.c * self.j / self.radius * special.jvp(self.m, x) * a
        safe = np.where(r > 0, r, 1.0)
        dt = np.where(r > 0, self.c * special.jv(self.m, x) * da / safe, 0.0)
        return _polar_gradient(dr, dt, theta)

    def boundary_pieces(self):
        """See base class."""
        return [CircleArc((0.0, 0.0), self.radius, 0.0, 2 * math.pi)]


class DiscreteGroundState(GroundState):
    """
    This class wraps a discrete eigenpair computed on a subdomain mesh.

    Attributes:
        operator: Discrete operator of the subdomain
        vector (np.ndarray): Eigenvector in the operator's free coordinates
        value (float): Discrete eigenvalue
    """

    def __init__(self, operator, vector: np.ndarray, value: float,
                 evaluate: Callable[[np.ndarray], np.ndarray],
                 gradient: Callable[[np.ndarray], np.ndarray]):
        self.operator = operator
        self.vector = vector
        self.value = value
        self._evaluate = evaluate
        self._gradient = gradient

    def __call__(self, points):
        """See base class."""
        return self._evaluate(np.atleast_2d(points))

    def gradient(self, points):
        """See base class."""
        return self._gradient(np.atleast_2d(points))


def hadamard_integral(state: GroundState, field: Callable[[np.ndarray], np.ndarray], n: int = 64) -> float:
    """-integral of (d psi/d nu)^2 (X . nu) over the boundary pieces of the state."""
    pieces = state.boundary_pieces()
    if not pieces:
        raise DomainError("Ground state has no closed-form boundary")
    total = 0.0
    for piece in pieces:
        pts, nrm, w = piece.quadrature(n)
        dpsi = state.normal_derivative(pts, nrm)
        xn = np.sum(field(pts) * nrm, axis=1)
        total -= float(np.dot(w, dpsi ** 2 * xn))
    return total
