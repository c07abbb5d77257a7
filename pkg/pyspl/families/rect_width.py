"""This module contains the width stretch of the rectangle (0, a pi) x (0, pi)."""

import math

import numpy as np

from pyspl.consts import DEFAULT_N
from pyspl.families.base import DomainFamily
from pyspl.groundstate import RectGroundState
from pyspl.mesh import CellKind, Mesh, tensor_mesh
from pyspl.numerics import DomainError


class RectWidth(DomainFamily):
    """
    This class stretches the rectangle horizontally: phi_t(x, y) = ((a + t) x / a, y).

    The ground state eigenvalue is 1/(a + t)^2 + 1.

    Attributes:
        a (float): Reference aspect ratio
    """

    name = "rect-width"

    def __init__(self, a: float = 1.0):
        if a <= 0:
            raise DomainError(f"Aspect ratio must be positive, got {a}")
        self.a = a

    def velocity(self, points):
        """See base class."""
        p = np.atleast_2d(points)
        return np.stack([p[:, 0] / self.a, np.zeros(len(p))], axis=1)

    def velocity_jacobian(self, points):
        """See base class."""
        J = np.zeros((len(np.atleast_2d(points)), 2, 2))
        J[:, 0, 0] = 1.0 / self.a
        return J

    def mesh(self, n: int = DEFAULT_N) -> Mesh:
        """See base class."""
        return tensor_mesh(CellKind.RECT, [0.0, self.a * math.pi], [0.0, math.pi], n, n)

    def reference_state(self):
        """See base class."""
        return RectGroundState(0.0, self.a * math.pi, 0.0, math.pi)

    def exact_derivative(self) -> float:
        return -2.0 / self.a ** 3
