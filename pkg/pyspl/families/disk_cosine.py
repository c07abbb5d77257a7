"""This module contains a non-rigid deformation of the unit disk with normal
trace cos(theta) and vanishing velocity derivative.
"""

import numpy as np

from pyspl.consts import DEFAULT_N
from pyspl.families.base import DomainFamily, disk_mesh
from pyspl.groundstate import DiskModeState
from pyspl.mesh import Mesh


class DiskCosine(DomainFamily):
    """
    This class uses V = (x^2, xy), so X . nu = x = cos(theta) on the unit circle,
    and A = (DV) V, which makes X' = 0.
    """

    name = "disk-cosine"

    def velocity(self, points):
        """See base class."""
        p = np.atleast_2d(points)
        x, y = p[:, 0], p[:, 1]
        return np.stack([x * x, x * y], axis=1)

    def velocity_jacobian(self, points):
        """See base class."""
        p = np.atleast_2d(points)
        x, y = p[:, 0], p[:, 1]
        J = np.zeros((len(p), 2, 2))
        J[:, 0, 0] = 2 * x
        J[:, 1, 0] = y
        J[:, 1, 1] = x
        return J

    def acceleration(self, points):
        p = np.atleast_2d(points)
        x, y = p[:, 0], p[:, 1]
        return np.stack([2 * x ** 3, 2 * x * x * y], axis=1)

    def acceleration_jacobian(self, points):
        p = np.atleast_2d(points)
        x, y = p[:, 0], p[:, 1]
        J = np.zeros((len(p), 2, 2))
        J[:, 0, 0] = 6 * x * x
        J[:, 1, 0] = 4 * x * y
        J[:, 1, 1] = 2 * x * x
        return J

    def reference_state(self):
        """See base class."""
        return DiskModeState(0, 1)

    def mesh(self, n: int = DEFAULT_N) -> Mesh:
        """See base class."""
        return disk_mesh(n)
