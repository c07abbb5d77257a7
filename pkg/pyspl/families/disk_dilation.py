"""This module contains the dilation of the unit disk, phi_t = (1 + t) id."""

import numpy as np

from pyspl.consts import DEFAULT_N
from pyspl.families.base import DomainFamily, disk_mesh
from pyspl.groundstate import DiskModeState
from pyspl.mesh import Mesh


class DiskDilation(DomainFamily):
    """
    This class dilates the disk. Every eigenvalue scales as lambda / (1 + t)^2,
    so lambda' = -2 lambda and lambda'' = 6 lambda.
    """

    name = "disk-dilation"

    def velocity(self, points):
        """See base class."""
        return np.array(np.atleast_2d(points), dtype=float)

    def velocity_jacobian(self, points):
        """See base class."""
        return np.tile(np.eye(2), (len(np.atleast_2d(points)), 1, 1))

    def reference_state(self):
        """See base class."""
        return DiskModeState(0, 1)

    def mesh(self, n: int = DEFAULT_N) -> Mesh:
        """See base class."""
        return disk_mesh(n)
