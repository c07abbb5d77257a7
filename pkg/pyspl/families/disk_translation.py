"""This module contains the rigid translation of the unit disk."""

from typing import Sequence

import numpy as np

from pyspl.consts import DEFAULT_N
from pyspl.families.base import DomainFamily, disk_mesh
from pyspl.groundstate import DiskModeState
from pyspl.mesh import Mesh


class DiskTranslation(DomainFamily):
    """
    This class translates the disk along a fixed direction; eigenvalues do not change.

    Attributes:
        direction (np.ndarray): Translation velocity
    """

    name = "disk-translation"

    def __init__(self, direction: Sequence[float] = (1.0, 0.0)):
        self.direction = np.asarray(direction, dtype=float)

    def velocity(self, points):
        """See base class."""
        return np.tile(self.direction, (len(np.atleast_2d(points)), 1))

    def velocity_jacobian(self, points):
        """See base class."""
        return np.zeros((len(np.atleast_2d(points)), 2, 2))

    def reference_state(self):
        """See base class."""
        return DiskModeState(0, 1)

    def mesh(self, n: int = DEFAULT_N) -> Mesh:
        """See base class."""
        return disk_mesh(n)
