"""This module contains a deformation of the square that moves the vertical arm
of the nodal cross while keeping every subdomain's first variation zero.
"""

import logging

import numpy as np

from pyspl.consts import DEFAULT_N
from pyspl.families.base import DomainFamily, FamilySample
from pyspl.mesh import Mesh
from pyspl.partition import Partition
from pyspl.plap import subdomain_ground_states
from pyspl.rect import cross_partition

logger = logging.getLogger(__name__)


class SquareShear(DomainFamily):
    """
    This class bends the vertical arm of the square's cross: V = (sin x sin 4y, 0).

    V is tangent to the square's sides and to the horizontal arm. The tracked
    quantity is the partition energy, the largest subdomain ground state.
    """

    name = "square-shear"

    def __init__(self):
        self.partition: Partition = cross_partition(1.0)

    def velocity(self, points):
        """See base class."""
        p = np.atleast_2d(points)
        return np.stack([np.sin(p[:, 0]) * np.sin(4 * p[:, 1]), np.zeros(len(p))], axis=1)

    def velocity_jacobian(self, points):
        """See base class."""
        p = np.atleast_2d(points)
        x, y = p[:, 0], p[:, 1]
        J = np.zeros((len(p), 2, 2))
        J[:, 0, 0] = np.cos(x) * np.sin(4 * y)
        J[:, 0, 1] = 4 * np.sin(x) * np.cos(4 * y)
        return J

    def mesh(self, n: int = DEFAULT_N) -> Mesh:
        """See base class."""
        return self.partition.mesh(n)

    def solve(self, t: float, n: int = DEFAULT_N) -> FamilySample:
        """See base class."""
        states = subdomain_ground_states(self.partition, n, mapping=self.mapping(t) if t else None)
        values = [s.value for s in states]
        logger.debug(f"t={t:g}: subdomain ground states {values}")
        return FamilySample(max(values))
