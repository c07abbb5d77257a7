"""This module implements the base class of the smooth deformation families
phi_t(x) = x + t V(x) + t^2/2 A(x) used to validate shape derivatives.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
import logging
import math
from typing import Optional

import numpy as np

from pyspl.block import Mapping
from pyspl.boundary import DeformationField
from pyspl.consts import DEFAULT_N
from pyspl.groundstate import GroundState
from pyspl.mesh import CellKind, Mesh, tensor_mesh
from pyspl.plap import DiscreteOperator, assemble_mesh
from pyspl.numerics import sym_generalized_eigs

logger = logging.getLogger(__name__)


@dataclass
class FamilySample:
    """The tracked eigenvalue of a family member.

    Attributes:
        value (float): Eigenvalue
        vector (np.ndarray): Eigenvector on the reference mesh, None when not tracked
        mass (np.ndarray): Mass matrix of the member, None when not tracked
    """
    value: float
    vector: Optional[np.ndarray] = None
    mass: Optional[np.ndarray] = None


def _points(x, y) -> np.ndarray:
    return np.stack([np.ravel(x), np.ravel(y)], axis=1)


def disk_mesh(n: int = DEFAULT_N, radius: float = 1.0) -> Mesh:
    """Dirichlet mesh of the disk: two radial rings by four quadrants."""
    return tensor_mesh(CellKind.POLAR, [0.0, 0.5 * radius, radius], np.linspace(0.0, 2 * math.pi, 5),
                       n, n, closed_v=True)


class DomainFamily(ABC):
    """
    This interface defines a family of deformations of a reference domain.

    Attributes:
        name (str): Label used in reports
        index (int): Position (from 0) of the tracked eigenvalue
    """

    name = "family"
    index = 0

    @abstractmethod
    def velocity(self, points: np.ndarray) -> np.ndarray:
        """This method must be implemented by subclasses to return V at points (N, 2)."""
        pass

    @abstractmethod
    def velocity_jacobian(self, points: np.ndarray) -> np.ndarray:
        """This method must be implemented by subclasses to return DV at points, shape (N, 2, 2)."""
        pass

    @abstractmethod
    def mesh(self, n: int) -> Mesh:
        """This method must be implemented by subclasses to return the reference mesh."""
        pass

    def acceleration(self, points: np.ndarray) -> np.ndarray:
        return np.zeros((len(np.atleast_2d(points)), 2))

    def acceleration_jacobian(self, points: np.ndarray) -> np.ndarray:
        return np.zeros((len(np.atleast_2d(points)), 2, 2))

    def velocity_derivative(self, points: np.ndarray) -> np.ndarray:
        """X' = A - (DV) V, the time derivative of the Eulerian velocity at t = 0."""
        p = np.atleast_2d(points)
        return self.acceleration(p) - np.einsum("nij,nj->ni", self.velocity_jacobian(p), self.velocity(p))

    def reference_state(self) -> Optional[GroundState]:
        """Closed-form tracked eigenfunction of the reference domain, if known."""
        return None

    def deformation(self) -> DeformationField:
        return DeformationField(self.velocity, self.velocity_jacobian, name=self.name)

    def mapping(self, t: float) -> Mapping:
        """Jacobian of phi_t at reference points."""
        def jac(x, y):
            p = _points(x, y)
            return np.eye(2)[None, :, :] + t * self.velocity_jacobian(p) + 0.5 * t * t * self.acceleration_jacobian(p)
        return jac

    def operator(self, t: float = 0.0, n: int = DEFAULT_N) -> DiscreteOperator:
        return assemble_mesh(self.mesh(n), mapping=self.mapping(t) if t else None)

    def solve(self, t: float, n: int = DEFAULT_N) -> FamilySample:
        """Tracked eigenpair of the member at time t."""
        op = self.operator(t, n)
        pair = sym_generalized_eigs(op.A, op.B, self.index + 1)[self.index]
        return FamilySample(pair.value, pair.vector, op.B)
