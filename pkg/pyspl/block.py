"""This module implements the spectral element attached to one mesh cell.

A block carries a tensor Chebyshev–Lobatto nodal basis on its cell and
integrates stiffness and mass with Gauss–Legendre rules. Subclasses only say
how parameter coordinates map to the plane.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
import logging
from typing import Callable, Optional, Tuple

import numpy as np

from pyspl.mesh import Cell, CellKind, Side
from pyspl.numerics import cheb_grid, gauss_legendre, interpolation_matrix

logger = logging.getLogger(__name__)


# Maps reference points (x, y) to the Jacobians of a deformation, shape (N, 2, 2)
Mapping = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class Quadrature:
    """Tensor Gauss–Legendre data of a block.

    Attributes:
        x (np.ndarray): Cartesian abscissae
        y (np.ndarray): Cartesian ordinates
        weights (np.ndarray): Weights including the area element
        values (np.ndarray): Basis values, (points, nodes)
        grad_x (np.ndarray): Cartesian x-derivatives of the basis
        grad_y (np.ndarray): Cartesian y-derivatives of the basis
    """
    x: np.ndarray
    y: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    grad_x: np.ndarray
    grad_y: np.ndarray


class Block(ABC):
    """
    This interface defines the spectral element of one cell.

    Nodes are numbered u-major: node (a, b) has index a * nv + b, where a
    runs over the u nodes and b over the v nodes, both in decreasing
    parameter order.

    Attributes:
        cell (Cell): The cell
        size (int): Number of nodes
    """

    def __init__(self, cell: Cell):
        """Inits the block with its cell.

        Args:
            cell (Cell): Cell in parameter space
        """
        self.cell = cell
        self.grid_u = cheb_grid(cell.nu)
        self.grid_v = cheb_grid(cell.nv)
        self.u_nodes = self._to_param(self.grid_u.nodes, cell.u0, cell.u1)
        self.v_nodes = self._to_param(self.grid_v.nodes, cell.v0, cell.v1)
        self.size = cell.nu * cell.nv
        self._quadrature = None
        super().__init__()

    @staticmethod
    def _to_param(t, lo, hi):
        return 0.5 * (lo + hi) + 0.5 * (hi - lo) * t

    @staticmethod
    def _to_reference(p, lo, hi):
        return (2.0 * np.asarray(p, dtype=float) - lo - hi) / (hi - lo)

    @abstractmethod
    def to_cartesian(self, u: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """This method must be implemented by subclasses to map parameters to the plane.

        Args:
            u (np.ndarray): First parameter
            v (np.ndarray): Second parameter
        Returns:
            Tuple[np.ndarray, np.ndarray]: Cartesian coordinates
        """
        pass

    @abstractmethod
    def from_cartesian(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """This method must be implemented by subclasses to map plane points to parameters."""
        pass

    @abstractmethod
    def jacobian(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """This method must be implemented by subclasses to return d(x,y)/d(u,v).

        Returns:
            np.ndarray: Jacobians, shape (N, 2, 2)
        """
        pass

    def node_params(self) -> Tuple[np.ndarray, np.ndarray]:
        U, V = np.meshgrid(self.u_nodes, self.v_nodes, indexing="ij")
        return U.ravel(), V.ravel()

    def node_points(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.to_cartesian(*self.node_params())

    def side_nodes(self, side: Side) -> np.ndarray:
        """Node indices on a side, ordered by decreasing value of the other parameter."""
        nu, nv = self.cell.nu, self.cell.nv
        if side == Side.U1:
            return np.arange(nv)
        if side == Side.U0:
            return (nu - 1) * nv + np.arange(nv)
        if side == Side.V1:
            return np.arange(nu) * nv
        return np.arange(nu) * nv + nv - 1

    def _derivative_scales(self):
        return 2.0 / (self.cell.u1 - self.cell.u0), 2.0 / (self.cell.v1 - self.cell.v0)

    def quadrature(self) -> Quadrature:
        """Gauss–Legendre data with one more point than nodes per direction."""
        if self._quadrature is not None:
            return self._quadrature
        cell = self.cell
        tu, wu = gauss_legendre(cell.nu + 1)
        tv, wv = gauss_legendre(cell.nv + 1)
        Iu = interpolation_matrix(cell.nu, tu)
        Iv = interpolation_matrix(cell.nv, tv)
        su, sv = self._derivative_scales()
        DIu = Iu @ self.grid_u.D * su
        DIv = Iv @ self.grid_v.D * sv

        qu = self._to_param(tu, cell.u0, cell.u1)
        qv = self._to_param(tv, cell.v0, cell.v1)
        U, V = np.meshgrid(qu, qv, indexing="ij")
        U, V = U.ravel(), V.ravel()
        J = self.jacobian(U, V)
        det = np.linalg.det(J)
        inv_t = np.transpose(np.linalg.inv(J), (0, 2, 1))

        values = np.kron(Iu, Iv)
        grad_u = np.kron(DIu, Iv)
        grad_v = np.kron(Iu, DIv)
        grad_x = inv_t[:, 0, 0, None] * grad_u + inv_t[:, 0, 1, None] * grad_v
        grad_y = inv_t[:, 1, 0, None] * grad_u + inv_t[:, 1, 1, None] * grad_v

        weights = np.outer(wu, wv).ravel() * (0.25 * (cell.u1 - cell.u0) * (cell.v1 - cell.v0)) * det
        x, y = self.to_cartesian(U, V)
        self._quadrature = Quadrature(x, y, weights, values, grad_x, grad_y)
        return self._quadrature

    def operators(self, mapping: Optional[Mapping] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Assemble the stiffness and mass matrices of the block.

        Args:
            mapping (Mapping): Optional deformation; the matrices are then those of
                the deformed cell pulled back to the reference nodes
        Returns:
            Tuple[np.ndarray, np.ndarray]: Stiffness K and mass M
        """
        q = self.quadrature()
        if mapping is None:
            w = q.weights
            K = q.grad_x.T @ (w[:, None] * q.grad_x) + q.grad_y.T @ (w[:, None] * q.grad_y)
            M = q.values.T @ (w[:, None] * q.values)
            return K, M

        F = mapping(q.x, q.y)
        det = np.linalg.det(F)
        Finv = np.linalg.inv(F)
        # det * F^-1 F^-T
        C = det[:, None, None] * np.einsum("qij,qkj->qik", Finv, Finv)
        w = q.weights
        grads = (q.grad_x, q.grad_y)
        K = np.zeros((self.size, self.size))
        for a in range(2):
            for b in range(2):
                K += grads[a].T @ ((w * C[:, a, b])[:, None] * grads[b])
        M = q.values.T @ ((w * det)[:, None] * q.values)
        return K, M

    def interpolation(self, u, v) -> Tuple[np.ndarray, np.ndarray]:
        """Per-point interpolation rows for scattered parameter points."""
        cell = self.cell
        Lu = interpolation_matrix(cell.nu, np.atleast_1d(self._to_reference(u, cell.u0, cell.u1)))
        Lv = interpolation_matrix(cell.nv, np.atleast_1d(self._to_reference(v, cell.v0, cell.v1)))
        return Lu, Lv

    def evaluate(self, values: np.ndarray, u, v) -> np.ndarray:
        """Evaluate the nodal interpolant at scattered parameter points."""
        Lu, Lv = self.interpolation(u, v)
        V = values.reshape(self.cell.nu, self.cell.nv)
        return np.einsum("ia,ab,ib->i", Lu, V, Lv)

    def evaluate_grid(self, values: np.ndarray, u, v) -> np.ndarray:
        """Evaluate the interpolant on the tensor grid u x v."""
        Lu, Lv = self.interpolation(u, v)
        return Lu @ values.reshape(self.cell.nu, self.cell.nv) @ Lv.T

    def gradient(self, values: np.ndarray, u, v) -> Tuple[np.ndarray, np.ndarray]:
        """Cartesian gradient of the interpolant at scattered parameter points."""
        Lu, Lv = self.interpolation(u, v)
        su, sv = self._derivative_scales()
        V = values.reshape(self.cell.nu, self.cell.nv)
        du = np.einsum("ia,ab,ib->i", Lu @ self.grid_u.D * su, V, Lv)
        dv = np.einsum("ia,ab,ib->i", Lu, V, Lv @ self.grid_v.D * sv)
        J = self.jacobian(np.atleast_1d(u), np.atleast_1d(v))
        inv_t = np.transpose(np.linalg.inv(J), (0, 2, 1))
        gx = inv_t[:, 0, 0] * du + inv_t[:, 0, 1] * dv
        gy = inv_t[:, 1, 0] * du + inv_t[:, 1, 1] * dv
        return gx, gy

    def sample_params(self, m: int) -> Tuple[np.ndarray, np.ndarray]:
        """Cell-centred uniform sample parameters, m per direction."""
        t = (np.arange(m) + 0.5) / m
        cell = self.cell
        return cell.u0 + t * (cell.u1 - cell.u0), cell.v0 + t * (cell.v1 - cell.v0)


class RectBlock(Block):
    """
    This class is the spectral element of a Cartesian cell (u = x, v = y).
    """

    def to_cartesian(self, u, v):
        """See base class."""
        return np.asarray(u, dtype=float), np.asarray(v, dtype=float)

    def from_cartesian(self, x, y):
        """See base class."""
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)

    def jacobian(self, u, v):
        """See base class."""
        J = np.zeros((np.size(u), 2, 2))
        J[:, 0, 0] = 1.0
        J[:, 1, 1] = 1.0
        return J


class PolarBlock(Block):
    """
    This class is the spectral element of a polar cell (u = r, v = theta).

    A cell touching r = 0 has a collapsed side there; the mesh ties its
    nodes to a single value.
    """

    def to_cartesian(self, u, v):
        """See base class."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return u * np.cos(v), u * np.sin(v)

    def from_cartesian(self, x, y):
        """See base class."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        theta = np.arctan2(y, x)
        mid = 0.5 * (self.cell.v0 + self.cell.v1)
        theta = theta + 2 * np.pi * np.round((mid - theta) / (2 * np.pi))
        return r, theta

    def jacobian(self, u, v):
        """See base class."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        J = np.empty((np.size(u), 2, 2))
        J[:, 0, 0] = np.cos(v)
        J[:, 0, 1] = -u * np.sin(v)
        J[:, 1, 0] = np.sin(v)
        J[:, 1, 1] = u * np.cos(v)
        return J


def make_block(cell: Cell) -> Block:
    if cell.kind == CellKind.POLAR:
        return PolarBlock(cell)
    return RectBlock(cell)
