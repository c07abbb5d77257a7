"""This module contains the shape-derivative engine of the partition energy.

It covers the Hadamard first variation, the criticality coefficients and the
weight rho, the projection onto equipartition tangents, the Hessian at a
critical partition through constrained Helmholtz extensions, the Gram matrix
of the two-sided Dirichlet-to-Neumann form with its index counts, the second
variation of a smooth family on the disk and the finite-difference oracle.
"""

from dataclasses import dataclass, field
import logging
import math
from typing import List, Optional, Sequence, Union

import networkx as nx
import numpy as np
from numpy.polynomial import chebyshev
from scipy import linalg

from pyspl.boundary import BoundaryField, DeformationField, arc_bump_field, smooth_bump
from pyspl.consts import (CORNER_CUTOFF_FRACTION, DEFAULT_ARC_SAMPLES, DEFAULT_BASIS_SIZE, DEFAULT_N,
                          FD_OVERLAP_MIN, FD_STEPS, INDEX_ZERO_TOL, NOT_CRITICAL_RESIDUAL)
from pyspl.families.base import DomainFamily
from pyspl.groundstate import (DiscreteGroundState, DiskModeState, GroundState, RectGroundState,
                               SectorGroundState, hadamard_integral)
from pyspl.mesh import InvalidGeometry
from pyspl.numerics import DomainError, NumericalError, clenshaw_curtis, gauss_legendre, sym_generalized_eigs
from pyspl.partition import InterfaceArc, NormalFrame, Partition, RectTag, SectorTag
from pyspl.plap import DiscreteOperator, subdomain_ground_states
from pyspl.rect import cross_profile, dtn_negative_profile_22

logger = logging.getLogger(__name__)

# Discrete gradients are read this far inside the subdomain
INSIDE_SHIFT = 1e-8


class NotCritical(NumericalError):
    """Raised when the normal derivatives cannot be matched across the arcs."""

    def __init__(self, message: str, data: "CriticalityData" = None):
        super().__init__(message)
        self.data = data


class CrossingDetected(NumericalError):
    pass


@dataclass
class GroundStateData:
    """Ground state of one subdomain of a partition.

    Attributes:
        partition (Partition): Partition
        subdomain (int): Subdomain id
        state (GroundState): L2-normalized positive ground state
    """
    partition: Partition
    subdomain: int
    state: GroundState

    @property
    def value(self) -> float:
        return self.state.value

    @property
    def discrete(self) -> bool:
        return isinstance(self.state, DiscreteGroundState)

    def outward_normal(self, arc: InterfaceArc) -> np.ndarray:
        return arc.outward_sign(self.subdomain) * arc.normal

    def normal_derivative(self, arc: InterfaceArc, points: np.ndarray) -> np.ndarray:
        """d psi / d nu_i at points of an arc, nu_i the outward normal of this subdomain."""
        nu = self.outward_normal(arc)
        pts = np.atleast_2d(points)
        if self.discrete:
            pts = pts - INSIDE_SHIFT * nu[None, :]
        return self.state.gradient(pts) @ nu


def groundstate_data(p: Partition, n: int = DEFAULT_N, discrete: bool = False) -> List[GroundStateData]:
    """Ground state of every subdomain.

    Closed forms are used for subdomains tagged as rectangle cells or disk
    sectors; the others, or all of them with `discrete`, come from the
    subdomain's own mesh.

    Args:
        p (Partition): Partition
        n (int): Grid size of the discrete solves
        discrete (bool): Ignore analytic tags
    Returns:
        List[GroundStateData]: One entry per subdomain
    Raises:
        DegenerateGroundState: If a discrete ground state is not simple
    """
    computed = None
    data = []
    for sub in p.subdomains:
        tag = None if discrete else sub.analytic_tag
        if isinstance(tag, RectTag):
            state = RectGroundState(tag.x0, tag.x1, tag.y0, tag.y1)
        elif isinstance(tag, SectorTag):
            state = SectorGroundState(tag.theta0, tag.width, tag.radius)
        else:
            if computed is None:
                computed = subdomain_ground_states(p, n)
            state = computed[sub.id]
        data.append(GroundStateData(p, sub.id, state))
    values = [d.value for d in data]
    logger.debug(f"Ground states: {', '.join(f'{v:.10g}' for v in values)}")
    return data


def _arc_rule(arc: InterfaceArc, n: int):
    t, w = clenshaw_curtis(n)
    return arc.point(t), 0.5 * arc.length * w


def hadamard_first(data: Union[GroundStateData, GroundState], X: DeformationField,
                   n: int = DEFAULT_ARC_SAMPLES) -> float:
    """First variation lambda' = -int (d psi/d nu)^2 (X . nu) of one eigenvalue.

    For a subdomain of a partition the integral runs over its interface arcs;
    X is assumed tangent to the outer boundary. For a closed-form state it
    runs over the state's whole boundary.

    Args:
        data (GroundStateData | GroundState): Subdomain data or closed-form state
        X (DeformationField): Deformation
        n (int): Quadrature nodes per arc
    Returns:
        float: lambda'
    """
    if isinstance(data, GroundState):
        return hadamard_integral(data, X, max(n, 64))
    total = 0.0
    for arc in data.partition.arcs_of(data.subdomain):
        pts, w = _arc_rule(arc, n)
        g = data.normal_derivative(arc, pts)
        total -= float(np.dot(w, g ** 2 * (X(pts) @ data.outward_normal(arc))))
    return total


def equipartition_integrals(X: DeformationField, data: List[GroundStateData],
                            n: int = DEFAULT_ARC_SAMPLES) -> np.ndarray:
    """int (X . nu_i)(d psi_i/d nu_i)^2 over the interface arcs of every subdomain."""
    return np.array([-hadamard_first(d, X, n) for d in data])


@dataclass
class CriticalityData:
    """Matching coefficients of a partition.

    Attributes:
        coefficients (np.ndarray): a_1..a_k, positive, sum of squares 1
        residual (float): Largest mismatch of |a_i d psi_i/d nu_i| across an arc, relative to sup rho
        rho (BoundaryField): Weight |a_i d psi_i / d nu_i|, averaged over both sides, zero at corners
        data (List[GroundStateData]): Ground states used
        defect (float): max - min of the ground state energies
    """
    coefficients: np.ndarray
    residual: float
    rho: BoundaryField
    data: List[GroundStateData] = field(repr=False)
    defect: float = 0.0

    @property
    def critical(self) -> bool:
        return self.residual <= NOT_CRITICAL_RESIDUAL


def _arc_sides(p: Partition, arc: InterfaceArc, data: List[GroundStateData], points):
    return data[arc.left].normal_derivative(arc, points), data[arc.right].normal_derivative(arc, points)


def criticality(p: Partition, frame: Optional[NormalFrame] = None, data: Optional[List[GroundStateData]] = None,
                n: int = DEFAULT_ARC_SAMPLES, grid: int = DEFAULT_N, strict: bool = False) -> CriticalityData:
    """Match the normal derivatives of the ground states across every arc.

    The ratios |a_j| / |a_i| are fitted per adjacent pair in L2 over the
    shared arcs and propagated along a breadth-first spanning tree of the
    adjacency graph; the residual is measured on all arcs, so inconsistent
    cycles show up there.

    Args:
        p (Partition): Partition without slits
        frame (NormalFrame): Normal frame
        data (List[GroundStateData]): Ground states, computed when missing
        n (int): Samples per arc
        strict (bool): Raise NotCritical instead of returning a non-critical result
    Returns:
        CriticalityData: Coefficients, residual and weight
    Raises:
        InvalidGeometry: If the partition has slits or a disconnected adjacency graph
        NotCritical: In strict mode, if the residual exceeds the threshold
    """
    if p.has_slits():
        raise InvalidGeometry("Criticality is not defined for partitions with slits")
    data = data or groundstate_data(p, grid)
    values = np.array([d.value for d in data])
    defect = float(values.max() - values.min())
    if defect > 1e-6 * values.max():
        logger.warning(f"Partition is not an equipartition: defect {defect:.3e}")

    graph = p.adjacency_graph()
    if not nx.is_connected(graph):
        raise InvalidGeometry("Adjacency graph is not connected")
    log_a = np.zeros(p.k)
    for i, j in nx.bfs_edges(graph, 0):
        num = den = 0.0
        for arc_id in graph.edges[i, j]["arcs"]:
            arc = p.interfaces[arc_id]
            pts, w = _arc_rule(arc, n)
            gl, gr = _arc_sides(p, arc, data, pts)
            gi, gj = (gl, gr) if arc.left == i else (gr, gl)
            num += float(np.dot(w, gi ** 2))
            den += float(np.dot(w, gj ** 2))
        log_a[j] = log_a[i] + 0.5 * math.log(num / den)
    a = np.exp(log_a)
    a /= np.linalg.norm(a)

    def rho(points, arc):
        gl, gr = _arc_sides(p, arc, data, points)
        return 0.5 * (np.abs(a[arc.left] * gl) + np.abs(a[arc.right] * gr))

    weight = BoundaryField.from_function(p, rho, n, zero_corners=True)
    mismatch = 0.0
    t, _ = clenshaw_curtis(n)
    for arc in p.interfaces:
        gl, gr = _arc_sides(p, arc, data, arc.point(t))
        mismatch = max(mismatch, float(np.max(np.abs(np.abs(a[arc.left] * gl) - np.abs(a[arc.right] * gr)))))
    scale = weight.sup()
    residual = mismatch / scale if scale > 0 else math.inf
    result = CriticalityData(a, residual, weight, data, defect)
    logger.info(f"Criticality residual {residual:.3e}, coefficients {np.round(a, 10).tolist()}")
    if not result.critical:
        logger.warning(f"Partition is not critical: residual {residual:.3e}")
        if strict:
            raise NotCritical(f"Criticality residual {residual:.3e} above {NOT_CRITICAL_RESIDUAL}", result)
    return result


def tree_bumps(p: Partition) -> List[DeformationField]:
    """One bump deformation per spanning-tree edge, on the longest arc of the edge."""
    graph = p.adjacency_graph()
    bumps = []
    for i, j in nx.bfs_edges(graph, 0):
        arc_id = max(graph.edges[i, j]["arcs"], key=lambda a: p.interfaces[a].length)
        bumps.append(arc_bump_field(p.interfaces[arc_id]))
    if len(bumps) != p.k - 1:
        raise InvalidGeometry("Adjacency graph is not connected")
    return bumps


def project_equipartition_tangent(X: DeformationField, p: Partition, data: List[GroundStateData],
                                  n: int = DEFAULT_ARC_SAMPLES) -> DeformationField:
    """Correct X by k - 1 bump deformations so that all first variations agree.

    Args:
        X (DeformationField): Deformation
        p (Partition): Partition
        data (List[GroundStateData]): Ground states
        n (int): Samples per arc
    Returns:
        DeformationField: The corrected deformation
    Raises:
        NumericalError: If the correction system is singular
    """
    bumps = tree_bumps(p)
    if not bumps:
        return X
    base = equipartition_integrals(X, data, n)
    cols = np.stack([equipartition_integrals(b, data, n) for b in bumps], axis=1)
    A = cols[:-1] - cols[-1][None, :]
    rhs = -(base[:-1] - base[-1])
    try:
        coef = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Bump correction system is singular: {str(e)}")
    logger.debug(f"Tangent projection coefficients {coef}")
    out = X
    for c, b in zip(coef, bumps):
        out = out + b.scale(float(c))
    out.name = f"P({X.name})"
    return out


class BorderedSystem:
    """
    This class solves Helmholtz problems on one subdomain mesh at the ground
    state energy, with the constraint int u psi = 0 carried by a multiplier.

    Attributes:
        operator (DiscreteOperator): Subdomain operator
        value (float): Discrete ground state energy
        H (np.ndarray): A - value * B on all reduced coordinates
    """

    def __init__(self, operator: DiscreteOperator, value: float, vector: np.ndarray):
        self.operator = operator
        self.value = value
        self.H = operator.A_full - value * operator.B_full
        psi = operator.embed(vector)
        self.b_psi = operator.B_full @ psi
        self.free = operator.free
        self.fixed = np.flatnonzero(operator.pinned)
        f = self.free
        size = len(f)
        K = np.zeros((size + 1, size + 1))
        K[:size, :size] = self.H[np.ix_(f, f)]
        K[:size, size] = self.b_psi[f]
        K[size, :size] = self.b_psi[f]
        self._lu = linalg.lu_factor(K, check_finite=False)
        pivots = np.abs(np.diag(self._lu[0]))
        if np.min(pivots) <= 1e-14 * np.max(pivots):
            raise NumericalError("Helmholtz system is singular")

    @classmethod
    def from_state(cls, state: DiscreteGroundState) -> "BorderedSystem":
        return cls(state.operator, state.value, state.vector)

    def boundary_points(self) -> np.ndarray:
        return self.operator.dof_points[self.fixed]

    def solve(self, g: np.ndarray) -> np.ndarray:
        """Extensions of Dirichlet data g (pinned coordinates x columns) to all reduced coordinates."""
        g = np.asarray(g, dtype=float).reshape(len(self.fixed), -1)
        f = self.free
        H_fp = self.H[np.ix_(f, self.fixed)]
        rhs = np.vstack([-H_fp @ g, -(self.b_psi[self.fixed] @ g)[None, :]])
        sol = linalg.lu_solve(self._lu, rhs, check_finite=False)
        W = np.zeros((len(self.operator.pinned), g.shape[1]))
        W[self.fixed] = g
        W[f] = sol[:-1]
        return W

    def form(self, W1: np.ndarray, W2: Optional[np.ndarray] = None) -> np.ndarray:
        """int grad u . grad v - lambda u v for extension columns."""
        W2 = W1 if W2 is None else W2
        return W1.T @ self.H @ W2


def _on_arc(arc: InterfaceArc, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    rel = points - np.array(arc.start)[None, :]
    along = rel @ arc.direction
    across = rel @ arc.normal
    return (np.abs(across) < tol) & (along > tol) & (along < arc.length - tol)


def _arc_breaks(arc: InterfaceArc, op: DiscreteOperator) -> np.ndarray:
    """Arc parameters of the cell corners on the arc, with both ends."""
    corners = []
    for block in op.blocks:
        c = block.cell
        x, y = block.to_cartesian(np.array([c.u0, c.u1, c.u0, c.u1]), np.array([c.v0, c.v0, c.v1, c.v1]))
        corners.append(np.column_stack([x, y]))
    corners = np.vstack(corners)
    inner = arc.param(corners[_on_arc(arc, corners)])
    return np.unique(np.round(np.concatenate([[-1.0, 1.0], inner]), 12))


class HelmholtzSolver:
    """
    This class evaluates the two-sided Dirichlet-to-Neumann form of a partition.

    For boundary data f on the arcs, u_i solves the Helmholtz problem on
    subdomain i at its ground state energy with u_i = chi_i f on its arcs,
    zero on the outer boundary and at corners, and int u_i psi_i = 0. The
    form is the sum of int |grad u_i|^2 - lambda_i u_i^2.

    Attributes:
        partition (Partition): Partition
        frame (NormalFrame): Normal frame giving chi_i
        systems (List[BorderedSystem]): One per subdomain
    """

    def __init__(self, p: Partition, frame: NormalFrame, n: int = DEFAULT_N,
                 states: Optional[List[DiscreteGroundState]] = None):
        if p.has_slits():
            raise InvalidGeometry("Helmholtz extensions are not defined for partitions with slits")
        self.partition = p
        self.frame = frame
        states = states or subdomain_ground_states(p, n)
        self.systems = [BorderedSystem.from_state(s) for s in states]

    def data(self, sid: int, fields: Sequence[BoundaryField]) -> np.ndarray:
        """Dirichlet data chi_i f at the pinned coordinates of subdomain `sid`."""
        system = self.systems[sid]
        pts = system.boundary_points()
        G = np.zeros((len(pts), len(fields)))
        for arc in self.partition.arcs_of(sid):
            mask = _on_arc(arc, pts)
            if not np.any(mask):
                continue
            chi = self.frame.chi(arc, sid)
            for c, f in enumerate(fields):
                G[mask, c] = chi * f.evaluate_points(arc.id, pts[mask])
        return G

    def extend(self, fields: Sequence[BoundaryField]) -> List[np.ndarray]:
        return [system.solve(self.data(sid, fields)) for sid, system in enumerate(self.systems)]

    def gram(self, fields: Sequence[BoundaryField]) -> np.ndarray:
        ext = self.extend(fields)
        G = sum(system.form(W) for system, W in zip(self.systems, ext))
        return 0.5 * (G + G.T)

    def form(self, f1: BoundaryField, f2: Optional[BoundaryField] = None) -> float:
        if f2 is None:
            return float(self.gram([f1])[0, 0])
        return float(self.gram([f1, f2])[0, 1])

    def boundary_gram(self, fields: Sequence[BoundaryField], m: int = DEFAULT_ARC_SAMPLES) -> np.ndarray:
        """Gram matrix of sum_i int_{arcs of i} u_i d u_i/d nu_i, from the normal derivatives of the extensions.

        Equals `gram` up to discretization error, since u_i vanishes on the
        outer boundary and is orthogonal to psi_i.
        """
        ext = self.extend(fields)
        t, w = gauss_legendre(m)
        G = np.zeros((len(fields), len(fields)))
        for sid, (system, W) in enumerate(zip(self.systems, ext)):
            op = system.operator
            for arc in self.partition.arcs_of(sid):
                nu = arc.outward_sign(sid) * arc.normal
                breaks = _arc_breaks(arc, op)
                for a, b in zip(breaks[:-1], breaks[1:]):
                    pts = arc.point(0.5 * (a + b) + 0.5 * (b - a) * t)
                    weight = 0.25 * (b - a) * arc.length * w
                    U = np.column_stack([op.evaluate(W[:, c], pts, full=True) for c in range(W.shape[1])])
                    dU = np.column_stack([op.gradient(W[:, c], pts, full=True) @ nu for c in range(W.shape[1])])
                    G += U.T @ (weight[:, None] * dU)
        return 0.5 * (G + G.T)

    def boundary_form(self, f1: BoundaryField, f2: Optional[BoundaryField] = None) -> float:
        if f2 is None:
            return float(self.boundary_gram([f1])[0, 0])
        return float(self.boundary_gram([f1, f2])[0, 1])


def dtn_form(p: Partition, frame: NormalFrame, f1: BoundaryField, f2: Optional[BoundaryField] = None,
             n: int = DEFAULT_N, solver: Optional[HelmholtzSolver] = None) -> float:
    """Two-sided Dirichlet-to-Neumann form a(f1, f2)."""
    solver = solver or HelmholtzSolver(p, frame, n)
    return solver.form(f1, f2)


def hessian_form(p: Partition, frame: NormalFrame, crit: CriticalityData, X1: DeformationField,
                 X2: Optional[DeformationField] = None, n: int = DEFAULT_N, arc_samples: int = DEFAULT_ARC_SAMPLES,
                 solver: Optional[HelmholtzSolver] = None) -> float:
    """Hessian of the partition energy at a critical partition, 2 a(rho X1 . nu, rho X2 . nu).

    The form is integrated on the arcs from the normal derivatives of the
    Helmholtz extensions, so it is computed independently of `dtn_form`,
    which integrates the extensions over the subdomains.

    Args:
        p (Partition): Critical partition
        frame (NormalFrame): Normal frame
        crit (CriticalityData): Criticality data with the weight rho
        X1 (DeformationField): First deformation, tangent to equipartitions
        X2 (DeformationField): Second deformation, X1 when omitted
        n (int): Grid size of the Helmholtz solves
    Returns:
        float: The form value
    Raises:
        NumericalError: If a Helmholtz system is singular
    """
    if crit.residual > 1e-6:
        logger.warning(f"Hessian evaluated at a partition with criticality residual {crit.residual:.3e}")
    solver = solver or HelmholtzSolver(p, frame, n)
    f1 = crit.rho * X1.normal_trace(p, frame, arc_samples)
    f2 = None if X2 is None else crit.rho * X2.normal_trace(p, frame, arc_samples)
    return 2.0 * solver.boundary_form(f1, f2)


def moment_fields(p: Partition, frame: NormalFrame, data: List[GroundStateData],
                  n: int = DEFAULT_ARC_SAMPLES) -> List[BoundaryField]:
    """chi_i d psi_i/d nu_i on the arcs of subdomain i, zero elsewhere, one field per subdomain."""
    fields = []
    for d in data:
        def q(points, arc, _d=d):
            if _d.subdomain not in (arc.left, arc.right):
                return np.zeros(len(points))
            return frame.chi(arc, _d.subdomain) * _d.normal_derivative(arc, points)
        fields.append(BoundaryField.from_function(p, q, n))
    return fields


def moment_residuals(f: BoundaryField, moments: List[BoundaryField]) -> np.ndarray:
    return np.array([f.l2_inner(q) for q in moments])


def project_moments(basis: Sequence[BoundaryField], p: Partition, frame: NormalFrame,
                    data: List[GroundStateData], n: Optional[int] = None) -> List[BoundaryField]:
    """L2-orthogonal projection of boundary fields onto the moment-constrained subspace.

    The constraint fields are linearly dependent at a critical partition, so
    the correction uses a least-squares solve.
    """
    if not basis:
        return []
    moments = moment_fields(p, frame, data, n or basis[0].n)
    Q = np.array([[qi.l2_inner(qj) for qj in moments] for qi in moments])
    out = []
    for f in basis:
        coef, *_ = np.linalg.lstsq(Q, moment_residuals(f, moments), rcond=1e-10)
        g = f
        for c, q in zip(coef, moments):
            g = g - q * float(c)
        out.append(g)
    return out


def bump_basis(p: Partition, size: int = DEFAULT_BASIS_SIZE, n: int = DEFAULT_ARC_SAMPLES) -> List[BoundaryField]:
    """Per-arc functions (1 - t^2) T_l(t), l < size, each supported on a single arc."""
    basis = []
    for arc in p.interfaces:
        for l in range(size):
            coeffs = np.zeros(l + 1)
            coeffs[l] = 1.0

            def f(points, other, _arc=arc, _c=coeffs):
                if other.id != _arc.id:
                    return np.zeros(len(points))
                t = np.clip(_arc.param(points), -1.0, 1.0)
                return (1.0 - t * t) * chebyshev.chebval(t, _c)
            basis.append(BoundaryField.from_function(p, f, n, zero_corners=True))
    return basis


@dataclass
class DtnIndex:
    """Gram matrix of the Dirichlet-to-Neumann form on a finite basis.

    Attributes:
        matrix (np.ndarray): G_ab = a(f_a, f_b) on the projected basis
        eigenvalues (np.ndarray): Eigenvalues of G relative to the L2 Gram matrix of the basis
        negative (int): Count below -threshold
        zero (int): Count within the threshold
        basis_size (int): Number of basis fields given
        rank (int): Dimension spanned after projection
        threshold (float): Zero threshold
    """
    matrix: np.ndarray
    eigenvalues: np.ndarray
    negative: int
    zero: int
    basis_size: int
    rank: int
    threshold: float


def dtn_form_matrix(p: Partition, frame: NormalFrame, crit: CriticalityData,
                    basis: Sequence[BoundaryField], n: int = DEFAULT_N, zero_tol: float = INDEX_ZERO_TOL,
                    solver: Optional[HelmholtzSolver] = None) -> DtnIndex:
    """Gram matrix of the Dirichlet-to-Neumann form and its index counts.

    The basis is first projected onto the moment constraints; the counts are
    those of the pencil (G, M) on the span, M the L2 Gram matrix.

    Args:
        p (Partition): Partition
        frame (NormalFrame): Normal frame
        crit (CriticalityData): Criticality data supplying the ground states
        basis (Sequence[BoundaryField]): Boundary fields
        n (int): Grid size of the Helmholtz solves
        zero_tol (float): Zero threshold relative to the largest eigenvalue
    Returns:
        DtnIndex: Matrix and counts
    """
    solver = solver or HelmholtzSolver(p, frame, n)
    projected = project_moments(basis, p, frame, crit.data)
    G = solver.gram(projected)
    M = np.array([[fa.l2_inner(fb) for fb in projected] for fa in projected])
    m_vals, m_vecs = np.linalg.eigh(0.5 * (M + M.T))
    keep = m_vals > 1e-10 * np.max(m_vals)
    V = m_vecs[:, keep] / np.sqrt(m_vals[keep])[None, :]
    mu = np.linalg.eigvalsh(V.T @ G @ V)
    threshold = zero_tol * float(np.max(np.abs(mu))) if len(mu) else 0.0
    negative = int(np.sum(mu < -threshold))
    zero = int(np.sum(np.abs(mu) <= threshold))
    logger.info(f"DtN index on {len(basis)} fields (rank {int(keep.sum())}): n- = {negative}, n0 = {zero}")
    return DtnIndex(G, mu, negative, zero, len(basis), int(keep.sum()), threshold)


def negative_direction_22(alpha: float, crit: CriticalityData, frame: NormalFrame,
                          n: int = DEFAULT_ARC_SAMPLES) -> DeformationField:
    """Deformation of the (2,2) cross with rho X . nu equal to the negative DtN profile.

    X . nu = f / rho on every arc, cut off smoothly on a ball of radius
    0.05 * (shortest arm) around the centre where rho vanishes. The field
    points along the frame normal in a thin band around each arc.

    Args:
        alpha (float): Aspect ratio with 5/3 < alpha^2 < 4
        crit (CriticalityData): Criticality data of the cross
        frame (NormalFrame): Normal frame
        n (int): Samples per arc
    Returns:
        DeformationField: The deformation
    """
    profile = dtn_negative_profile_22(alpha, n)
    p = crit.rho.partition
    center = np.array(p.interior_corners()[0].point)
    cutoff = CORNER_CUTOFF_FRACTION * min(a.length for a in p.interfaces)
    band = 0.5 * cutoff
    floor = 1e-12 * crit.rho.sup()

    def trace(points, arc):
        d = np.linalg.norm(points - center[None, :], axis=1)
        mol = 1.0 - smooth_bump(d, -cutoff, cutoff)
        r = crit.rho.evaluate_points(arc.id, points)
        f = cross_profile(profile.gamma, points)
        safe = np.where(r > floor, r, 1.0)
        return np.where(r > floor, f * mol / safe, 0.0)

    def func(points):
        out = np.zeros((len(points), 2))
        for arc in p.interfaces:
            rel = points - np.array(arc.start)[None, :]
            along = rel @ arc.direction
            across = rel @ arc.normal
            inside = (along >= 0) & (along <= arc.length) & (np.abs(across) < band)
            if not np.any(inside):
                continue
            foot = np.array(arc.start)[None, :] + along[inside, None] * arc.direction[None, :]
            amp = trace(foot, arc) * smooth_bump(across[inside], -band, band)
            out[inside] += amp[:, None] * frame.normal(arc)[None, :]
        return out

    return DeformationField(func, corner_radius=None, name="negative-22")


def family_first_variation(family: DomainFamily, n: int = DEFAULT_N) -> float:
    """lambda' of a family by the boundary formula.

    Families with a closed-form reference state use it directly; partition
    families return the largest first variation over their subdomains.
    """
    X = family.deformation()
    state = family.reference_state()
    if state is not None:
        return hadamard_first(state, X)
    partition = getattr(family, "partition", None)
    if partition is None:
        raise DomainError(f"Family {family.name} has no reference state")
    return max(hadamard_first(d, X) for d in groundstate_data(partition, n))


@dataclass
class SecondVariation:
    """Second derivative of a disk eigenvalue along a smooth family.

    Attributes:
        value (float): lambda''
        first (float): lambda'
        w_term (float): Boundary integral of 2 w dw/dnu
        boundary_term (float): Remaining boundary integral
    """
    value: float
    first: float
    w_term: float
    boundary_term: float


def second_variation_c3(family: DomainFamily, mode: Optional[DiskModeState] = None, n: int = DEFAULT_N,
                        samples: int = 256) -> SecondVariation:
    """Second variation of a simple disk eigenvalue by the boundary formula.

    lambda'' = int 2 w dw/dnu + (d psi/d nu)^2 (-X'.nu - (nu . DX nu)(X.nu)
    + T . grad(X.nu) + H (X.nu)^2) over the unit circle, with T the
    tangential part of X, H = 1, and w the shape derivative of psi:
    Helmholtz at lambda with w = -(X.nu) d psi/d nu on the circle and w
    orthogonal to psi.

    Args:
        family (DomainFamily): Family on the unit disk
        mode (DiskModeState): Simple eigenfunction, the ground state by default
        n (int): Grid size of the w solve
        samples (int): Boundary quadrature nodes
    Returns:
        SecondVariation: The value and its parts
    Raises:
        DomainError: If the mode is not simple
        NumericalError: If the w solve is singular
    """
    if not isinstance(family.reference_state(), DiskModeState):
        raise DomainError(f"Second variation is only available for disk families, not {family.name}")
    mode = mode or DiskModeState(0, 1)
    if mode.m != 0:
        raise DomainError("Second variation needs a simple eigenvalue (m = 0)")
    theta = 2 * np.pi * np.arange(samples) / samples
    nu = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    e_t = np.stack([-np.sin(theta), np.cos(theta)], axis=1)
    w = np.full(samples, 2 * np.pi / samples)

    X = family.velocity(nu)
    DX = family.velocity_jacobian(nu)
    Xp = family.velocity_derivative(nu)
    xn = np.sum(X * nu, axis=1)
    dpsi = mode.normal_derivative(nu, nu)
    nDn = np.einsum("ni,nij,nj->n", nu, DX, nu)
    dxn = np.einsum("ni,nij,nj->n", nu, DX, e_t) + np.sum(X * e_t, axis=1)
    tangential = np.sum(X * e_t, axis=1) * dxn
    boundary = float(np.dot(w, dpsi ** 2 * (-np.sum(Xp * nu, axis=1) - nDn * xn + tangential + xn ** 2)))
    first = -float(np.dot(w, dpsi ** 2 * xn))

    op = family.operator(0.0, n)
    pairs = sym_generalized_eigs(op.A, op.B, 3)
    pair = min(pairs, key=lambda q: abs(q.value - mode.value))
    system = BorderedSystem(op, pair.value, pair.vector)
    pts = system.boundary_points()
    r = np.linalg.norm(pts, axis=1)
    on_circle = np.abs(r - 1.0) < 1e-9
    g = np.zeros(len(pts))
    if np.any(on_circle):
        q = pts[on_circle]
        nq = q / r[on_circle, None]
        g[on_circle] = -np.sum(family.velocity(q) * nq, axis=1) * mode.normal_derivative(q, nq)
    W = system.solve(g)
    w_term = 2.0 * float(system.form(W)[0, 0])
    value = w_term + boundary
    logger.debug(f"{family.name}: lambda'={first:.10g}, lambda''={value:.10g} (w {w_term:.6g}, boundary {boundary:.6g})")
    return SecondVariation(value, first, w_term, boundary)


@dataclass
class FDReport:
    """Finite-difference derivative of a tracked eigenvalue.

    Attributes:
        order (int): 1 or 2
        value (float): Richardson-extrapolated derivative
        estimates (List[float]): Central differences per step
        steps (List[float]): Steps
        error (float): Estimated truncation error
        base (float): Value at t = 0
    """
    order: int
    value: float
    estimates: List[float]
    steps: List[float]
    error: float
    base: float


def _check_overlap(ref, other, t: float) -> None:
    if ref.vector is None or other.vector is None:
        return
    overlap = abs(float(ref.vector @ other.mass @ other.vector))
    overlap /= math.sqrt(float(ref.vector @ ref.mass @ ref.vector) * float(other.vector @ other.mass @ other.vector))
    if overlap < FD_OVERLAP_MIN:
        raise CrossingDetected(f"Eigenvector overlap {overlap:.3f} at t={t:g} below {FD_OVERLAP_MIN}")


def fd_oracle(family: DomainFamily, order: int = 1, n: int = DEFAULT_N,
              steps: Sequence[float] = FD_STEPS) -> FDReport:
    """Central finite differences of the tracked eigenvalue with Richardson extrapolation.

    Args:
        family (DomainFamily): Family
        order (int): Derivative order, 1 or 2
        n (int): Grid size
        steps (Sequence[float]): Steps h, each the double of the next
    Returns:
        FDReport: Derivative estimate
    Raises:
        DomainError: If the order is not 1 or 2
        CrossingDetected: If the tracked eigenvector changes character within the window
    """
    if order not in (1, 2):
        raise DomainError(f"Derivative order must be 1 or 2, got {order}")
    ref = family.solve(0.0, n)
    estimates = []
    for h in steps:
        plus = family.solve(h, n)
        minus = family.solve(-h, n)
        _check_overlap(ref, plus, h)
        _check_overlap(ref, minus, -h)
        if order == 1:
            estimates.append((plus.value - minus.value) / (2 * h))
        else:
            estimates.append((plus.value - 2 * ref.value + minus.value) / (h * h))
    if len(estimates) > 1:
        value = (4 * estimates[-1] - estimates[-2]) / 3
        error = abs(estimates[-1] - estimates[-2]) / 3
    else:
        value, error = estimates[0], math.nan
    logger.debug(f"{family.name} order {order}: {estimates} -> {value:.10g}")
    return FDReport(order, value, estimates, list(steps), error, ref.value)
