"""This module assembles and solves the partition Laplacian.

Functions on the partition are glued across mesh sides: continuously inside
a subdomain and with a sign flip across interface arcs. The glue relations
are resolved by a signed union-find over coincident nodes, which yields a
sparse prolongation P from reduced coordinates to element nodes; the pencil
(P^T K P, P^T M P) restricted to the free coordinates is then solved densely.
"""

from dataclasses import dataclass, field
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from pyspl.block import Block, Mapping, make_block
from pyspl.consts import COORD_TOL, DEFAULT_N, DISK_WEDGE_DEFAULT, MULTIPLICITY_TOL
from pyspl.groundstate import DiscreteGroundState
from pyspl.mesh import CellKind, InvalidGeometry, Mesh, Side, SideCondition, geometric_breaks, tensor_mesh
from pyspl.numerics import EigenPair, NumericalError, sym_generalized_eigs
from pyspl.partition import CornerKind, NormalFrame, Partition

logger = logging.getLogger(__name__)

MIN_GRID = 8


class DegenerateGroundState(NumericalError):
    pass


class SignedUnionFind:
    """Union-find over nodes carrying the relation u_a = s * u_b, s = +/-1.

    A class is pinned when one of its nodes carries a Dirichlet condition and
    zero when its relations are contradictory (an odd cycle of sign flips).
    """

    def __init__(self, size: int):
        self.parent = np.arange(size)
        self.parity = np.ones(size, dtype=int)
        self.pinned = np.zeros(size, dtype=bool)
        self.zero = np.zeros(size, dtype=bool)

    def find(self, i: int) -> Tuple[int, int]:
        path = []
        while self.parent[i] != i:
            path.append(i)
            i = self.parent[i]
        root = i
        # compress, accumulating parities from the root down
        sign = 1
        for node in reversed(path):
            sign *= self.parity[node]
            self.parity[node] = sign
            self.parent[node] = root
        return root, (self.parity[path[0]] if path else 1)

    def union(self, a: int, b: int, sign: int) -> None:
        ra, sa = self.find(a)
        rb, sb = self.find(b)
        if ra == rb:
            if sa * sb != sign:
                self.zero[ra] = True
            return
        self.parent[ra] = rb
        self.parity[ra] = sa * sign * sb
        self.pinned[rb] |= self.pinned[ra]
        self.zero[rb] |= self.zero[ra]

    def pin(self, a: int) -> None:
        root, _ = self.find(a)
        self.pinned[root] = True


@dataclass
class DiscreteOperator:
    """Assembled partition Laplacian.

    Attributes:
        mesh (Mesh): Mesh
        blocks (List[Block]): One spectral element per cell
        offsets (np.ndarray): First global node index of each block
        P (sparse.csr_matrix): Prolongation from reduced coordinates to nodes
        pinned (np.ndarray): Dirichlet flag per reduced coordinate
        A_full (np.ndarray): Reduced stiffness including pinned coordinates
        B_full (np.ndarray): Reduced mass including pinned coordinates
        dof_points (np.ndarray): A Cartesian point per reduced coordinate
        gauge (np.ndarray): Sign per cell
        partition (Partition): Partition, if assembled from one
        frame (NormalFrame): Normal frame carried along for downstream forms
    """
    mesh: Mesh
    blocks: List[Block]
    offsets: np.ndarray
    P: sparse.csr_matrix
    pinned: np.ndarray
    A_full: np.ndarray
    B_full: np.ndarray
    dof_points: np.ndarray
    gauge: np.ndarray
    partition: Optional[Partition] = None
    frame: Optional[NormalFrame] = None
    _free: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self._free = np.flatnonzero(~self.pinned)

    @property
    def free(self) -> np.ndarray:
        return self._free

    @property
    def A(self) -> np.ndarray:
        return self.A_full[np.ix_(self._free, self._free)]

    @property
    def B(self) -> np.ndarray:
        return self.B_full[np.ix_(self._free, self._free)]

    @property
    def size(self) -> int:
        return len(self._free)

    def embed(self, vec: np.ndarray) -> np.ndarray:
        """Reduced vector with zeros at pinned coordinates."""
        full = np.zeros(len(self.pinned))
        full[self._free] = vec
        return full

    def node_values(self, vec: np.ndarray, full: bool = False) -> np.ndarray:
        """Physical node values from a free (or, with `full`, complete) reduced vector."""
        d = vec if full else self.embed(vec)
        values = self.P @ d
        signs = np.repeat(self.gauge, [b.size for b in self.blocks])
        return signs * values

    def locate(self, points: np.ndarray):
        """Block index and parameters of each point; -1 for points outside the mesh."""
        pts = np.atleast_2d(points)
        owner = np.full(len(pts), -1)
        U = np.zeros(len(pts))
        V = np.zeros(len(pts))
        for b, block in enumerate(self.blocks):
            todo = np.flatnonzero(owner < 0)
            if len(todo) == 0:
                break
            u, v = block.from_cartesian(pts[todo, 0], pts[todo, 1])
            u, v = np.atleast_1d(u), np.atleast_1d(v)
            c = block.cell
            tol = 1e-9
            inside = (u >= c.u0 - tol) & (u <= c.u1 + tol) & (v >= c.v0 - tol) & (v <= c.v1 + tol)
            hit = todo[inside]
            owner[hit] = b
            U[hit] = np.clip(u[inside], c.u0, c.u1)
            V[hit] = np.clip(v[inside], c.v0, c.v1)
        return owner, U, V

    def _located(self, vec, points, full):
        nodes = self.node_values(vec, full)
        owner, U, V = self.locate(points)
        if np.any(owner < 0):
            raise InvalidGeometry(f"{int(np.sum(owner < 0))} evaluation points lie outside the mesh")
        return nodes, owner, U, V

    def evaluate(self, vec: np.ndarray, points: np.ndarray, full: bool = False) -> np.ndarray:
        nodes, owner, U, V = self._located(vec, points, full)
        out = np.zeros(len(owner))
        for b in np.unique(owner):
            sel = owner == b
            off = self.offsets[b]
            out[sel] = self.blocks[b].evaluate(nodes[off:off + self.blocks[b].size], U[sel], V[sel])
        return out

    def gradient(self, vec: np.ndarray, points: np.ndarray, full: bool = False) -> np.ndarray:
        nodes, owner, U, V = self._located(vec, points, full)
        out = np.zeros((len(owner), 2))
        for b in np.unique(owner):
            sel = owner == b
            off = self.offsets[b]
            gx, gy = self.blocks[b].gradient(nodes[off:off + self.blocks[b].size], U[sel], V[sel])
            out[sel, 0], out[sel, 1] = gx, gy
        return out

    def block_values(self, vec: np.ndarray) -> List[np.ndarray]:
        nodes = self.node_values(vec)
        return [nodes[o:o + b.size] for o, b in zip(self.offsets, self.blocks)]


def assemble_mesh(mesh: Mesh, gauge: Optional[Sequence[int]] = None, mapping: Optional[Mapping] = None,
                  partition: Optional[Partition] = None, frame: Optional[NormalFrame] = None) -> DiscreteOperator:
    """Assemble the glued operator of a mesh.

    Args:
        mesh (Mesh): Mesh with glue records and side conditions
        gauge (Sequence[int]): Optional sign per cell
        mapping (Mapping): Optional deformation Jacobian evaluated at reference points
    Returns:
        DiscreteOperator: The operator
    Raises:
        InvalidGeometry: If glued sides do not match node for node
    """
    blocks = [make_block(c) for c in mesh.cells]
    sizes = [b.size for b in blocks]
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)
    total = int(sum(sizes))
    g = np.ones(len(blocks), dtype=int) if gauge is None else np.asarray(gauge, dtype=int)

    uf = SignedUnionFind(total)
    points = [np.stack(b.node_points(), axis=1) for b in blocks]
    for glue in mesh.glues:
        ia = blocks[glue.cell_a].side_nodes(glue.side_a)
        ib = blocks[glue.cell_b].side_nodes(glue.side_b)
        pa, pb = points[glue.cell_a][ia], points[glue.cell_b][ib]
        if len(ia) != len(ib) or not np.allclose(pa, pb, atol=1e-8):
            raise InvalidGeometry(f"Glued sides of cells {glue.cell_a} and {glue.cell_b} do not match")
        sign = (-1 if glue.cut else 1) * g[glue.cell_a] * g[glue.cell_b]
        for a, b in zip(offsets[glue.cell_a] + ia, offsets[glue.cell_b] + ib):
            uf.union(int(a), int(b), int(sign))

    glued = mesh.glued_sides()
    for c, block in enumerate(blocks):
        for side in Side:
            cond = mesh.condition(c, side)
            if (c, side) in glued:
                continue
            nodes = offsets[c] + block.side_nodes(side)
            if cond == SideCondition.COLLAPSED:
                for node in nodes[1:]:
                    uf.union(int(node), int(nodes[0]), 1)
            elif cond == SideCondition.DIRICHLET:
                for node in nodes:
                    uf.pin(int(node))

    roots = np.empty(total, dtype=int)
    signs = np.empty(total, dtype=int)
    for i in range(total):
        roots[i], signs[i] = uf.find(i)
    live = [r for r in np.unique(roots) if not uf.zero[r]]
    dof_of = {int(r): k for k, r in enumerate(live)}
    rows, cols, vals = [], [], []
    for i in range(total):
        k = dof_of.get(int(roots[i]))
        if k is not None:
            rows.append(i)
            cols.append(k)
            vals.append(signs[i])
    P = sparse.csr_matrix((vals, (rows, cols)), shape=(total, len(live)))
    pinned = np.array([bool(uf.pinned[r]) for r in live], dtype=bool)

    Ks, Ms = zip(*(b.operators(mapping) for b in blocks))
    K = sparse.block_diag(Ks, format="csr")
    M = sparse.block_diag(Ms, format="csr")
    A_full = (P.T @ K @ P).toarray()
    B_full = (P.T @ M @ P).toarray()
    A_full = 0.5 * (A_full + A_full.T)
    B_full = 0.5 * (B_full + B_full.T)

    all_points = np.concatenate(points)
    first = {}
    for i in range(total):
        k = dof_of.get(int(roots[i]))
        if k is not None and k not in first:
            first[k] = i
    dof_points = all_points[[first[k] for k in range(len(live))]] if live else np.zeros((0, 2))
    zeroed = int(sum(1 for r in np.unique(roots) if uf.zero[r]))
    logger.debug(f"Assembled {len(blocks)} blocks: {total} nodes, {len(live)} coordinates, "
                 f"{int(pinned.sum())} pinned, {zeroed} forced to zero")
    return DiscreteOperator(mesh, blocks, offsets, P, pinned, A_full, B_full, dof_points, g, partition, frame)


def assemble_plap(p: Partition, frame: Optional[NormalFrame] = None, n: int = DEFAULT_N,
                  gauge: Optional[Dict[int, int]] = None, mapping: Optional[Mapping] = None,
                  nu: Optional[Sequence[int]] = None, nv: Optional[Sequence[int]] = None) -> DiscreteOperator:
    """Assemble the partition Laplacian of a partition.

    Args:
        p (Partition): Partition
        frame (NormalFrame): Normal frame, kept for downstream forms
        n (int): Nodes per direction and cell
        gauge (Dict[int, int]): Optional sign per subdomain
        mapping (Mapping): Optional deformation of the domain
        nu (Sequence[int]): Optional node counts per u interval
        nv (Sequence[int]): Optional node counts per v interval
    Returns:
        DiscreteOperator: The operator
    Raises:
        InvalidGeometry: If the grid is too coarse or the mesh is inconsistent
    """
    if nu is None and nv is None and n < MIN_GRID:
        raise InvalidGeometry(f"Grid size {n} below {MIN_GRID}")
    mesh = p.mesh(n, nu, nv)
    cell_gauge = None
    if gauge is not None:
        cell_gauge = [gauge.get(s, 1) for s in p.cell_subdomain]
    return assemble_mesh(mesh, cell_gauge, mapping, p, frame)


@dataclass
class EigenResult:
    """Lowest eigenpairs with spectral bookkeeping.

    Attributes:
        values (np.ndarray): Eigenvalues, ascending
        vectors (np.ndarray): Eigenvectors in free coordinates, one per column
        residuals (np.ndarray): Residual norms
        positions (List[int]): Smallest position of each value, counted with multiplicity
        multiplicities (List[int]): Cluster size of each value within the computed list
        operator (DiscreteOperator): Operator the pairs belong to
    """
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    positions: List[int]
    multiplicities: List[int]
    operator: DiscreteOperator

    def pair(self, i: int) -> EigenPair:
        return EigenPair(float(self.values[i]), self.vectors[:, i], float(self.residuals[i]))

    def nearest(self, value: float) -> int:
        return int(np.argmin(np.abs(self.values - value)))

    def position_of(self, value: float) -> int:
        return self.positions[self.nearest(value)]

    def deficiency(self, index: int, k: int) -> int:
        return self.positions[index] - k


def spectral_positions(values: np.ndarray, tol: float = MULTIPLICITY_TOL) -> Tuple[List[int], List[int]]:
    positions, mults = [], []
    for lam in values:
        gap = tol * (1.0 + abs(lam))
        positions.append(int(np.sum(values < lam - gap)) + 1)
        mults.append(int(np.sum(np.abs(values - lam) <= gap)))
    return positions, mults


def solve_eigs(op: DiscreteOperator, count: int = 6, tol: float = MULTIPLICITY_TOL) -> EigenResult:
    """Lowest `count` eigenpairs of the operator with spectral positions.

    Args:
        op (DiscreteOperator): Operator
        count (int): Number of pairs
        tol (float): Relative multiplicity tolerance
    Returns:
        EigenResult: The pairs
    """
    pairs = sym_generalized_eigs(op.A, op.B, count)
    values = np.array([p.value for p in pairs])
    positions, mults = spectral_positions(values, tol)
    return EigenResult(values, np.stack([p.vector for p in pairs], axis=1),
                       np.array([p.residual for p in pairs]), positions, mults, op)


def _state(op: DiscreteOperator, vector: np.ndarray, value: float) -> DiscreteGroundState:
    return DiscreteGroundState(op, vector, value,
                               lambda pts: op.evaluate(vector, pts),
                               lambda pts: op.gradient(vector, pts))


def subdomain_operators(p: Partition, n: int = DEFAULT_N, nu=None, nv=None,
                        mapping: Optional[Mapping] = None) -> List[DiscreteOperator]:
    """Dirichlet operator of every subdomain on its own part of the partition mesh."""
    mesh = p.mesh(n, nu, nv)
    ops = []
    for sub in p.subdomains:
        submesh, _ = mesh.submesh(sub.cells)
        ops.append(assemble_mesh(submesh, mapping=mapping))
    return ops


def subdomain_ground_states(p: Partition, n: int = DEFAULT_N, nu=None, nv=None,
                            mapping: Optional[Mapping] = None,
                            tol: float = MULTIPLICITY_TOL) -> List[DiscreteGroundState]:
    """Discrete Dirichlet ground state of every subdomain, positive and L2-normalized.

    Raises:
        DegenerateGroundState: If the two lowest values of a subdomain coincide
    """
    states = []
    for sid, op in enumerate(subdomain_operators(p, n, nu, nv, mapping)):
        pairs = sym_generalized_eigs(op.A, op.B, 2)
        if len(pairs) > 1 and abs(pairs[1].value - pairs[0].value) <= tol * (1.0 + pairs[0].value):
            raise DegenerateGroundState(f"Subdomain {sid} has a multiple ground state {pairs[0].value:.10g}")
        v = pairs[0].vector
        if np.sum(v) < 0:
            v = -v
        states.append(_state(op, v, pairs[0].value))
        logger.debug(f"Subdomain {sid}: lambda_1 = {pairs[0].value:.12g}")
    return states


# Sector problem with a Dirichlet stub on theta = 0


def _interval_counts(breaks: Sequence[float], n: int, scale: float) -> List[int]:
    counts = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        rel = (hi - lo) / scale
        counts.append(max(4, min(n, int(round(4 + (n - 4) * math.sqrt(rel))))))
    return counts


def sector_breaks(a: float, wedge: float, levels: int = 6, ratio: float = 0.2) -> Tuple[List[float], List[float]]:
    """Radial and angular breaks graded toward the transition point (a, 0)."""
    rs = set(geometric_breaks(0.0, 1.0, a, ratio, levels))
    rs.update((0.4, 1.0) if a < 0.35 else (1.0,))
    rs.update(a * ratio ** l for l in range(1, 3))
    thetas = {0.0, wedge}
    thetas.update(wedge * ratio ** l for l in range(1, levels + 1))
    return sorted(_dedupe(rs)), sorted(_dedupe(thetas))


def _dedupe(values) -> List[float]:
    out = []
    for v in sorted(values):
        if not out or v - out[-1] > 1e-9:
            out.append(float(v))
    return out


def sector_operator(a: float, wedge: float = DISK_WEDGE_DEFAULT, n: int = 10, levels: int = 6,
                    ratio: float = 0.2, stub: Optional[float] = None) -> DiscreteOperator:
    """Assemble the mixed sector problem.

    Dirichlet on the circle and on theta = 0 for r < stub, Neumann on the
    rest of theta = 0 and on theta = wedge. The mesh is graded toward (a, 0);
    `stub` defaults to `a`.
    """
    stub = a if stub is None else stub
    rs, thetas = sector_breaks(a, wedge, levels, ratio)

    def condition(c, side, edge):
        if side == Side.U1:
            return SideCondition.DIRICHLET
        if side == Side.V0 and edge.value < COORD_TOL and edge.hi <= stub + COORD_TOL:
            return SideCondition.DIRICHLET
        return SideCondition.NEUMANN

    mesh = tensor_mesh(CellKind.POLAR, rs, thetas, _interval_counts(rs, n, 1.0),
                       _interval_counts(thetas, n, wedge), condition=condition)
    return assemble_mesh(mesh)


@dataclass
class SectorSolveResult:
    """Eigenpairs of the mixed sector problem and the nodal crossing of the x-axis.

    Attributes:
        eigen (EigenResult): Eigenpairs
        a (float): Transition point
        wedge (float): Sector angle
        index (int): Index of the relevant pair, -1 if none changes sign on the axis
        nodal_radius (float): Radius where the relevant pair's nodal set meets the axis
    """
    eigen: EigenResult
    a: float
    wedge: float
    index: int
    nodal_radius: float

    @property
    def value(self) -> float:
        return float(self.eigen.values[self.index])

    @property
    def mismatch(self) -> float:
        return self.nodal_radius - self.a


def axis_indicator(op: DiscreteOperator, vec: np.ndarray, a: float, radii: np.ndarray) -> np.ndarray:
    """Normal derivative on the Dirichlet stub (r < a), value on the Neumann part (r > a)."""
    eps = 1e-9
    pts = np.stack([radii, np.full_like(radii, eps)], axis=1)
    values = op.evaluate(vec, pts)
    grads = op.gradient(vec, pts)
    # u_theta / r on the axis is the y-derivative
    return np.where(radii < a, grads[:, 1], values)


def sector_mixed_solve(a: float, wedge: float = DISK_WEDGE_DEFAULT, n: int = 10, count: int = 6,
                       levels: int = 6, ratio: float = 0.2, samples: int = 2000) -> SectorSolveResult:
    """Solve the mixed sector problem and locate the nodal crossing of the x-axis.

    The relevant pair is the lowest non-ground pair whose axis indicator
    changes sign; its first sign change is the nodal radius.

    Args:
        a (float): Transition point in (0, 1)
        wedge (float): Sector angle
        n (int): Node count of the largest cells
        count (int): Pairs computed
    Returns:
        SectorSolveResult: The solution
    Raises:
        InvalidGeometry: If a is outside (0, 1)
    """
    if not 0.0 < a < 1.0:
        raise InvalidGeometry(f"Transition point must lie in (0, 1), got {a}")
    op = sector_operator(a, wedge, n, levels, ratio)
    eigen = solve_eigs(op, count)
    radii = np.linspace(1e-4, 1.0 - 1e-4, samples)
    index, radius = -1, float("nan")
    for i in range(1, len(eigen.values)):
        b = axis_indicator(op, eigen.vectors[:, i], a, radii)
        change = np.flatnonzero(np.sign(b[:-1]) * np.sign(b[1:]) < 0)
        if len(change):
            c = change[0]
            # linear interpolation of the crossing
            radius = float(radii[c] - b[c] * (radii[c + 1] - radii[c]) / (b[c + 1] - b[c]))
            index = i
            break
    logger.debug(f"Sector a={a:.6g}: pair {index}, nodal radius {radius:.6g}")
    return SectorSolveResult(eigen, a, wedge, index, radius)


def sector_neumann_reference(a: float, target: float, wedge: float = DISK_WEDGE_DEFAULT, n: int = 10,
                             count: int = 8, levels: int = 6, ratio: float = 0.2) -> float:
    """Eigenvalue nearest `target` on the same graded sector mesh with no Dirichlet stub."""
    op = sector_operator(a, wedge, n, levels, ratio, stub=0.0)
    eigen = solve_eigs(op, count)
    return float(eigen.values[eigen.nearest(target)])


def tip_coefficient(op: DiscreteOperator, vec: np.ndarray, tip: int, radius: float = 0.05,
                    samples: int = 64, terms: int = 3) -> float:
    """Square-root coefficient of an eigenfunction at a slit tip.

    Near a tip u = sum_k r^(k+1/2) (A_k cos((k+1/2) phi) + B_k sin((k+1/2) phi)),
    phi measured from the slit. The leading coefficient |(A_0, B_0)| vanishes
    exactly when the nodal set meets the tip in a triple junction. The value
    is returned relative to max |u|.

    Args:
        op (DiscreteOperator): Operator assembled from a partition
        vec (np.ndarray): Eigenvector
        tip (int): Corner id of the tip
        radius (float): Sampling radius
        samples (int): Points on the sampling circle
        terms (int): Half-integer modes fitted
    Returns:
        float: Relative leading coefficient
    Raises:
        InvalidGeometry: If the corner is not a slit tip
    """
    p = op.partition
    if p is None or p.corners[tip].kind != CornerKind.TIP:
        raise InvalidGeometry(f"Corner {tip} is not a slit tip")
    arc = next(a for a in p.interfaces if tip in (a.start_corner, a.end_corner))
    center = np.array(p.corners[tip].point)
    other = np.array(arc.end if arc.start_corner == tip else arc.start)
    d = (other - center) / np.linalg.norm(other - center)
    base = math.atan2(d[1], d[0])
    phi = 2 * np.pi * (np.arange(samples) + 0.5) / samples
    pts = center[None, :] + radius * np.stack([np.cos(base + phi), np.sin(base + phi)], axis=1)
    g = op.evaluate(vec, pts)
    cols = []
    for k in range(terms):
        h = k + 0.5
        cols += [radius ** h * np.cos(h * phi), radius ** h * np.sin(h * phi)]
    coef, *_ = np.linalg.lstsq(np.stack(cols, axis=1), g, rcond=None)
    scale = np.max(np.abs(op.node_values(vec)))
    return float(math.hypot(coef[0], coef[1]) / scale)
