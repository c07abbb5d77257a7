"""This module extracts nodal partitions from discrete eigenfunctions.

The eigenfunction is sampled on a cell-centred grid inside every cell. Nodal
domains are the connected components of the sample graph whose edges join
neighbours of equal sign; neighbours across an anti-continuity side are
compared after the sign flip, so domains follow |u|. Nodal lines come from
marching squares on the same samples, including the strips between glued
cells.
"""

from dataclasses import dataclass, field
import logging
from typing import Dict, List, Tuple

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from pyspl.consts import DEFAULT_SAMPLES
from pyspl.mesh import Side
from pyspl.numerics import NumericalError
from pyspl.plap import DiscreteOperator

logger = logging.getLogger(__name__)

DEGENERATE_FRACTION = 0.5

# Square corners are numbered counter-clockwise in (u, v); edge e joins
# corner e and corner (e + 1) % 4. Each case lists the crossed edge pairs.
SEGMENT_TABLE = [
    [],
    [(3, 0)],
    [(0, 1)],
    [(1, 3)],
    [(1, 2)],
    None,
    [(0, 2)],
    [(2, 3)],
    [(2, 3)],
    [(0, 2)],
    None,
    [(1, 2)],
    [(1, 3)],
    [(0, 1)],
    [(3, 0)],
    [],
]


class DegenerateVector(NumericalError):
    pass


@dataclass
class NodalPartitionResult:
    """Nodal domains of an eigenfunction.

    Attributes:
        domain_count (int): Number of nodal domains
        polylines (List[np.ndarray]): Sign-change curves, each (points, 2)
        domain_energies (List[float]): Rayleigh quotient of the eigenfunction on each domain
        domain_sizes (List[int]): Samples per domain
        labels (np.ndarray): Domain of each sample, -1 for samples that are exactly zero
    """
    domain_count: int
    polylines: List[np.ndarray]
    domain_energies: List[float]
    domain_sizes: List[int]
    labels: np.ndarray = field(default=None, repr=False)

    @property
    def defect(self) -> float:
        """Equipartition defect max - min of the per-domain energies."""
        if not self.domain_energies:
            return 0.0
        return float(max(self.domain_energies) - min(self.domain_energies))


def _interp(p0, p1, v0, v1):
    t = v0 / (v0 - v1)
    return p0 + t * (p1 - p0)


def _square_segments(pts: np.ndarray, vals: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Zero-level segments of one sample square, corners counter-clockwise."""
    bits = vals > 0
    case = int(bits[0]) | int(bits[1]) << 1 | int(bits[2]) << 2 | int(bits[3]) << 3
    pairs = SEGMENT_TABLE[case]
    if pairs is None:
        # saddle: decide by the mean value
        center = float(np.mean(vals)) > 0
        pairs = [(0, 1), (2, 3)] if center == bool(bits[0]) else [(3, 0), (1, 2)]

    def cross(e):
        a, b = e, (e + 1) % 4
        return _interp(pts[a], pts[b], vals[a], vals[b])

    return [(cross(e0), cross(e1)) for e0, e1 in pairs]


def _grid_squares(points: np.ndarray, values: np.ndarray, segments: list) -> None:
    """Marching squares over a (rows, cols) grid of points and values."""
    pos = values > 0
    case = (pos[:-1, :-1].astype(int) | pos[1:, :-1] << 1 | pos[1:, 1:] << 2 | pos[:-1, 1:] << 3)
    for i, j in zip(*np.nonzero((case != 0) & (case != 15))):
        idx = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
        pts = np.array([points[a, b] for a, b in idx])
        vals = np.array([values[a, b] for a, b in idx])
        segments.extend(_square_segments(pts, vals))


def _side_samples(side: Side, m: int) -> Tuple[np.ndarray, np.ndarray]:
    line = np.arange(m)
    if side == Side.U0:
        return np.zeros(m, dtype=int), line
    if side == Side.U1:
        return np.full(m, m - 1), line
    if side == Side.V0:
        return line, np.zeros(m, dtype=int)
    return line, np.full(m, m - 1)


def _chain(segments: list, digits: int = 9) -> List[np.ndarray]:
    """Join segments sharing endpoints into polylines, split at junctions."""
    g = nx.Graph()
    coords: Dict[Tuple[float, float], np.ndarray] = {}
    for a, b in segments:
        ka = (round(float(a[0]), digits), round(float(a[1]), digits))
        kb = (round(float(b[0]), digits), round(float(b[1]), digits))
        if ka == kb:
            continue
        coords[ka], coords[kb] = a, b
        g.add_edge(ka, kb)
    lines = []
    seen = set()

    def walk(start, nxt):
        path = [start, nxt]
        seen.add(frozenset((start, nxt)))
        prev, cur = start, nxt
        while g.degree(cur) == 2:
            step = next(x for x in g.neighbors(cur) if x != prev)
            if frozenset((cur, step)) in seen:
                break
            seen.add(frozenset((cur, step)))
            path.append(step)
            prev, cur = cur, step
        return path

    for node in sorted(g.nodes):
        if g.degree(node) != 2:
            for nb in g.neighbors(node):
                if frozenset((node, nb)) not in seen:
                    lines.append(walk(node, nb))
    for node in sorted(g.nodes):
        for nb in g.neighbors(node):
            if frozenset((node, nb)) not in seen:
                lines.append(walk(node, nb))
    return [np.array([coords[k] for k in line]) for line in lines]


def extract_nodal_partition(vec: np.ndarray, op: DiscreteOperator,
                            samples: int = DEFAULT_SAMPLES) -> NodalPartitionResult:
    """Count the nodal domains of an eigenfunction and trace its nodal set.

    Args:
        vec (np.ndarray): Eigenvector in the operator's free coordinates
        op (DiscreteOperator): Operator the vector belongs to
        samples (int): Samples per direction and cell
    Returns:
        NodalPartitionResult: Domains, polylines and per-domain energies
    Raises:
        DegenerateVector: If the eigenfunction vanishes on more than half of the samples
    """
    m = samples
    values = op.block_values(vec)
    grids, points, weights, grad2 = [], [], [], []
    for block, vals in zip(op.blocks, values):
        u, v = block.sample_params(m)
        grid = block.evaluate_grid(vals, u, v)
        U, V = np.meshgrid(u, v, indexing="ij")
        x, y = block.to_cartesian(U.ravel(), V.ravel())
        det = np.abs(np.linalg.det(block.jacobian(U.ravel(), V.ravel())))
        cell = block.cell
        gx, gy = block.gradient(vals, U.ravel(), V.ravel())
        grids.append(grid)
        points.append(np.stack([x, y], axis=1).reshape(m, m, 2))
        weights.append(det * (cell.u1 - cell.u0) * (cell.v1 - cell.v0) / m ** 2)
        grad2.append(gx ** 2 + gy ** 2)

    flat = np.concatenate([g.ravel() for g in grids])
    # samples are classified by sign alone; only exact zeros belong to no domain
    zero = flat == 0.0
    if np.mean(zero) > DEGENERATE_FRACTION:
        raise DegenerateVector(f"Eigenfunction vanishes on {np.mean(zero):.0%} of the samples")

    per = m * m
    index = np.arange(per).reshape(m, m)
    rows, cols = [], []
    for c, grid in enumerate(grids):
        off = c * per
        same_u = grid[:-1, :] * grid[1:, :] > 0
        same_v = grid[:, :-1] * grid[:, 1:] > 0
        rows += [off + index[:-1, :][same_u], off + index[:, :-1][same_v]]
        cols += [off + index[1:, :][same_u], off + index[:, 1:][same_v]]

    segments = []
    for c, (grid, pts) in enumerate(zip(grids, points)):
        _grid_squares(pts, grid, segments)

    for glue in op.mesh.glues:
        s = -1.0 if glue.cut else 1.0
        ia, ja = _side_samples(glue.side_a, m)
        ib, jb = _side_samples(glue.side_b, m)
        va = grids[glue.cell_a][ia, ja]
        vb = s * grids[glue.cell_b][ib, jb]
        link = va * vb > 0
        rows.append(glue.cell_a * per + index[ia, ja][link])
        cols.append(glue.cell_b * per + index[ib, jb][link])
        strip_pts = np.stack([points[glue.cell_a][ia, ja], points[glue.cell_b][ib, jb]], axis=0)
        _grid_squares(strip_pts, np.stack([va, vb], axis=0), segments)

    r = np.concatenate(rows)
    c = np.concatenate(cols)
    n = len(flat)
    graph = sparse.coo_matrix((np.ones(len(r)), (r, c)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    labels = np.where(zero, -1, labels)

    keep = np.unique(labels[labels >= 0])

    w = np.concatenate(weights)
    g2 = np.concatenate(grad2)
    energies, sizes = [], []
    for d in keep:
        sel = labels == d
        energies.append(float(np.sum(w[sel] * g2[sel]) / np.sum(w[sel] * flat[sel] ** 2)))
        sizes.append(int(np.sum(sel)))
    remap = {int(d): i for i, d in enumerate(keep)}
    labels = np.array([remap.get(int(x), -1) for x in labels])

    polylines = _chain(segments)
    logger.debug(f"Nodal partition: {len(keep)} domains, {len(polylines)} polylines")
    return NodalPartitionResult(len(keep), polylines, energies, sizes, labels)
