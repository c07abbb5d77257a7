"""This module contains the partition model: subdomains, interface arcs,
corner points and normal frames, for rectangles cut by axis-aligned segments
and for disks cut along rays.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from pyspl.consts import COORD_TOL, MIN_ARC_LENGTH
from pyspl.mesh import CellKind, Edge, InvalidGeometry, Mesh, tensor_mesh

logger = logging.getLogger(__name__)

Point = Tuple[float, float]
Segment = Tuple[Point, Point]


class DomainKind(Enum):
    RECTANGLE = "rectangle"
    DISK = "disk"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class DomainShape:
    """Rectangle (0, alpha*pi) x (0, pi) or the unit disk."""
    kind: DomainKind
    alpha: float = 1.0

    @property
    def width(self) -> float:
        return self.alpha * math.pi if self.kind == DomainKind.RECTANGLE else 2.0

    @property
    def height(self) -> float:
        return math.pi if self.kind == DomainKind.RECTANGLE else 2.0

    @property
    def area(self) -> float:
        return self.width * self.height if self.kind == DomainKind.RECTANGLE else math.pi

    def bounds(self) -> Tuple[float, float, float, float]:
        if self.kind == DomainKind.RECTANGLE:
            return 0.0, self.width, 0.0, self.height
        return -1.0, 1.0, -1.0, 1.0

    def on_boundary(self, p: Point, tol: float = COORD_TOL) -> bool:
        x, y = p
        if self.kind == DomainKind.RECTANGLE:
            return (abs(x) < tol or abs(x - self.width) < tol or abs(y) < tol or abs(y - self.height) < tol)
        return abs(math.hypot(x, y) - 1.0) < tol

    def contains(self, p: Point, tol: float = COORD_TOL) -> bool:
        x, y = p
        if self.kind == DomainKind.RECTANGLE:
            return -tol <= x <= self.width + tol and -tol <= y <= self.height + tol
        return math.hypot(x, y) <= 1.0 + tol


class CornerKind(Enum):
    INTERIOR = 0
    TIP = 1
    BOUNDARY = 2

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class CornerPoint:
    id: int
    point: Point
    kind: CornerKind


@dataclass(frozen=True)
class InterfaceArc:
    """A straight interface segment.

    The reference normal is the right-hand normal of the direction
    start -> end; it is the outward normal of the left subdomain.

    Attributes:
        id (int): Arc index
        start (Point): First endpoint
        end (Point): Second endpoint
        start_corner (int): Corner id of the first endpoint, -1 if none
        end_corner (int): Corner id of the second endpoint, -1 if none
        left (int): Subdomain on the left of start -> end
        right (int): Subdomain on the right of start -> end
    """
    id: int
    start: Point
    end: Point
    start_corner: int
    end_corner: int
    left: int
    right: int

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])

    @property
    def direction(self) -> np.ndarray:
        d = np.array(self.end) - np.array(self.start)
        return d / np.linalg.norm(d)

    @property
    def normal(self) -> np.ndarray:
        d = self.direction
        return np.array([d[1], -d[0]])

    @property
    def is_slit(self) -> bool:
        return self.left == self.right

    def point(self, t) -> np.ndarray:
        """Points at parameters t in [-1, 1], shape (N, 2)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = 0.5 * (t + 1.0)
        a, b = np.array(self.start), np.array(self.end)
        return a[None, :] + s[:, None] * (b - a)[None, :]

    def param(self, points: np.ndarray) -> np.ndarray:
        """Parameters in [-1, 1] of points lying on the arc."""
        rel = np.atleast_2d(points) - np.array(self.start)[None, :]
        return 2.0 * (rel @ self.direction) / self.length - 1.0

    def outward_sign(self, subdomain: int) -> int:
        """+1 if the reference normal points out of `subdomain`, -1 otherwise."""
        if subdomain == self.left:
            return 1
        if subdomain == self.right:
            return -1
        raise InvalidGeometry(f"Subdomain {subdomain} does not border arc {self.id}")


@dataclass(frozen=True)
class RectTag:
    x0: float
    x1: float
    y0: float
    y1: float


@dataclass(frozen=True)
class SectorTag:
    theta0: float
    width: float
    radius: float = 1.0


AnalyticTag = Union[RectTag, SectorTag]


@dataclass(frozen=True)
class Subdomain:
    id: int
    cells: Tuple[int, ...]
    boundary_arcs: Tuple[Tuple[int, str], ...]
    analytic_tag: Optional[AnalyticTag] = None


@dataclass(frozen=True)
class MeshSpec:
    """Parameter-space description from which meshes of any resolution are built."""
    kind: CellKind
    us: Tuple[float, ...]
    vs: Tuple[float, ...]
    cut_edges: Tuple[Edge, ...]
    closed_v: bool = False

    def is_cut(self, edge: Edge) -> bool:
        for c in self.cut_edges:
            if (c.axis == edge.axis and abs(c.value - edge.value) < COORD_TOL
                    and c.lo - COORD_TOL <= edge.lo and edge.hi <= c.hi + COORD_TOL):
                return True
        return False

    def build(self, n: int = 24, nu: Optional[Sequence[int]] = None, nv: Optional[Sequence[int]] = None) -> Mesh:
        return tensor_mesh(self.kind, self.us, self.vs,
                           nu if nu is not None else n, nv if nv is not None else n,
                           cut=self.is_cut, closed_v=self.closed_v)


@dataclass
class Partition:
    """A partition of a rectangle or of the unit disk.

    Attributes:
        domain (DomainShape): Domain
        subdomains (List[Subdomain]): Subdomains, ids equal to list positions
        interfaces (List[InterfaceArc]): Interface arcs, ids equal to list positions
        corners (List[CornerPoint]): Interior corners, slit tips and boundary attachment points
        mesh_spec (MeshSpec): Cell layout
        cell_subdomain (List[int]): Subdomain of each cell
        cuts (List[Segment]): Cut segments as given to the builder
        sectors (int): Sector count for radial partitions, 0 otherwise
        rotation (float): Rotation of radial partitions
    """
    domain: DomainShape
    subdomains: List[Subdomain]
    interfaces: List[InterfaceArc]
    corners: List[CornerPoint]
    mesh_spec: MeshSpec
    cell_subdomain: List[int]
    cuts: List[Segment] = field(default_factory=list)
    sectors: int = 0
    rotation: float = 0.0

    @property
    def k(self) -> int:
        return len(self.subdomains)

    def mesh(self, n: int = 24, nu: Optional[Sequence[int]] = None, nv: Optional[Sequence[int]] = None) -> Mesh:
        return self.mesh_spec.build(n, nu, nv)

    def interior_corners(self) -> List[CornerPoint]:
        return [c for c in self.corners if c.kind == CornerKind.INTERIOR]

    def corner_points(self) -> np.ndarray:
        """Interior corners and tips, shape (N, 2)."""
        pts = [c.point for c in self.corners if c.kind != CornerKind.BOUNDARY]
        return np.array(pts).reshape(-1, 2)

    def arcs_of(self, subdomain: int) -> List[InterfaceArc]:
        return [a for a in self.interfaces if subdomain in (a.left, a.right)]

    def adjacency_graph(self) -> nx.Graph:
        """Subdomains adjacent iff they share an arc of positive length."""
        g = nx.Graph()
        g.add_nodes_from(range(self.k))
        for arc in self.interfaces:
            if arc.length <= MIN_ARC_LENGTH:
                continue
            if g.has_edge(arc.left, arc.right):
                g.edges[arc.left, arc.right]["arcs"].append(arc.id)
            else:
                g.add_edge(arc.left, arc.right, arcs=[arc.id])
        return g

    def has_slits(self) -> bool:
        return any(a.is_slit for a in self.interfaces)


class OrientationRule(Enum):
    COLORING = "coloring"
    DISK_SEQUENTIAL = "disk"
    REFERENCE = "reference"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class NormalFrame:
    """A unit normal per arc, stored as a sign relative to the reference normal.

    Attributes:
        signs (Tuple[int, ...]): s per arc; nu = s * arc.normal
    """
    signs: Tuple[int, ...]

    def chi(self, arc: InterfaceArc, subdomain: int) -> int:
        """chi_i = nu . nu_i for the subdomain on one side of the arc."""
        return self.signs[arc.id] * arc.outward_sign(subdomain)

    def normal(self, arc: InterfaceArc) -> np.ndarray:
        return self.signs[arc.id] * arc.normal

    def flipped(self) -> "NormalFrame":
        return NormalFrame(tuple(-s for s in self.signs))


def _validate_cut(alpha: float, cut: Segment) -> Segment:
    (x0, y0), (x1, y1) = cut
    width = alpha * math.pi
    if math.hypot(x1 - x0, y1 - y0) <= MIN_ARC_LENGTH:
        raise InvalidGeometry(f"Degenerate cut {cut}")
    if abs(x1 - x0) > COORD_TOL and abs(y1 - y0) > COORD_TOL:
        raise InvalidGeometry(f"Cut {cut} is neither vertical nor horizontal")
    for x, y in cut:
        if x < -COORD_TOL or x > width + COORD_TOL or y < -COORD_TOL or y > math.pi + COORD_TOL:
            raise InvalidGeometry(f"Cut {cut} leaves the rectangle")
    if abs(x1 - x0) <= COORD_TOL:
        lo, hi = sorted((y0, y1))
        return (x0, lo), (x0, hi)
    lo, hi = sorted((x0, x1))
    return (lo, y0), (hi, y0)


def _check_overlaps(cuts: List[Segment]) -> None:
    for i in range(len(cuts)):
        for j in range(i + 1, len(cuts)):
            (a0, a1), (b0, b1) = cuts[i], cuts[j]
            vertical_a = abs(a0[0] - a1[0]) <= COORD_TOL
            vertical_b = abs(b0[0] - b1[0]) <= COORD_TOL
            if vertical_a != vertical_b:
                continue
            axis = 0 if vertical_a else 1
            if abs(a0[axis] - b0[axis]) > COORD_TOL:
                continue
            other = 1 - axis
            overlap = min(a1[other], b1[other]) - max(a0[other], b0[other])
            if overlap > MIN_ARC_LENGTH:
                raise InvalidGeometry(f"Cuts {cuts[i]} and {cuts[j]} overlap")


def _components(mesh: Mesh) -> List[int]:
    g = nx.Graph()
    g.add_nodes_from(range(len(mesh.cells)))
    g.add_edges_from((gl.cell_a, gl.cell_b) for gl in mesh.glues if not gl.cut)
    components = sorted((sorted(c) for c in nx.connected_components(g)), key=lambda c: c[0])
    cell_subdomain = [0] * len(mesh.cells)
    for sid, comp in enumerate(components):
        for c in comp:
            cell_subdomain[c] = sid
    return cell_subdomain


def _rect_tag(mesh: Mesh, cells: List[int]) -> Optional[RectTag]:
    x0 = min(mesh.cells[c].u0 for c in cells)
    x1 = max(mesh.cells[c].u1 for c in cells)
    y0 = min(mesh.cells[c].v0 for c in cells)
    y1 = max(mesh.cells[c].v1 for c in cells)
    area = sum((mesh.cells[c].u1 - mesh.cells[c].u0) * (mesh.cells[c].v1 - mesh.cells[c].v0) for c in cells)
    if abs(area - (x1 - x0) * (y1 - y0)) < COORD_TOL * max(1.0, area):
        return RectTag(x0, x1, y0, y1)
    return None


def _key(p) -> Tuple[float, float]:
    return (round(float(p[0]), 9) + 0.0, round(float(p[1]), 9) + 0.0)


def _merge_edges(pieces: List[Tuple[Point, Point, int, int]], domain: DomainShape):
    """Merge elementary cut edges into arcs and classify their endpoints.

    Args:
        pieces: (start, end, left, right) elementary edges
    Returns:
        Tuple of the merged pieces and the corner list
    """
    incident = defaultdict(list)
    for idx, (a, b, _, _) in enumerate(pieces):
        incident[_key(a)].append(idx)
        incident[_key(b)].append(idx)

    def collinear_pass(vertex) -> bool:
        edges = incident[vertex]
        if len(edges) != 2:
            return False
        p, q = pieces[edges[0]], pieces[edges[1]]
        if (p[2], p[3]) != (q[2], q[3]):
            return False
        dp = np.subtract(p[1], p[0])
        dq = np.subtract(q[1], q[0])
        return abs(dp[0] * dq[1] - dp[1] * dq[0]) < COORD_TOL * np.linalg.norm(dp) * np.linalg.norm(dq)

    merged = []
    used = set()
    for idx, piece in enumerate(pieces):
        if idx in used:
            continue
        used.add(idx)
        start, end, left, right = piece
        # extend forward then backward through collinear same-pair vertices
        while collinear_pass(_key(end)):
            nxt = [e for e in incident[_key(end)] if e not in used]
            if not nxt:
                break
            used.add(nxt[0])
            end = pieces[nxt[0]][1]
        while collinear_pass(_key(start)):
            prv = [e for e in incident[_key(start)] if e not in used]
            if not prv:
                break
            used.add(prv[0])
            start = pieces[prv[0]][0]
        merged.append((start, end, left, right))

    corners = {}
    for vertex, edges in sorted(incident.items()):
        if collinear_pass(vertex):
            continue
        if domain.on_boundary(vertex):
            kind = CornerKind.BOUNDARY
        elif len(edges) == 1:
            kind = CornerKind.TIP
        else:
            kind = CornerKind.INTERIOR
        corners[vertex] = kind
    return merged, corners


def _assemble(domain: DomainShape, cell_subdomain: List[int], pieces,
              tags: Dict[int, AnalyticTag]) -> Tuple[List[Subdomain], List[InterfaceArc], List[CornerPoint]]:
    merged, corner_kinds = _merge_edges(pieces, domain)
    corner_ids = {}
    corners = []
    for vertex, kind in corner_kinds.items():
        corner_ids[vertex] = len(corners)
        corners.append(CornerPoint(len(corners), vertex, kind))

    merged.sort(key=lambda m: (min(m[2], m[3]), max(m[2], m[3]), _key(m[0]), _key(m[1])))
    arcs = []
    for start, end, left, right in merged:
        arcs.append(InterfaceArc(len(arcs), tuple(map(float, start)), tuple(map(float, end)),
                                 corner_ids.get(_key(start), -1), corner_ids.get(_key(end), -1), left, right))

    subdomains = []
    k = max(cell_subdomain) + 1
    for sid in range(k):
        cells = tuple(c for c, s in enumerate(cell_subdomain) if s == sid)
        bounds = []
        for arc in arcs:
            if arc.left == sid:
                bounds.append((arc.id, "left"))
            if arc.right == sid:
                bounds.append((arc.id, "right"))
        subdomains.append(Subdomain(sid, cells, tuple(bounds), tags.get(sid)))
    return subdomains, arcs, corners


def build_rect_partition(alpha: float, cuts: Sequence[Segment]) -> Partition:
    """Build a partition of (0, alpha*pi) x (0, pi) from axis-aligned cuts.

    Args:
        alpha (float): Aspect ratio
        cuts (Sequence[Segment]): Cut segments in absolute coordinates
    Returns:
        Partition: The partition
    Raises:
        InvalidGeometry: If a cut is degenerate, oblique, outside or overlapping
    """
    if alpha <= 0:
        raise InvalidGeometry(f"Aspect ratio must be positive, got {alpha}")
    domain = DomainShape(DomainKind.RECTANGLE, float(alpha))
    normalized = [_validate_cut(alpha, c) for c in cuts]
    _check_overlaps(normalized)

    xs = {0.0, domain.width}
    ys = {0.0, domain.height}
    cut_edges = []
    for (x0, y0), (x1, y1) in normalized:
        xs.update((x0, x1))
        ys.update((y0, y1))
        if abs(x1 - x0) <= COORD_TOL:
            cut_edges.append(Edge("u", x0, y0, y1))
        else:
            cut_edges.append(Edge("v", y0, x0, x1))
    xs = _dedupe(xs)
    ys = _dedupe(ys)
    spec = MeshSpec(CellKind.RECT, tuple(xs), tuple(ys), tuple(cut_edges))
    mesh = spec.build(2)
    cell_subdomain = _components(mesh)

    pieces = []
    for g in mesh.glues:
        if not g.cut:
            continue
        a, b = mesh.cells[g.cell_a], mesh.cells[g.cell_b]
        sa, sb = cell_subdomain[g.cell_a], cell_subdomain[g.cell_b]
        if g.side_a.axis == "u":
            # vertical edge, directed upward: left is the cell at smaller x
            pieces.append(((a.u1, a.v0), (a.u1, a.v1), sa, sb))
        else:
            # horizontal edge, directed in +x: left is the upper cell
            pieces.append(((a.u0, a.v1), (a.u1, a.v1), sb, sa))

    tags = {}
    for sid in range(max(cell_subdomain) + 1):
        tag = _rect_tag(mesh, [c for c, s in enumerate(cell_subdomain) if s == sid])
        if tag is not None:
            tags[sid] = tag

    subdomains, arcs, corners = _assemble(domain, cell_subdomain, pieces, tags)
    partition = Partition(domain, subdomains, arcs, corners, spec, cell_subdomain, list(normalized))
    logger.debug(f"Rectangle partition alpha={alpha}: {partition.k} subdomains, {len(arcs)} arcs, "
                 f"{len(partition.interior_corners())} interior corners")
    return partition


def _dedupe(values) -> List[float]:
    out = []
    for v in sorted(values):
        if not out or v - out[-1] > COORD_TOL:
            out.append(float(v))
    return out


def build_radial_partition(k: int, rotation: float = 0.0, r_breaks: Sequence[float] = (0.0, 1.0)) -> Partition:
    """Build the partition of the unit disk into k equal sectors.

    Sector i covers angles (rotation + 2*pi*i/k, rotation + 2*pi*(i+1)/k).
    Arc j lies on the ray at angle rotation + 2*pi*(j+1)/k, runs from the
    circle to the origin, and has sector j on its left and sector j+1 on its
    right, so that its reference normal is e_theta.

    For odd k the partition Laplacian is not the Dirichlet Laplacian of the
    disk: its spectrum consists of j_{m/2,l}^2 with odd m. For k = 3 the
    lowest value is j_{1/2,1}^2 = pi^2 (double) and the partition energy
    j_{3/2,1}^2 is the third eigenvalue.

    Args:
        k (int): Sector count, at least 2
        rotation (float): Angle of the first ray
        r_breaks (Sequence[float]): Radial breaks of the underlying mesh
    Returns:
        Partition: The partition
    Raises:
        InvalidGeometry: If k < 2
    """
    if k < 2:
        raise InvalidGeometry(f"A radial partition needs at least 2 sectors, got {k}")
    domain = DomainShape(DomainKind.DISK)
    thetas = [rotation + 2 * math.pi * i / k for i in range(k + 1)]
    cut_edges = tuple(Edge("v", t, 0.0, 1.0) for t in thetas[:-1])
    spec = MeshSpec(CellKind.POLAR, tuple(float(r) for r in r_breaks), tuple(thetas), cut_edges, closed_v=True)
    mesh = spec.build(2)
    n_r = len(r_breaks) - 1
    cell_subdomain = [c // n_r for c in range(len(mesh.cells))]

    corners = []
    origin_id = -1
    if k >= 3:
        origin_id = 0
        corners.append(CornerPoint(0, (0.0, 0.0), CornerKind.INTERIOR))
    arcs = []
    for j in range(k):
        theta = thetas[j + 1]
        outer = (math.cos(theta), math.sin(theta))
        corner_id = len(corners)
        corners.append(CornerPoint(corner_id, outer, CornerKind.BOUNDARY))
        arcs.append(InterfaceArc(j, outer, (0.0, 0.0), corner_id, origin_id, j, (j + 1) % k))

    subdomains = []
    for i in range(k):
        cells = tuple(c for c, s in enumerate(cell_subdomain) if s == i)
        bounds = ((i, "left"), ((i - 1) % k, "right"))
        subdomains.append(Subdomain(i, cells, bounds, SectorTag(thetas[i], 2 * math.pi / k)))
    partition = Partition(domain, subdomains, arcs, corners, spec, cell_subdomain, [], k, rotation)
    logger.debug(f"Radial partition k={k}, rotation={rotation}")
    return partition


def build_stub_partition(count: int, length: float, rotation: float = 0.0,
                         r_breaks: Optional[Sequence[float]] = None,
                         theta_breaks: Optional[Sequence[float]] = None) -> Partition:
    """Build a disk with `count` equally spaced radial slits of given length from the origin.

    The slits do not separate the disk, so the partition has one subdomain
    and `count` slit arcs. Extra breaks refine the mesh.

    Args:
        count (int): Number of slits
        length (float): Slit length in (0, 1)
        rotation (float): Angle of the first slit
        r_breaks (Sequence[float]): Radial breaks, must contain `length`
        theta_breaks (Sequence[float]): Angular breaks, must contain the slit angles
    Returns:
        Partition: The partition
    Raises:
        InvalidGeometry: If the slit length is outside (0, 1)
    """
    if not 0 < length < 1:
        raise InvalidGeometry(f"Slit length must lie in (0, 1), got {length}")
    domain = DomainShape(DomainKind.DISK)
    angles = [rotation + 2 * math.pi * i / count for i in range(count)]
    if theta_breaks is None:
        theta_breaks = [rotation + math.pi * i / count for i in range(2 * count + 1)]
    if r_breaks is None:
        r_breaks = (0.0, length, 1.0)
    if not any(abs(r - length) < COORD_TOL for r in r_breaks):
        raise InvalidGeometry("Radial breaks must contain the slit length")
    cut_edges = tuple(Edge("v", t, 0.0, length) for t in angles)
    spec = MeshSpec(CellKind.POLAR, tuple(float(r) for r in r_breaks), tuple(float(t) for t in theta_breaks),
                    cut_edges, closed_v=True)
    mesh = spec.build(2)
    cell_subdomain = [0] * len(mesh.cells)
    corners = [CornerPoint(0, (0.0, 0.0), CornerKind.INTERIOR if count >= 3 else CornerKind.TIP)]
    arcs = []
    for j, t in enumerate(angles):
        tip = (length * math.cos(t), length * math.sin(t))
        corners.append(CornerPoint(len(corners), tip, CornerKind.TIP))
        arcs.append(InterfaceArc(j, tip, (0.0, 0.0), len(corners) - 1, 0, 0, 0))
    subdomain = Subdomain(0, tuple(range(len(mesh.cells))), tuple((a.id, "left") for a in arcs))
    return Partition(domain, [subdomain], arcs, corners, spec, cell_subdomain, [], 0, rotation)


def check_bipartite(p: Partition) -> Optional[Dict[int, int]]:
    """Two-color the adjacency graph by BFS from the lowest subdomain id of each component.

    Args:
        p (Partition): Partition
    Returns:
        Optional[Dict[int, int]]: Color (0 or 1) per subdomain, or None if none exists
    """
    if p.has_slits():
        return None
    g = p.adjacency_graph()
    if not nx.is_bipartite(g):
        return None
    colors = {}
    for component in nx.connected_components(g):
        root = min(component)
        colors[root] = 0
        for u, v in nx.bfs_edges(g, root):
            colors[v] = 1 - colors[u]
    return colors


def orient_interfaces(p: Partition, convention: OrientationRule = OrientationRule.COLORING) -> NormalFrame:
    """Choose a unit normal per interface arc.

    COLORING points outward from the color-0 subdomains; DISK_SEQUENTIAL
    alternates along the rays of a radial partition, the last ray taking the
    outward normal of the first sector; REFERENCE keeps every reference normal.

    Args:
        p (Partition): Partition
        convention (OrientationRule): Orientation rule
    Returns:
        NormalFrame: The frame
    Raises:
        InvalidGeometry: If DISK_SEQUENTIAL is requested for a non-radial partition
    """
    if convention == OrientationRule.DISK_SEQUENTIAL:
        if p.sectors < 2:
            raise InvalidGeometry("The sequential disk rule needs a radial partition")
        k = p.sectors
        signs = [(-1) ** j for j in range(k - 1)] + [-1]
        return NormalFrame(tuple(signs))

    if convention == OrientationRule.COLORING:
        colors = check_bipartite(p)
        if colors is not None:
            return NormalFrame(tuple(1 if colors[a.left] == 0 else -1 for a in p.interfaces))
        logger.warning("Partition is not bipartite, falling back to reference normals")

    return NormalFrame(tuple(1 for _ in p.interfaces))
