"""This module contains the tensor cell meshes the discrete operators live on.

A mesh is a list of cells in a rectangle of parameter space, either
Cartesian (u = x, v = y) or polar (u = r, v = theta), together with the glue
records that identify sides shared by two cells and the boundary condition of
every other side.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from pyspl.consts import COORD_TOL

logger = logging.getLogger(__name__)


class InvalidGeometry(ValueError):
    pass


class CellKind(Enum):
    RECT = 0
    POLAR = 1

    def __str__(self):
        return self.name


class Side(Enum):
    U0 = 0
    U1 = 1
    V0 = 2
    V1 = 3

    def __str__(self):
        return self.name

    @property
    def axis(self) -> str:
        return "u" if self in (Side.U0, Side.U1) else "v"


class SideCondition(Enum):
    DIRICHLET = 0
    NEUMANN = 1
    COLLAPSED = 2

    def __str__(self):
        return self.name


class Edge(NamedTuple):
    """A cell side in parameter space: `axis` = value, the other coordinate in [lo, hi]."""
    axis: str
    value: float
    lo: float
    hi: float


@dataclass(frozen=True)
class Cell:
    kind: CellKind
    u0: float
    u1: float
    v0: float
    v1: float
    nu: int
    nv: int

    def edge(self, side: Side) -> Edge:
        if side == Side.U0:
            return Edge("u", self.u0, self.v0, self.v1)
        if side == Side.U1:
            return Edge("u", self.u1, self.v0, self.v1)
        if side == Side.V0:
            return Edge("v", self.v0, self.u0, self.u1)
        return Edge("v", self.v1, self.u0, self.u1)

    def contains(self, u: float, v: float, tol: float = COORD_TOL) -> bool:
        return self.u0 - tol <= u <= self.u1 + tol and self.v0 - tol <= v <= self.v1 + tol


@dataclass(frozen=True)
class Glue:
    cell_a: int
    side_a: Side
    cell_b: int
    side_b: Side
    cut: bool = False


@dataclass
class Mesh:
    """Cells, glue records and side conditions.

    Attributes:
        cells (List[Cell]): Cells, indexed row-major from the lowest v interval
        glues (List[Glue]): Shared sides
        conditions (Dict[Tuple[int, Side], SideCondition]): Conditions of unglued sides
    """
    cells: List[Cell]
    glues: List[Glue] = field(default_factory=list)
    conditions: Dict[Tuple[int, Side], SideCondition] = field(default_factory=dict)

    def condition(self, cell: int, side: Side) -> SideCondition:
        return self.conditions.get((cell, side), SideCondition.DIRICHLET)

    def glued_sides(self) -> Dict[Tuple[int, Side], Glue]:
        sides = {}
        for g in self.glues:
            sides[(g.cell_a, g.side_a)] = g
            sides[(g.cell_b, g.side_b)] = g
        return sides

    def submesh(self, cells: Sequence[int]) -> Tuple["Mesh", List[int]]:
        """Restrict the mesh to some cells.

        Glue records between kept cells survive unless they are cuts; every
        other side of a kept cell becomes Dirichlet, except collapsed sides.

        Returns:
            Tuple[Mesh, List[int]]: The restricted mesh and the kept cell indices
        """
        keep = list(cells)
        index = {c: i for i, c in enumerate(keep)}
        glues = [Glue(index[g.cell_a], g.side_a, index[g.cell_b], g.side_b, False)
                 for g in self.glues
                 if g.cell_a in index and g.cell_b in index and not g.cut]
        conditions = {}
        for (c, side), cond in self.conditions.items():
            if c in index and cond == SideCondition.COLLAPSED:
                conditions[(index[c], side)] = cond
        return Mesh([self.cells[c] for c in keep], glues, conditions), keep

    def locate(self, u: float, v: float) -> Optional[int]:
        for i, cell in enumerate(self.cells):
            if cell.contains(u, v):
                return i
        return None


CutPredicate = Callable[[Edge], bool]
ConditionRule = Callable[[int, Side, Edge], SideCondition]


def _counts(n: Union[int, Sequence[int]], intervals: int) -> List[int]:
    if isinstance(n, (int, np.integer)):
        return [int(n)] * intervals
    counts = [int(c) for c in n]
    if len(counts) != intervals:
        raise InvalidGeometry(f"Expected {intervals} node counts, got {len(counts)}")
    return counts


def _check_breaks(breaks: Sequence[float], name: str) -> np.ndarray:
    b = np.asarray(breaks, dtype=float)
    if len(b) < 2 or np.any(np.diff(b) <= COORD_TOL):
        raise InvalidGeometry(f"{name} breaks must be strictly increasing: {list(b)}")
    return b


def tensor_mesh(kind: CellKind, us: Sequence[float], vs: Sequence[float],
                nu: Union[int, Sequence[int]], nv: Union[int, Sequence[int]],
                cut: Optional[CutPredicate] = None, closed_v: bool = False,
                condition: Optional[ConditionRule] = None) -> Mesh:
    """Build a tensor mesh over the given parameter breaks.

    Args:
        kind (CellKind): Cartesian or polar cells
        us (Sequence[float]): Breaks of the first coordinate (x or r)
        vs (Sequence[float]): Breaks of the second coordinate (y or theta)
        nu (int | Sequence[int]): Nodes per u interval
        nv (int | Sequence[int]): Nodes per v interval
        cut (CutPredicate): Returns True for shared edges carrying anti-continuity
        closed_v (bool): Glue the last v interval to the first (full disk)
        condition (ConditionRule): Condition of boundary sides, Dirichlet by default
    Returns:
        Mesh: The mesh
    Raises:
        InvalidGeometry: If the breaks or counts are invalid
    """
    us = _check_breaks(us, "u")
    vs = _check_breaks(vs, "v")
    if kind == CellKind.POLAR and us[0] < -COORD_TOL:
        raise InvalidGeometry("Polar cells need r >= 0")
    nus = _counts(nu, len(us) - 1)
    nvs = _counts(nv, len(vs) - 1)
    cut = cut or (lambda edge: False)

    n_u = len(us) - 1
    cells = []
    for j in range(len(vs) - 1):
        for i in range(n_u):
            cells.append(Cell(kind, float(us[i]), float(us[i + 1]), float(vs[j]), float(vs[j + 1]), nus[i], nvs[j]))

    def index(i, j):
        return j * n_u + i

    glues = []
    for j in range(len(vs) - 1):
        for i in range(n_u):
            c = index(i, j)
            if i + 1 < n_u:
                glues.append(Glue(c, Side.U1, index(i + 1, j), Side.U0, bool(cut(cells[c].edge(Side.U1)))))
            if j + 1 < len(vs) - 1:
                glues.append(Glue(c, Side.V1, index(i, j + 1), Side.V0, bool(cut(cells[c].edge(Side.V1)))))
            elif closed_v:
                glues.append(Glue(c, Side.V1, index(i, 0), Side.V0, bool(cut(cells[index(i, 0)].edge(Side.V0)))))

    mesh = Mesh(cells, glues)
    glued = mesh.glued_sides()
    for c, cell in enumerate(cells):
        for side in Side:
            if (c, side) in glued:
                continue
            if kind == CellKind.POLAR and side == Side.U0 and cell.u0 <= COORD_TOL:
                mesh.conditions[(c, side)] = SideCondition.COLLAPSED
            elif condition is not None:
                mesh.conditions[(c, side)] = condition(c, side, cell.edge(side))
    logger.debug(f"Built {kind} mesh with {len(cells)} cells and {len(glues)} glued sides")
    return mesh


def geometric_breaks(lo: float, hi: float, point: float, ratio: float, levels: int) -> List[float]:
    """Breaks on [lo, hi] graded geometrically toward `point`.

    The point itself is a break; on each side the distances to it shrink by
    `ratio` per level, starting from the distance to the nearer end.
    """
    breaks = {lo, hi, point}
    left, right = point - lo, hi - point
    for level in range(1, levels + 1):
        if left > COORD_TOL:
            breaks.add(point - left * ratio ** level)
        if right > COORD_TOL:
            breaks.add(point + min(left if left > COORD_TOL else right, right) * ratio ** level)
    return sorted(b for b in breaks if lo - COORD_TOL <= b <= hi + COORD_TOL)
