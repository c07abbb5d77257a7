"""This module contains the scalar fields living on the interface set and the
deformation vector fields acting on a partition.
"""

from dataclasses import dataclass, field
import logging
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from pyspl.consts import COORD_TOL, DEFAULT_ARC_SAMPLES
from pyspl.numerics import DomainError, clenshaw_curtis
from pyspl.partition import CornerKind, DomainKind, InterfaceArc, NormalFrame, Partition

logger = logging.getLogger(__name__)

# (points (N, 2), arc) -> values (N,)
ArcFunction = Callable[[np.ndarray, InterfaceArc], np.ndarray]
# points (N, 2) -> vectors (N, 2)
VectorFunction = Callable[[np.ndarray], np.ndarray]

MIN_ARC_SAMPLES = 8


@dataclass
class BoundaryField:
    """A scalar function on the interface arcs of a partition.

    Values are kept at Clenshaw–Curtis nodes of the arc parameter t in
    [-1, 1]; when `func` is set it is used for evaluation off the nodes,
    otherwise the samples are interpolated.

    Attributes:
        partition (Partition): Owning partition
        samples (Dict[int, np.ndarray]): Values per arc id at the nodes
        corner_values (Dict[int, float]): Values at corner ids
        func (ArcFunction): Optional exact evaluator
    """
    partition: Partition
    samples: Dict[int, np.ndarray]
    corner_values: Dict[int, float] = field(default_factory=dict)
    func: Optional[ArcFunction] = None

    def __post_init__(self):
        for arc_id, values in self.samples.items():
            if len(values) < MIN_ARC_SAMPLES:
                raise DomainError(f"Arc {arc_id} carries {len(values)} samples, at least {MIN_ARC_SAMPLES} needed")
            if not np.all(np.isfinite(values)):
                raise DomainError(f"Arc {arc_id} carries non-finite samples")

    @property
    def n(self) -> int:
        return len(next(iter(self.samples.values()))) if self.samples else DEFAULT_ARC_SAMPLES

    @classmethod
    def from_function(cls, partition: Partition, func: ArcFunction, n: int = DEFAULT_ARC_SAMPLES,
                      zero_corners: bool = False) -> "BoundaryField":
        """Sample `func` on every arc.

        Args:
            partition (Partition): Partition
            func (ArcFunction): Function of (points, arc)
            n (int): Samples per arc
            zero_corners (bool): Force the value 0 at interior corners and tips
        Returns:
            BoundaryField: The sampled field
        """
        t, _ = clenshaw_curtis(n)
        samples = {}
        for arc in partition.interfaces:
            values = np.asarray(func(arc.point(t), arc), dtype=float).copy()
            if zero_corners:
                values = _zero_at_corners(partition, arc, values)
            samples[arc.id] = values
        corners = {}
        for arc in partition.interfaces:
            # nodes run from t = 1 (end) to t = -1 (start)
            corners.setdefault(arc.start_corner, float(samples[arc.id][-1]))
            corners.setdefault(arc.end_corner, float(samples[arc.id][0]))
        corners.pop(-1, None)
        exact = func
        if zero_corners:
            def exact(points, arc, _f=func):
                values = np.asarray(_f(points, arc), dtype=float).copy()
                return _zero_near_corners(partition, arc, points, values)
        return cls(partition, samples, corners, exact)

    @classmethod
    def zeros(cls, partition: Partition, n: int = DEFAULT_ARC_SAMPLES) -> "BoundaryField":
        return cls.from_function(partition, lambda pts, arc: np.zeros(len(pts)), n)

    def nodes(self):
        return clenshaw_curtis(self.n)

    def points(self, arc_id: int) -> np.ndarray:
        t, _ = self.nodes()
        return self.partition.interfaces[arc_id].point(t)

    def evaluate(self, arc_id: int, t) -> np.ndarray:
        """Values at arc parameters t in [-1, 1]."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        arc = self.partition.interfaces[arc_id]
        if self.func is not None:
            return np.asarray(self.func(arc.point(t), arc), dtype=float)
        nodes, _ = self.nodes()
        return BarycentricInterpolator(nodes, self.samples[arc_id])(t)

    def evaluate_points(self, arc_id: int, points: np.ndarray) -> np.ndarray:
        arc = self.partition.interfaces[arc_id]
        return self.evaluate(arc_id, np.clip(arc.param(points), -1.0, 1.0))

    def arc_integral(self, arc_id: int, weight: Optional[np.ndarray] = None) -> float:
        """Integral over one arc with respect to arc length, optionally against node weights."""
        _, w = self.nodes()
        values = self.samples[arc_id] if weight is None else self.samples[arc_id] * weight
        return float(0.5 * self.partition.interfaces[arc_id].length * np.dot(w, values))

    def integral(self) -> float:
        return sum(self.arc_integral(a) for a in self.samples)

    def l2_inner(self, other: "BoundaryField") -> float:
        _, w = self.nodes()
        return float(sum(0.5 * self.partition.interfaces[a].length * np.dot(w, self.samples[a] * other.samples[a])
                         for a in self.samples))

    def sup(self) -> float:
        return float(max((np.max(np.abs(v)) for v in self.samples.values()), default=0.0))

    def _combine(self, other: "BoundaryField", op) -> "BoundaryField":
        samples = {a: op(self.samples[a], other.samples[a]) for a in self.samples}
        func = None
        if self.func is not None and other.func is not None:
            f, g = self.func, other.func

            def func(points, arc):
                return op(np.asarray(f(points, arc), dtype=float), np.asarray(g(points, arc), dtype=float))
        corners = {c: op(self.corner_values.get(c, 0.0), other.corner_values.get(c, 0.0))
                   for c in set(self.corner_values) | set(other.corner_values)}
        return BoundaryField(self.partition, samples, corners, func)

    def __add__(self, other: "BoundaryField") -> "BoundaryField":
        return self._combine(other, np.add)

    def __sub__(self, other: "BoundaryField") -> "BoundaryField":
        return self._combine(other, np.subtract)

    def __mul__(self, other) -> "BoundaryField":
        if isinstance(other, BoundaryField):
            return self._combine(other, np.multiply)
        c = float(other)
        func = None
        if self.func is not None:
            f = self.func

            def func(points, arc):
                return c * np.asarray(f(points, arc), dtype=float)
        return BoundaryField(self.partition, {a: c * v for a, v in self.samples.items()},
                             {k: c * v for k, v in self.corner_values.items()}, func)

    __rmul__ = __mul__

    def to_rows(self) -> List[List[float]]:
        """Rows (arc, t, x, y, value) for tabular output."""
        t, _ = self.nodes()
        rows = []
        for arc_id, values in sorted(self.samples.items()):
            pts = self.points(arc_id)
            for ti, p, v in zip(t, pts, values):
                rows.append([arc_id, float(ti), float(p[0]), float(p[1]), float(v)])
        return rows


def _corner_params(partition: Partition, arc: InterfaceArc) -> List[float]:
    params = []
    for cid, t in ((arc.start_corner, -1.0), (arc.end_corner, 1.0)):
        if cid >= 0 and partition.corners[cid].kind != CornerKind.BOUNDARY:
            params.append(t)
    return params


def _zero_at_corners(partition: Partition, arc: InterfaceArc, values: np.ndarray) -> np.ndarray:
    params = _corner_params(partition, arc)
    if -1.0 in params:
        values[-1] = 0.0
    if 1.0 in params:
        values[0] = 0.0
    return values


def _zero_near_corners(partition: Partition, arc: InterfaceArc, points: np.ndarray,
                       values: np.ndarray) -> np.ndarray:
    t = arc.param(points)
    for c in _corner_params(partition, arc):
        values[np.abs(t - c) < COORD_TOL] = 0.0
    return values


class DeformationField:
    """
    This class represents a vector field X deforming a partition.

    Attributes:
        func (VectorFunction): X evaluated at points (N, 2)
        jacobian (VectorFunction): Optional DX at points, shape (N, 2, 2)
        corner_radius (float): If set, X vanishes on balls of this radius around interior corners
        name (str): Label used in reports
    """

    def __init__(self, func: VectorFunction, jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 corner_radius: Optional[float] = None, name: str = "X"):
        self.func = func
        self.jacobian = jacobian
        self.corner_radius = corner_radius
        self.name = name

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.atleast_2d(points)), dtype=float)

    @classmethod
    def constant(cls, vector: Sequence[float], name: str = "translation") -> "DeformationField":
        v = np.asarray(vector, dtype=float)
        return cls(lambda p: np.tile(v, (len(p), 1)), lambda p: np.zeros((len(p), 2, 2)), name=name)

    def __add__(self, other: "DeformationField") -> "DeformationField":
        jac = None
        if self.jacobian is not None and other.jacobian is not None:
            jac = lambda p: self.jacobian(p) + other.jacobian(p)  # noqa: E731
        return DeformationField(lambda p: self(p) + other(p), jac, _min_radius(self, other),
                                f"{self.name}+{other.name}")

    def __sub__(self, other: "DeformationField") -> "DeformationField":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "DeformationField":
        jac = None if self.jacobian is None else (lambda p: c * self.jacobian(p))
        return DeformationField(lambda p: c * self(p), jac, self.corner_radius, f"{c:g}*{self.name}")

    def normal_trace(self, partition: Partition, frame: NormalFrame, n: int = DEFAULT_ARC_SAMPLES) -> BoundaryField:
        """X . nu on every arc, with nu from the frame."""
        def trace(points, arc):
            return self(points) @ frame.normal(arc)
        return BoundaryField.from_function(partition, trace, n)

    def is_tangent(self, partition: Partition, samples: int = 64, tol: float = 1e-10) -> bool:
        """Whether X is tangent to the outer boundary at sample points."""
        domain = partition.domain
        if domain.kind == DomainKind.DISK:
            theta = np.linspace(0, 2 * np.pi, samples, endpoint=False)
            pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
            normals = pts
        else:
            s = np.linspace(0, 1, samples)
            w, h = domain.width, domain.height
            pts = np.concatenate([np.stack([s * w, 0 * s], 1), np.stack([s * w, h + 0 * s], 1),
                                  np.stack([0 * s, s * h], 1), np.stack([w + 0 * s, s * h], 1)])
            normals = np.concatenate([np.tile([0, -1], (samples, 1)), np.tile([0, 1], (samples, 1)),
                                      np.tile([-1, 0], (samples, 1)), np.tile([1, 0], (samples, 1))])
        return bool(np.max(np.abs(np.sum(self(pts) * normals, axis=1))) < tol)

    def vanishes_near_corners(self, partition: Partition, samples: int = 16, tol: float = 1e-12) -> bool:
        if self.corner_radius is None:
            return False
        corners = partition.corner_points()
        for c in corners:
            r = np.linspace(0, self.corner_radius, samples)[1:-1]
            theta = np.linspace(0, 2 * np.pi, samples, endpoint=False)
            R, T = np.meshgrid(r, theta)
            pts = np.stack([c[0] + (R * np.cos(T)).ravel(), c[1] + (R * np.sin(T)).ravel()], axis=1)
            if np.max(np.abs(self(pts))) > tol:
                return False
        return True


def _min_radius(a: DeformationField, b: DeformationField) -> Optional[float]:
    if a.corner_radius is None or b.corner_radius is None:
        return None
    return min(a.corner_radius, b.corner_radius)


def smooth_bump(t: np.ndarray, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    """C-infinity bump supported on (lo, hi), equal to 1 at the midpoint."""
    t = np.asarray(t, dtype=float)
    s = (2.0 * t - lo - hi) / (hi - lo)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def arc_bump_field(arc: InterfaceArc, center: float = 0.0, half_width: float = 0.5,
                   thickness: Optional[float] = None, name: Optional[str] = None) -> DeformationField:
    """A deformation pushing one arc along its reference normal near parameter `center`.

    The field is supported in a thin box around the arc, away from its
    endpoints, and its trace on the arc is a smooth bump of height 1.

    Args:
        arc (InterfaceArc): Arc
        center (float): Bump centre in the arc parameter
        half_width (float): Half support in the arc parameter
        thickness (float): Half thickness of the box, a quarter of the support by default
    Returns:
        DeformationField: The bump field
    """
    lo, hi = center - half_width, center + half_width
    if lo < -1.0 - COORD_TOL or hi > 1.0 + COORD_TOL:
        raise DomainError(f"Bump support ({lo}, {hi}) leaves the arc")
    if thickness is None:
        thickness = 0.25 * half_width * arc.length
    start = np.array(arc.start)
    d = arc.direction
    nrm = arc.normal

    def func(points):
        rel = points - start[None, :]
        t = 2.0 * (rel @ d) / arc.length - 1.0
        s = rel @ nrm
        amp = smooth_bump(t, lo, hi) * smooth_bump(s, -2 * thickness, 2 * thickness)
        return amp[:, None] * nrm[None, :]
    return DeformationField(func, name=name or f"bump[{arc.id}]")
