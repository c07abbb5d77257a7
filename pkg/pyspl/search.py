"""This module contains the parameter searches for candidate minimal partitions.

The disk search moves the transition point of a mixed sector problem until
the nodal line of the relevant eigenfunction starts exactly where the
Dirichlet stub ends. The rectangle search moves two point-symmetric slits
until the nodal set of the fourth eigenfunction runs through both tips.
"""

from dataclasses import dataclass, field, fields
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import optimize

from pyspl.consts import (DISK_SCAN, DISK_WEDGE_DEFAULT, EXTERNAL_DISK6_ENERGY, MULTIPLICITY_TOL,
                          PUBLISHED_RADIAL6_ENERGY)
from pyspl.disk import radial_energy
from pyspl.mesh import InvalidGeometry, geometric_breaks
from pyspl.nodal import NodalPartitionResult, extract_nodal_partition
from pyspl.numerics import BracketError, NumericalError, bracketed_root
from pyspl.partition import CornerKind, Partition, build_rect_partition, build_stub_partition
from pyspl.plap import (DiscreteOperator, EigenResult, assemble_plap, sector_mixed_solve, sector_neumann_reference,
                        solve_eigs, subdomain_ground_states, tip_coefficient)
from pyspl.rect import cross_partition

logger = logging.getLogger(__name__)

RECT_TARGET_INDEX = 3
RECT_DOMAINS = 4


class SearchFailed(NumericalError):
    """Raised when a search finds no acceptable configuration.

    Attributes:
        landscape (List[Tuple]): Parameters and residuals visited
    """

    def __init__(self, message: str, landscape: Optional[List[Tuple]] = None):
        super().__init__(message)
        self.landscape = landscape or []


@dataclass
class SearchReport:
    """Accepted configuration of a search.

    Attributes:
        geometry (str): "disk" or "rect"
        parameters (Dict[str, float]): Parameter values at acceptance
        residual (float): Matching residual, >= 0
        energy (float): Partition energy
        position (int): Spectral position of the energy
        deficiency (int): position - domain count
        domain_count (int): Nodal domains of the accepted eigenfunction
        spread (float): max - min of the per-domain energies
        grid (Dict[str, float]): Discretisation description
        reference_energy (float): Competing partition's energy on the same grid
        difference (float): energy - reference_energy
        extrapolated (float): Extrapolated energy, if requested
        extrapolation_error (float): Estimated error of the extrapolation
        notes (List[str]): Extra report lines
    """
    geometry: str
    parameters: Dict[str, float]
    residual: float
    energy: float
    position: int
    deficiency: int
    domain_count: int
    spread: float
    grid: Dict[str, float]
    reference_energy: float = math.nan
    difference: float = math.nan
    extrapolated: Optional[float] = None
    extrapolation_error: Optional[float] = None
    notes: List[str] = field(default_factory=list)
    nodal: Optional[NodalPartitionResult] = field(default=None, repr=False)
    partition: Optional[Partition] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name in ("nodal", "partition"):
                continue
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                v = None
            out[f.name] = v
        return out


def global_reference_note() -> str:
    return f"Global candidate energy {EXTERNAL_DISK6_ENERGY} (external, not reproduced)"


def _reflected_partition(a: float) -> Partition:
    """Three slits of length a, graded toward their tips."""
    r_breaks = geometric_breaks(0.0, 1.0, a, 0.3, 2)
    return build_stub_partition(3, a, 0.0, r_breaks=r_breaks)


def disk_cut_search(wedge: float = DISK_WEDGE_DEFAULT, n: int = 10, tol: float = 1e-4,
                    scan: Tuple[float, float, float] = DISK_SCAN, levels: int = 6, ratio: float = 0.2,
                    reflect_n: int = 10, richardson: bool = False) -> SearchReport:
    """Find the transition point whose nodal line starts at the end of the stub.

    The signed distance between the nodal radius and a is scanned on a grid
    and refined by bisection inside the first sign change. The accepted sector
    solution is reflected to the full disk to count its spectral position and
    nodal domains.

    Args:
        wedge (float): Sector angle
        n (int): Node count of the largest cells
        tol (float): Bracket width on a
        scan (Tuple[float, float, float]): Scan start, end and step
        levels (int): Grading levels toward the transition point
        ratio (float): Grading ratio
        reflect_n (int): Node count of the reflected full-disk mesh
        richardson (bool): Repeat with one more grading level and extrapolate
    Returns:
        SearchReport: The accepted configuration
    Raises:
        SearchFailed: If the residual does not change sign on the scan
    """
    lo, hi, step = scan
    grid = np.arange(lo, hi + 0.5 * step, step)
    landscape = []
    bracket = None
    prev = None
    for a in grid:
        res = sector_mixed_solve(float(a), wedge, n, levels=levels, ratio=ratio)
        if res.index < 0:
            landscape.append((float(a), math.nan))
            prev = None
            continue
        m = res.mismatch
        landscape.append((float(a), m))
        logger.info(f"Disk scan a={a:.4f}: mismatch {m:+.4e}, value {res.value:.8g}")
        if prev is not None and prev[1] * m <= 0:
            bracket = (prev[0], float(a))
            break
        prev = (float(a), m)
    if bracket is None:
        raise SearchFailed(f"Matching residual does not change sign on ({lo}, {hi})", landscape)

    def mismatch(a):
        res = sector_mixed_solve(a, wedge, n, levels=levels, ratio=ratio)
        if res.index < 0:
            raise SearchFailed(f"No eigenfunction crosses the axis at a={a}", landscape)
        landscape.append((a, res.mismatch))
        return res.mismatch

    try:
        a_star = bracketed_root(mismatch, bracket[0], bracket[1], tol=tol)
    except BracketError as e:
        raise SearchFailed(str(e), landscape)
    accepted = sector_mixed_solve(a_star, wedge, n, levels=levels, ratio=ratio)
    energy = accepted.value
    reference = sector_neumann_reference(a_star, radial_energy(6), wedge, n, levels=levels, ratio=ratio)
    logger.info(f"Accepted a*={a_star:.6f}: energy {energy:.8g}, same-grid radial {reference:.8g}")

    partition = _reflected_partition(a_star)
    op = assemble_plap(partition, n=reflect_n)
    eigen = solve_eigs(op, 10)
    idx = eigen.nearest(energy)
    nodal = extract_nodal_partition(eigen.vectors[:, idx], op)
    position = eigen.positions[idx]
    if abs(eigen.values[idx] - energy) > 1e-3 * energy:
        logger.warning(f"Reflected eigenvalue {eigen.values[idx]:.8g} differs from sector value {energy:.8g}")

    report = SearchReport("disk", {"a": a_star, "wedge": wedge}, abs(accepted.mismatch), energy, position,
                          position - nodal.domain_count, nodal.domain_count, nodal.defect,
                          {"n": n, "levels": levels, "ratio": ratio, "reflect_n": reflect_n},
                          reference, energy - reference, notes=[global_reference_note()],
                          nodal=nodal, partition=partition)
    report.notes.append(f"Published radial energy {PUBLISHED_RADIAL6_ENERGY}")
    if richardson:
        fine = sector_mixed_solve(a_star, wedge, n, levels=levels + 1, ratio=ratio).value
        # error of the graded mesh decays like ratio per level
        report.extrapolated = (fine - ratio * energy) / (1.0 - ratio)
        report.extrapolation_error = abs(fine - energy)
    return report


def rect_cut_partition(alpha: float, x1: float, y1: float) -> Partition:
    """Bottom slit x = x1, 0 < y < y1 and its mirror image through the centre."""
    w = alpha * math.pi
    if not (0.0 < x1 < w / 2 and 0.0 < y1 < math.pi / 2):
        raise InvalidGeometry(f"Slit parameters ({x1}, {y1}) outside the lower-left quarter")
    return build_rect_partition(alpha, [((x1, 0.0), (x1, y1)), ((w - x1, math.pi - y1), (w - x1, math.pi))])


@dataclass
class _RectSolve:
    partition: Partition
    operator: DiscreteOperator
    eigen: EigenResult
    residual: float


def _rect_solve(alpha: float, x1: float, y1: float, n: int) -> _RectSolve:
    p = rect_cut_partition(alpha, x1, y1)
    op = assemble_plap(p, n=n)
    eigen = solve_eigs(op, RECT_TARGET_INDEX + 3)
    vec = eigen.vectors[:, RECT_TARGET_INDEX]
    tips = [c.id for c in p.corners if c.kind == CornerKind.TIP]
    residual = max(tip_coefficient(op, vec, t) for t in tips)
    return _RectSolve(p, op, eigen, residual)


def _tip_distance(nodal: NodalPartitionResult, p: Partition) -> float:
    if not nodal.polylines:
        return math.inf
    pts = np.concatenate(nodal.polylines)
    tips = [np.array(c.point) for c in p.corners if c.kind == CornerKind.TIP]
    return float(max(np.min(np.linalg.norm(pts - t[None, :], axis=1)) for t in tips))


def rect_cut_search(alpha: float = 1.5, n: int = 14, tol: float = 1e-3,
                    offsets: Tuple[float, ...] = (0.05, 0.1, 0.15, 0.2),
                    heights: Tuple[float, ...] = (0.25, 0.3, 0.35, 0.4)) -> SearchReport:
    """Find point-symmetric slits whose tips lie on the nodal set of the fourth eigenfunction.

    The residual is the square-root coefficient of the eigenfunction at the
    tips. A scan over slit offsets (fractions of the width, measured from the
    vertical midline) and heights (fractions of pi) seeds a Nelder-Mead
    refinement.

    Args:
        alpha (float): Aspect ratio
        n (int): Nodes per direction and cell
        tol (float): Accepted residual
        offsets (Tuple[float, ...]): Scanned offsets
        heights (Tuple[float, ...]): Scanned heights
    Returns:
        SearchReport: The accepted configuration
    Raises:
        SearchFailed: If no configuration reaches the tolerance
    """
    w = alpha * math.pi
    landscape = []

    def residual(params):
        d, h = params
        try:
            r = _rect_solve(alpha, w / 2 - d * w, h * math.pi, n).residual
        except InvalidGeometry:
            r = math.inf
        landscape.append((float(d), float(h), r))
        return r

    best = min(((d, h) for d in offsets for h in heights), key=residual)
    logger.info(f"Rectangle scan best offset {best[0]:.3f}, height {best[1]:.3f}")
    result = optimize.minimize(residual, np.array(best), method="Nelder-Mead",
                               options={"xatol": 1e-4, "fatol": 0.1 * tol, "maxiter": 200})
    d, h = result.x
    solve = _rect_solve(alpha, w / 2 - d * w, h * math.pi, n)
    if solve.residual > tol:
        raise SearchFailed(f"Best tip residual {solve.residual:.3e} above {tol}", landscape)

    vec = solve.eigen.vectors[:, RECT_TARGET_INDEX]
    energy = float(solve.eigen.values[RECT_TARGET_INDEX])
    nodal = extract_nodal_partition(vec, solve.operator)
    position = solve.eigen.positions[RECT_TARGET_INDEX]
    if nodal.domain_count != RECT_DOMAINS:
        logger.warning(f"Accepted configuration has {nodal.domain_count} nodal domains")
    reference = max(s.value for s in subdomain_ground_states(cross_partition(alpha), n))
    x1, y1 = w / 2 - d * w, h * math.pi
    logger.info(f"Accepted slits x1={x1:.6f}, y1={y1:.6f}: energy {energy:.8g}, cross {reference:.8g}")
    report = SearchReport("rect", {"alpha": alpha, "x1": x1, "y1": y1}, solve.residual, energy, position,
                          position - nodal.domain_count, nodal.domain_count, nodal.defect,
                          {"n": n}, reference, energy - reference, nodal=nodal, partition=solve.partition)
    report.notes.append(f"Nodal distance to tips {_tip_distance(nodal, solve.partition):.3e}")
    if solve.eigen.multiplicities[RECT_TARGET_INDEX] > 1:
        report.notes.append(f"Eigenvalue multiplicity {solve.eigen.multiplicities[RECT_TARGET_INDEX]} "
                            f"at tolerance {MULTIPLICITY_TOL}")
    return report
