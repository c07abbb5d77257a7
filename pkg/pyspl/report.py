"""This module writes run artifacts: CSV tables, JSON reports, SVG plots and the run manifest."""

import csv
from dataclasses import dataclass, field
import json
import logging
import os
import platform
import time
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import scipy

from pyspl.consts import CSV_DIGITS, SCHEMA_VERSION, SVG_WIDTH
from pyspl.partition import DomainKind, Partition

logger = logging.getLogger(__name__)


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{CSV_DIGITS}g}"
    return str(v)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    return str(o)


def to_json(obj) -> str:
    return json.dumps(obj, default=_json_default, sort_keys=True, indent=2)


class SvgCanvas:
    """
    This class maps domain coordinates to a fixed-width SVG viewport.

    Attributes:
        bounds (tuple): (x0, x1, y0, y1) of the physical domain
        width (int): Width in pixels
        height (int): Height in pixels
    """

    def __init__(self, bounds, width: int = SVG_WIDTH, margin: int = 10):
        self.bounds = bounds
        self.width = width
        self.margin = margin
        x0, x1, y0, y1 = bounds
        self.scale = (width - 2 * margin) / (x1 - x0)
        self.height = int(round((y1 - y0) * self.scale)) + 2 * margin
        self.items: List[str] = []

    def xy(self, p) -> str:
        x0, _, _, y1 = self.bounds
        return f"{self.margin + (p[0] - x0) * self.scale:.3f},{self.margin + (y1 - p[1]) * self.scale:.3f}"

    def polyline(self, points: np.ndarray, color: str = "black", width: float = 2.0, dash: Optional[str] = None):
        pts = " ".join(self.xy(p) for p in points)
        style = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{style}/>')

    def circle(self, center, radius: float, color: str = "black", width: float = 2.0):
        cx, cy = self.xy(center).split(",")
        self.items.append(f'<circle cx="{cx}" cy="{cy}" r="{radius * self.scale:.3f}" fill="none" '
                          f'stroke="{color}" stroke-width="{width}"/>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">')
        return "\n".join([head] + self.items + ["</svg>"]) + "\n"


def partition_svg(p: Partition, polylines: Sequence[np.ndarray] = (),
                  arc_signs: Optional[Dict[int, Sequence[float]]] = None) -> str:
    """Domain outline, interface arcs (dashed for slits) and nodal polylines.

    With `arc_signs`, each arc is drawn in pieces colored by the sign of the
    given samples (blue positive, orange negative).
    """
    domain = p.domain
    if domain.kind == DomainKind.DISK:
        canvas = SvgCanvas((-1.0, 1.0, -1.0, 1.0))
        canvas.circle((0.0, 0.0), 1.0)
    else:
        canvas = SvgCanvas(domain.bounds())
        x0, x1, y0, y1 = domain.bounds()
        canvas.polyline(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]))
    for arc in p.interfaces:
        if arc_signs is not None and arc.id in arc_signs:
            values = np.asarray(arc_signs[arc.id])
            t = np.linspace(-1.0, 1.0, len(values))
            pts = arc.point(t)
            for i in range(len(values) - 1):
                color = "#1f77b4" if values[i] + values[i + 1] >= 0 else "#ff7f0e"
                canvas.polyline(pts[i:i + 2], color=color, width=4.0)
        else:
            canvas.polyline(np.array([arc.start, arc.end]), color="#1f77b4", width=3.0,
                            dash="8,4" if arc.is_slit else None)
    for line in polylines:
        canvas.polyline(line, color="#d62728", width=2.0)
    return canvas.render()


def polyline_rows(polylines: Sequence[np.ndarray]) -> List[List]:
    return [[i, j, float(x), float(y)] for i, line in enumerate(polylines) for j, (x, y) in enumerate(line)]


@dataclass
class RunManifest:
    """Record of one CLI run.

    Attributes:
        command (str): Subcommand name
        config (Dict): Configuration snapshot or options
        versions (Dict[str, str]): Package versions
        wall_time (float): Seconds
        outputs (List[str]): Files written
        tolerances (Dict[str, float]): Tolerance settings
    """
    command: str
    config: Dict = field(default_factory=dict)
    versions: Dict[str, str] = field(default_factory=dict)
    wall_time: float = 0.0
    outputs: List[str] = field(default_factory=list)
    tolerances: Dict[str, float] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION


def package_versions() -> Dict[str, str]:
    from pyspl import __version__
    return {"pyspl": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


class ReportWriter:
    """
    This class writes the artifacts of one run under an output directory and
    keeps the manifest listing them.

    Attributes:
        out_dir (str): Output directory
        manifest (RunManifest): Manifest being filled
    """

    def __init__(self, out_dir: str, command: str, config: Optional[Dict] = None,
                 tolerances: Optional[Dict[str, float]] = None):
        self.out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.manifest = RunManifest(command, config or {}, package_versions(), tolerances=tolerances or {})
        self._start = time.monotonic()

    def _path(self, name: str) -> str:
        path = os.path.join(self.out_dir, name)
        self.manifest.outputs.append(name)
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
        path = self._path(name)
        with open(path, 'w', newline='') as stream:
            writer = csv.writer(stream, lineterminator="\r\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
        logger.debug(f"Wrote {path}")
        return path

    def write_json(self, name: str, obj) -> str:
        path = self._path(name)
        with open(path, 'w') as stream:
            stream.write(to_json(obj) + "\n")
        logger.debug(f"Wrote {path}")
        return path

    def write_svg(self, name: str, markup: str) -> str:
        path = self._path(name)
        with open(path, 'w') as stream:
            stream.write(markup)
        logger.debug(f"Wrote {path}")
        return path

    def write_nodal(self, stem: str, p: Partition, polylines: Sequence[np.ndarray]) -> None:
        """SVG plot of a nodal set and the CSV with the same polyline points."""
        self.write_csv(f"{stem}_nodal.csv", ["line", "index", "x", "y"], polyline_rows(polylines))
        self.write_svg(f"{stem}_nodal.svg", partition_svg(p, polylines))

    def close(self) -> str:
        self.manifest.wall_time = time.monotonic() - self._start
        name = "manifest.json"
        self.manifest.outputs.append(name)
        path = os.path.join(self.out_dir, name)
        with open(path, 'w') as stream:
            stream.write(to_json(vars(self.manifest)) + "\n")
        return path
