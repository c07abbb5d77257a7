"""This module loads and validates run configuration files."""

from dataclasses import asdict, dataclass, field
from fractions import Fraction
import logging
import math
from typing import Any, Dict, List, Optional

import yaml

from pyspl.consts import (DEFAULT_BASIS_SIZE, DEFAULT_N, DEFAULT_SAMPLES, INDEX_ZERO_TOL, MULTIPLICITY_TOL,
                          RESIDUAL_TOL, SCHEMA_VERSION)
from pyspl.partition import Partition, build_radial_partition, build_rect_partition, build_stub_partition

logger = logging.getLogger(__name__)

SCHEMA = {
    "version": int,
    "domain": {"kind": str, "alpha": float, "alpha_squared": str},
    "units": str,
    "cuts": list,
    "sectors": {"k": int, "rotation": float, "stubs": float},
    "grid": {"n": int, "samples": int},
    "tolerances": {"multiplicity": float, "residual": float, "zero": float},
    "basis": {"size": int},
}


class ConfigException(ValueError):
    pass


def _check(node: Any, schema: Any, path: str) -> None:
    if isinstance(schema, dict):
        if not isinstance(node, dict):
            raise ConfigException(f"{path or 'config'} must be a mapping")
        for key, value in node.items():
            if key not in schema:
                raise ConfigException(f"Unknown key {path + '.' if path else ''}{key}")
            _check(value, schema[key], f"{path + '.' if path else ''}{key}")
        return
    if schema is float and isinstance(node, int) and not isinstance(node, bool):
        return
    if not isinstance(node, schema) or isinstance(node, bool):
        raise ConfigException(f"{path} must be of type {schema.__name__}, got {type(node).__name__}")


@dataclass
class RunConfig:
    """Validated run configuration.

    Attributes:
        kind (str): "rectangle" or "disk"
        alpha (float): Rectangle aspect ratio
        alpha_squared (Fraction): Exact alpha^2 if given
        cuts (List): Rectangle cuts in absolute coordinates
        k (int): Disk sector count
        rotation (float): Disk rotation
        stubs (float): Slit length of a stub partition, 0 for full rays
        n (int): Nodes per direction and cell
        samples (int): Nodal-extraction samples
        multiplicity_tol (float): Eigenvalue clustering tolerance
        residual_tol (float): Eigen residual tolerance
        zero_tol (float): Index zero threshold
        basis_size (int): Per-arc basis size
        raw (Dict): Snapshot of the file contents
    """
    kind: str = "rectangle"
    alpha: float = 1.0
    alpha_squared: Optional[Fraction] = None
    cuts: List = field(default_factory=list)
    k: int = 0
    rotation: float = 0.0
    stubs: float = 0.0
    n: int = DEFAULT_N
    samples: int = DEFAULT_SAMPLES
    multiplicity_tol: float = MULTIPLICITY_TOL
    residual_tol: float = RESIDUAL_TOL
    zero_tol: float = INDEX_ZERO_TOL
    basis_size: int = DEFAULT_BASIS_SIZE
    raw: Dict = field(default_factory=dict, repr=False)

    def partition(self) -> Partition:
        if self.kind == "disk":
            if self.stubs > 0:
                return build_stub_partition(self.k, self.stubs, self.rotation)
            return build_radial_partition(self.k, self.rotation)
        return build_rect_partition(self.alpha, self.cuts)

    def snapshot(self) -> dict:
        out = asdict(self)
        out.pop("raw")
        out["alpha_squared"] = None if self.alpha_squared is None else str(self.alpha_squared)
        return out


def parse_config(data: Dict) -> RunConfig:
    """Validate a configuration mapping.

    Args:
        data (Dict): Parsed file contents
    Returns:
        RunConfig: The configuration
    Raises:
        ConfigException: On unknown keys, wrong types, missing version or bad values
    """
    if data is None:
        raise ConfigException("Empty configuration")
    _check(data, SCHEMA, "")
    if data.get("version") != SCHEMA_VERSION:
        raise ConfigException(f"Unsupported or missing schema version {data.get('version')}, expected {SCHEMA_VERSION}")
    cfg = RunConfig(raw=data)
    domain = data.get("domain", {})
    cfg.kind = domain.get("kind", "rectangle")
    if cfg.kind not in ("rectangle", "disk"):
        raise ConfigException(f"Unknown domain kind {cfg.kind}")
    cfg.alpha = float(domain.get("alpha", 1.0))
    if "alpha_squared" in domain:
        try:
            cfg.alpha_squared = Fraction(domain["alpha_squared"])
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigException(f"Invalid alpha_squared: {str(e)}")
        cfg.alpha = math.sqrt(cfg.alpha_squared)
    if cfg.alpha <= 0:
        raise ConfigException(f"Aspect ratio must be positive, got {cfg.alpha}")

    units = data.get("units", "pi")
    if units not in ("pi", "absolute"):
        raise ConfigException(f"Unknown units {units}")
    scale = math.pi if units == "pi" else 1.0
    try:
        cfg.cuts = [tuple((float(x) * scale, float(y) * scale) for x, y in cut) for cut in data.get("cuts", [])]
    except (TypeError, ValueError) as e:
        raise ConfigException(f"Cuts must be lists of two points: {str(e)}")

    sectors = data.get("sectors", {})
    cfg.k = sectors.get("k", 0)
    cfg.rotation = float(sectors.get("rotation", 0.0))
    cfg.stubs = float(sectors.get("stubs", 0.0))
    if cfg.kind == "disk" and cfg.k < 2:
        raise ConfigException("Disk configurations need sectors.k >= 2")
    if cfg.kind == "disk" and cfg.cuts:
        raise ConfigException("Cuts are only supported on rectangles")

    grid = data.get("grid", {})
    cfg.n = grid.get("n", DEFAULT_N)
    cfg.samples = grid.get("samples", DEFAULT_SAMPLES)
    tol = data.get("tolerances", {})
    cfg.multiplicity_tol = float(tol.get("multiplicity", MULTIPLICITY_TOL))
    cfg.residual_tol = float(tol.get("residual", RESIDUAL_TOL))
    cfg.zero_tol = float(tol.get("zero", INDEX_ZERO_TOL))
    cfg.basis_size = data.get("basis", {}).get("size", DEFAULT_BASIS_SIZE)
    if cfg.n < 1 or cfg.samples < 2 or cfg.basis_size < 1:
        raise ConfigException("Grid sizes and basis size must be positive")
    logger.debug(f"Loaded configuration {cfg.snapshot()}")
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path, 'r') as stream:
        try:
            data = yaml.safe_load(stream)
        except yaml.YAMLError as e:
            raise ConfigException(f"Could not parse {path}: {str(e)}")
    return parse_config(data)
