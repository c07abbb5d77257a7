__version__ = "0.1.0"

from .numerics import DomainError, NumericalError, BracketError, NotPositiveDefinite
from .mesh import InvalidGeometry
from .partition import Partition, InterfaceArc, NormalFrame, OrientationRule
from .partition import build_rect_partition, build_radial_partition, build_stub_partition, check_bipartite, orient_interfaces
from .rect import rect_eigenvalue, rect_spectral_position, courant_sharp_22, solve_gamma_pair, dtn_negative_profile_22
from .disk import radial_energy, radial_deficiency, solve_alpha_match, negative_form_even, spectral_flow_odd
from .plap import assemble_plap, solve_eigs, subdomain_ground_states, sector_mixed_solve, DegenerateGroundState
from .nodal import extract_nodal_partition, DegenerateVector
from .boundary import BoundaryField, DeformationField
from .variation import criticality, hadamard_first, hessian_form, dtn_form_matrix, second_variation_c3, fd_oracle
from .variation import NotCritical, CrossingDetected
from .search import disk_cut_search, rect_cut_search, global_reference_note, SearchFailed
from .config import load_config, ConfigException
from .cli import cli
