SCHEMA_VERSION = 1

# Supported special-function range
BESSEL_MAX_ORDER = 10.0
BESSEL_MAX_ARG = 100.0
BESSEL_MAX_ZERO_INDEX = 10

# Eigen bookkeeping
MULTIPLICITY_TOL = 1e-6
RESIDUAL_TOL = 1e-8
SIGN_FIX_THRESHOLD = 1e-6

# Geometry
MIN_ARC_LENGTH = 1e-12
COORD_TOL = 1e-9

# Discretisation defaults
DEFAULT_N = 24
DEFAULT_SAMPLES = 48
DEFAULT_ARC_SAMPLES = 33
DEFAULT_BASIS_SIZE = 12

# Criticality / index counting
NOT_CRITICAL_RESIDUAL = 0.1
INDEX_ZERO_TOL = 1e-6
CORNER_CUTOFF_FRACTION = 0.05

# Finite differences
FD_STEPS = (1e-3, 5e-4)
FD_OVERLAP_MIN = 0.9

# Searches
DISK_SCAN = (0.02, 0.5, 0.02)
DISK_WEDGE_DEFAULT = 1.0471975511965976  # pi/3
SPECTRAL_FLOW_SIGMA_MAX = 1e3
SPECTRAL_FLOW_SIGMA_STEP = 0.05

# Published values, metadata only
PUBLISHED_DISK_CUT_A = 0.1
PUBLISHED_DISK_CUT_ENERGY = 40.7062
PUBLISHED_RADIAL6_ENERGY = 40.7065
EXTERNAL_DISK6_ENERGY = 39.02

# Output
CSV_DIGITS = 12
SVG_WIDTH = 1000
ENV_OUT_DIR = "SPL_OUT_DIR"
