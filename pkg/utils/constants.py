"""Application-wide constants, defaults and paths."""
from pathlib import Path

# Project root directory
BASE_DIR = Path(__file__).parent.parent

# Shipped domain specs
DOMAINS_DIR = BASE_DIR / 'domains'

# Published default seed (EIGENBOUND_SEED overrides it)
DEFAULT_SEED = 20240917

# Report format
REPORT_FORMAT_VERSION = 'eigenbound-report/1'
VALID_FORMATS = ('csv', 'json')

# Problem kinds accepted by the CLI
VALID_KINDS = ('dirichlet', 'robin', 'poly', 'heisenberg')
VALID_MODES = ('estimate', 'certify')

# Geometry defaults (cells per side of the bounding box)
ENCLOSURE_CELLS_PER_SIDE = 32
HEISENBERG_CELLS_PER_SIDE = 16
DEFAULT_MC_SAMPLES = 4000
DEFAULT_DIRECTIONS = 256
DEFAULT_R_GRID = (0.6, 0.8, 1.0, 1.5)

# Eigensolver defaults (grid cells per side of the bounding box)
EIG_CELLS_PER_SIDE = 64
HEISENBERG_EIG_CELLS_PER_SIDE = 16
DEFAULT_EIG_TOL = 1e-10
CG_MAX_ITERATIONS = 100_000
RESIDUAL_TARGET = 1e-8

# Safety margins used when checking bound <= lambda
EUCLIDEAN_MARGIN = 1.02
HEISENBERG_MARGIN = 1.05

# Exit codes
EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_INPUT_ERROR = 2
