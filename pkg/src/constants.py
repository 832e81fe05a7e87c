"""
Constants for the simplifying-assumption test toolkit
This module defines constants used throughout the project.
"""
import os

# Copula families
FAMILY_INDEPENDENCE = "independence"
FAMILY_CLAYTON = "clayton"
FAMILY_FRANK = "frank"
FAMILY_GUMBEL = "gumbel"
FAMILY_GAUSSIAN = "gaussian"
VALID_FAMILIES = [
    FAMILY_INDEPENDENCE,
    FAMILY_CLAYTON,
    FAMILY_FRANK,
    FAMILY_GUMBEL,
    FAMILY_GAUSSIAN
]

# Rotations (degrees)
ROTATION_NONE = 0
ROTATION_SURVIVAL = 180
VALID_ROTATIONS = [ROTATION_NONE, ROTATION_SURVIVAL]

# Family name aliases accepted on the command line and in config files
FAMILY_ALIASES = {
    "indep": (FAMILY_INDEPENDENCE, ROTATION_NONE),
    "survival-gumbel": (FAMILY_GUMBEL, ROTATION_SURVIVAL),
    "survival_gumbel": (FAMILY_GUMBEL, ROTATION_SURVIVAL),
    "sgumbel": (FAMILY_GUMBEL, ROTATION_SURVIVAL),
    "survival-clayton": (FAMILY_CLAYTON, ROTATION_SURVIVAL),
    "normal": (FAMILY_GAUSSIAN, ROTATION_NONE),
}

# Numerical settings
UNIT_CLAMP = 1e-10
HINV_TOL = 1e-10
HINV_MAX_ITER = 200
FIT_XTOL = 1e-8
SCORE_TOL = 1e-10
NEAR_INDEPENDENCE_GAIN = 1e-6  # per observation
FD_THETA_STEP = 1e-5
FD_COLUMN_STEP = 1e-4
CONDITION_LIMIT = 1e12

# Parameter functionals for the conditional edge
FUNCTIONAL_SUM = "sum"
FUNCTIONAL_INTERACTION = "interaction"
FUNCTIONAL_DIFFERENCE = "difference"
VALID_FUNCTIONALS = [
    FUNCTIONAL_SUM,
    FUNCTIONAL_INTERACTION,
    FUNCTIONAL_DIFFERENCE
]

# Example designs
EXAMPLE_SMALL = "ex4.1"
EXAMPLE_DIMENSION = "ex5.1"
VALID_EXAMPLES = [EXAMPLE_SMALL, EXAMPLE_DIMENSION]

# Covariance modes
COV_ORACLE = "oracle"
COV_SANDWICH = "sandwich"
COV_KNOWN_MARGINS = "known-margins"
COV_BOOTSTRAP = "bootstrap"
VALID_COV_MODES = [
    COV_ORACLE,
    COV_SANDWICH,
    COV_KNOWN_MARGINS,
    COV_BOOTSTRAP
]

# Split axes
AXIS_MEAN = "mean"
SPLIT_QUANTILES = (0.25, 0.5, 0.75)

# Studies
STUDY_SIZE_POWER = "ex4.1"
STUDY_DIMENSION = "ex5.1"
STUDY_FUNCTIONAL = "functional"
STUDY_MISSPEC = "misspec"
STUDY_PSEUDO_OBS = "pseudo-obs"
STUDY_PENALTY = "penalty-probe"
VALID_STUDIES = [
    STUDY_SIZE_POWER,
    STUDY_DIMENSION,
    STUDY_FUNCTIONAL,
    STUDY_MISSPEC,
    STUDY_PSEUDO_OBS,
    STUDY_PENALTY
]

CSV_COLUMNS = [
    "study", "functional", "d", "n", "lambda", "tau", "reps",
    "rejections", "power", "se", "mean_stat", "mean_ms"
]

# Default Values
DEFAULT_ALPHA = 0.05
DEFAULT_J_MAX = 2
DEFAULT_MIN_LEAF = 100
DEFAULT_PENALTY_C = 1.0
DEFAULT_PENALTY_BETA = 0.5
DEFAULT_BOOTSTRAP_REPS = 500
DEFAULT_REPS = 200
DEFAULT_FULL_SCALE_REPS = 1000
DEFAULT_RANDOM_SEED = 1
DEFAULT_TAU = 0.4
DEFAULT_LAMBDA_GRID = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
DEFAULT_MISSPEC_TAUS = [0.2, 0.4, 0.6, 0.8]
DEFAULT_MISSPEC_FAMILIES = ["clayton", "survival-gumbel", "gumbel", "frank"]
DEFAULT_PENALTY_GRID = [(1.0, 0.5), (0.5, 0.5), (1.0, 0.4)]

# Path Constants
DEFAULT_CACHE_DIR = os.path.join(os.path.expanduser("~"), ".svct", "cache")
DEFAULT_CACHE_TTL = 7 * 24 * 3600  # one week in seconds
