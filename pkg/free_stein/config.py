import os
from dotenv import load_dotenv

load_dotenv()

DEFAULT_DEGREE_CAP = 12

# Relative cutoffs
EIGEN_CUTOFF = 1e-10
NULLSPACE_CUTOFF = 1e-10

QUADRATURE_TOL = 1e-12
MASS_TOL = 1e-12
STAR_TOL = 1e-10
TRUST_REGION_TOL = 1e-10
ALPHA_FLOOR = 1e-12
CONVEXITY_SLACK = 1e-8


def degree_cap() -> int:
    """Global cap on indeterminate letters, overridable through FREE_STEIN_CAP."""
    return int(os.getenv("FREE_STEIN_CAP", DEFAULT_DEGREE_CAP))


def default_threads() -> int:
    return max(1, int(os.getenv("FREE_STEIN_THREADS", "1")))


def max_condition() -> float:
    # Gram condition numbers above this make the CLI exit with a diagnostic
    return float(os.getenv("FREE_STEIN_MAX_CONDITION", "1e12"))
