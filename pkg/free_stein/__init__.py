"""Free Stein discrepancy, irregularity and dimension of noncommutative tuples."""

__version__ = "0.1.0"

SCHEMA_VERSION = "free-stein/1"
