"""Exact Floer-theoretic A-infinity computations for lines on the 2-torus.

Everything is computed over a truncated Novikov field with rational
exponents and rational coefficients; no floating point enters any
structure constant, rank, or sign.
"""

__version__ = "0.1.0"

from .novikov import NovikovScalar, tate_series
from .glinalg import GradedSpace, PrecisionError

__all__ = [
    "NovikovScalar",
    "tate_series",
    "GradedSpace",
    "PrecisionError",
    "__version__",
]
