"""Numerical laboratory for Nevanlinna-Cartan value distribution quantities."""
import os

__version__ = "0.1.0"

# default mantissa bits for the optional high-precision mode
DEFAULT_PRECISION = int(os.environ.get("CASORATI_LAB_PRECISION", "53"))
