"""Finite-scale laboratory for integer-part polynomial ergodic averages."""

__version__ = "0.1.0"
