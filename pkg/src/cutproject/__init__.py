"""Model sets from real quadratic rings, their self-similarities and invariant densities."""

__version__ = "0.1.0"
