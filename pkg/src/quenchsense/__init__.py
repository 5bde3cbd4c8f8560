"""Criticality-enhanced quantum sensing via non-equilibrium quench dynamics."""

__version__ = "0.1.0"

from . import analytic, dynamics, estimation, ising, metrology, qmath  # noqa: F401
