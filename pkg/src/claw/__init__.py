"""claw: exact toolkit for scalar conservation laws on piecewise-linear data.

The package computes entropy solutions of Burgers' equation in closed form
on piecewise-linear data, one-sided Lipschitz envelopes, interpolation-metric
certificates that quantify how much variation concentrates on small sets, a
multiscale decomposition into rate-limited components, and a command line
harness that measures total-variation decay rates.
"""

from .pwl import EPS, Interval, PLFunction, PWQuadratic, merge_intervals, total_measure

__version__ = "0.1.0"

__all__ = [
    "EPS",
    "Interval",
    "PLFunction",
    "PWQuadratic",
    "merge_intervals",
    "total_measure",
    "__version__",
]
