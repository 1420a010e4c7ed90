"""Shallow Kolmogorov-Arnold networks for two-phase Stefan problems.

The package trains small KANs against physics-informed residuals for the
1D explicit-interface and the n-dimensional level-set formulation of the
two-phase Stefan problem, and ships the closed-form reference solutions
(two-phase similarity solution in 1D, circular-growth solution in 2D)
used to verify them.
"""

from .jets import Jet2
from .splines import SplineGrid, make_grid

__version__ = "0.1.0"

__all__ = ["Jet2", "SplineGrid", "make_grid", "__version__"]
