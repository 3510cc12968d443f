"""Numerical potential theory on Koenigs domains of holomorphic semigroups.

Backward orbits are modelled as translations ``D - t`` of a planar domain, and
the package estimates harmonic measure, hyperbolic metric quantities, Green
energy, condenser capacity and Fekete n-diameters along them.
"""

__version__ = "0.1.0"
