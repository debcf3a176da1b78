"""Verification toolkit for point-data unique continuation in 2D
anisotropic elasticity.

Pipeline: audit the coefficient tensor (ellipticity, convexity,
hyperbolicity discriminant, pencil eigenpairs), reduce the system under a
vanishing first displacement component to an overdetermined
hyperbolic-elliptic pair, pass to characteristic coordinates, represent
solutions through the Riemann function, and estimate the dimension of
the local solution family of the pair.
"""

from ucp2d.fields import ScalarField, parse, evaluate, differentiate

__version__ = "0.1.0"

__all__ = ["ScalarField", "parse", "evaluate", "differentiate", "__version__"]
