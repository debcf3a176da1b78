"""Shared independent oracles for solver tests.

Kept apart from the package on purpose: these recompute reference
values through a different route than the code under test.
"""

import math

import numpy as np


def hyperbolic_bessel_series(z, terms=60):
    """sum_k (-z)^k / (k!)^2, the closed-form Riemann kernel for the
    constant-coefficient equation ds dt w + c w = 0 at z = c (s-xi)(t-eta).

    Equals J0(2 sqrt(z)) for z >= 0 and I0(2 sqrt(-z)) for z < 0.
    """
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    term = np.ones_like(z)
    out += term
    for k in range(1, terms):
        term = term * (-z) / (k * k)
        out += term
    return out


def hyperbolic_bessel_series_d(z, terms=60):
    """Derivative of the series with respect to z."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    for k in range(1, terms):
        coeff = (-1.0) ** k / (math.factorial(k) ** 2)
        out += coeff * k * z ** (k - 1)
    return out
