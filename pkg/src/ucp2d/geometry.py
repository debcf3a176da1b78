"""Axis-aligned rectangles used as working regions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Rect:
    """Closed rectangle ``[cx-hx, cx+hx] x [cy-hy, cy+hy]``."""

    center: tuple[float, float]
    halfwidths: tuple[float, float]

    def __post_init__(self):
        hx, hy = self.halfwidths
        if not (hx > 0 and hy > 0):
            raise ValueError("rectangle halfwidths must be positive")

    @classmethod
    def square(cls, cx, cy, half):
        return cls((float(cx), float(cy)), (float(half), float(half)))

    @property
    def xlim(self):
        return (self.center[0] - self.halfwidths[0], self.center[0] + self.halfwidths[0])

    @property
    def ylim(self):
        return (self.center[1] - self.halfwidths[1], self.center[1] + self.halfwidths[1])

    def contains(self, x, y, pad=0.0):
        (x0, x1), (y0, y1) = self.xlim, self.ylim
        return np.all(
            (np.asarray(x) >= x0 - pad)
            & (np.asarray(x) <= x1 + pad)
            & (np.asarray(y) >= y0 - pad)
            & (np.asarray(y) <= y1 + pad)
        )

    def grid(self, n):
        """n uniformly spaced nodes per axis, endpoints included."""
        if n < 2:
            raise ValueError("grid needs n >= 2")
        xs = np.linspace(*self.xlim, n)
        ys = np.linspace(*self.ylim, n)
        return xs, ys
