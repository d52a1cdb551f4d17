"""Uniform radial grids r_k = k*dr, k = 0..n."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RadialGrid:
    dr: float
    r_max: float

    def __post_init__(self):
        if not (self.dr > 0 and self.r_max > 0):
            raise ValueError("grid spacing and extent must be positive")
        if self.r_max < 4 * self.dr:
            raise ValueError("grid needs at least a few points")

    @property
    def n(self):
        return int(round(self.r_max / self.dr))

    @property
    def r(self):
        return np.arange(self.n + 1) * self.dr


DEFAULT_GRID = RadialGrid(1 / 400, 25.0)
