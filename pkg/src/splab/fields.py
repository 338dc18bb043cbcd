"""Discretized fields: values on a masked 3D grid or on a uniform radial mesh.

Both field types carry the trivial extension convention: a field is zero
outside its mask (3D) or beyond its outer radius (radial).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import Grid


@dataclass
class ScalarField:
    """Real values on the masked-in cells of a grid, zero outside."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.values.shape != (self.grid.n_inside,):
            raise ValueError(
                f"expected {self.grid.n_inside} values, got {self.values.shape}"
            )

    def mass(self) -> float:
        """Squared L2 norm, the constrained quantity rho^2."""
        return float(np.sum(self.values**2) * self.grid.cell_volume())

    def dense(self) -> np.ndarray:
        out = np.zeros(self.grid.dims)
        out[self.grid.mask] = self.values
        return out

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    @staticmethod
    def from_function(grid: Grid, fn) -> "ScalarField":
        pts = grid.points
        return ScalarField(grid, np.asarray(fn(pts), dtype=float))

    @staticmethod
    def zeros(grid: Grid) -> "ScalarField":
        return ScalarField(grid, np.zeros(grid.n_inside))


@dataclass
class RadialField:
    """Values on the uniform radial mesh r_j = j * h, j = 0..J, zero beyond r_J."""

    values: np.ndarray
    h: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.h <= 0:
            raise ValueError("radial spacing must be positive")
        if len(self.values) < 2:
            raise ValueError("radial mesh needs at least two nodes")

    @property
    def outer_radius(self) -> float:
        return (len(self.values) - 1) * self.h

    @property
    def r(self) -> np.ndarray:
        return self.h * np.arange(len(self.values))

    @property
    def mass_weights(self) -> np.ndarray:
        """Trapezoid weights for int_0^R f(r) 4 pi r^2 dr on the mesh."""
        tau = np.ones(len(self.values))
        tau[0] = tau[-1] = 0.5
        return 4.0 * np.pi * self.r**2 * self.h * tau

    def mass(self) -> float:
        return float(np.sum(self.values**2 * self.mass_weights))

    def interp(self, rq) -> np.ndarray:
        """Linear interpolation; zero beyond the outer radius."""
        return np.interp(np.asarray(rq, dtype=float), self.r, self.values, right=0.0)

    def copy(self) -> "RadialField":
        return RadialField(self.values.copy(), self.h)

    @staticmethod
    def from_function(outer_radius: float, n_points: int, fn) -> "RadialField":
        h = outer_radius / n_points
        r = h * np.arange(n_points + 1)
        return RadialField(np.asarray(fn(r), dtype=float), h)
