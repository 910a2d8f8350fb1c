"""Core value types and the spacetime grid.

All quantities use natural units hbar = m = l = 1: energies are in
hbar^2/(m l^2), wave numbers in 1/l and the dimensionless time is
T = hbar t / (m l^2).  No other module takes unit parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class StepPotential:
    """Piecewise-constant potential: ``v1`` for x < 0, ``v2`` for x > 0."""

    v1: float = 0.0
    v2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "v1", _finite("v1", self.v1))
        object.__setattr__(self, "v2", _finite("v2", self.v2))

    @property
    def height(self) -> float:
        """Step height v2 - v1 seen by a wave incident from the left."""
        return self.v2 - self.v1


@dataclass(frozen=True)
class GaussianSpectrum:
    """Gaussian k-space amplitude centred on ``k0`` with width ``dk``.

    ``x0`` is the initial packet centre and must be negative so the
    packet starts in region 1.  ``k0/dk >= 3`` keeps the k > 0
    truncation of the spectrum negligible.
    """

    k0: float
    dk: float
    x0: float

    def __post_init__(self):
        for name in ("k0", "dk", "x0"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.dk <= 0:
            raise ValueError(f"dk must be positive, got {self.dk}")
        if self.k0 <= 0:
            raise ValueError(f"k0 must be positive, got {self.k0}")
        if self.k0 / self.dk < 3:
            raise ValueError(f"k0/dk must be >= 3, got {self.k0 / self.dk:.4g}")
        if self.x0 >= 0:
            raise ValueError(f"x0 must be negative (incidence from x < 0), got {self.x0}")

    @property
    def energy(self) -> float:
        """Kinetic energy of the central component, k0^2 / 2."""
        return 0.5 * self.k0**2

    @property
    def v0(self) -> float:
        """Reference speed used to turn time into length (equals k0)."""
        return self.k0

    @property
    def rms_width(self) -> float:
        """rms width of the initial density, 1/(sqrt(2) dk)."""
        return 1.0 / (math.sqrt(2.0) * self.dk)

    @property
    def arrival_time(self) -> float:
        """Time at which the packet centre reaches x = 0."""
        return abs(self.x0) / self.k0


@dataclass(frozen=True)
class SpacetimeGrid:
    x_min: float
    x_max: float
    nx: int
    t_min: float
    t_max: float
    nt: int

    def __post_init__(self):
        for name in ("x_min", "x_max", "t_min", "t_max"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        for name in ("nx", "nt"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ValueError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if not self.x_min < 0 < self.x_max:
            raise ValueError(f"need x_min < 0 < x_max, got [{self.x_min}, {self.x_max}]")
        if not self.t_min < self.t_max:
            raise ValueError(f"need t_min < t_max, got [{self.t_min}, {self.t_max}]")
        if self.nx < 2 or self.nt < 2:
            raise ValueError(f"need nx, nt >= 2, got nx={self.nx}, nt={self.nt}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / (self.nt - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.nt)

    def with_window(self, x_min, x_max, t_min, t_max) -> "SpacetimeGrid":
        return SpacetimeGrid(x_min, x_max, self.nx, t_min, t_max, self.nt)

    def with_shape(self, nx, nt) -> "SpacetimeGrid":
        return SpacetimeGrid(self.x_min, self.x_max, nx, self.t_min, self.t_max, nt)


def grid_points(grid: SpacetimeGrid) -> tuple[np.ndarray, np.ndarray]:
    """Return the endpoint-inclusive uniform x positions and T times of ``grid``."""
    return grid.x, grid.t


@dataclass(frozen=True, eq=False)
class DensityField:
    """Probability density |psi|^2 sampled on a grid.

    ``values`` has shape (nt, nx): row i is the spatial snapshot at
    time ``grid.t[i]``.  The array is stored read-only.
    """

    grid: SpacetimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        expected = (self.grid.nt, self.grid.nx)
        if values.shape != expected:
            raise ValueError(f"values shape {values.shape} does not match grid {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite")
        if np.any(values < 0):
            raise ValueError("density values must be nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def row_norms(self) -> np.ndarray:
        """Trapezoid-rule norm of every time row."""
        return np.trapezoid(self.values, self.grid.x, axis=1)
