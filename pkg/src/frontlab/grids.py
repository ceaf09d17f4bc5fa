"""Uniform grids and field containers."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError


@dataclass(frozen=True)
class Grid1D:
    """Uniform truncation of the longitudinal axis.

    Attributes
    ----------
    z_min, z_max : float
        Domain endpoints.
    n_z : int
        Number of nodes, endpoints included.
    """

    z_min: float
    z_max: float
    n_z: int

    def __post_init__(self):
        if not self.z_max > self.z_min:
            raise InvalidParameterError("z_max must exceed z_min")
        if self.n_z < 64:
            raise InvalidParameterError("n_z must be at least 64")

    @property
    def h(self) -> float:
        return (self.z_max - self.z_min) / (self.n_z - 1)

    @property
    def z(self) -> np.ndarray:
        return self.z_min + self.h * np.arange(self.n_z)

    def trapz_weights(self) -> np.ndarray:
        w = np.full(self.n_z, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def refine(self) -> "Grid1D":
        """Grid with halved spacing sharing every current node."""
        return Grid1D(self.z_min, self.z_max, 2 * self.n_z - 1)


@dataclass(frozen=True)
class Grid2D:
    """Periodic transverse axis crossed with a truncated longitudinal one."""

    y_length: float
    n_y: int
    zgrid: Grid1D
    comoving: bool = True

    def __post_init__(self):
        if self.y_length <= 0:
            raise InvalidParameterError("y_length must be positive")
        if self.n_y < 32 or (self.n_y & (self.n_y - 1)) != 0:
            raise InvalidParameterError("n_y must be a power of two >= 32")

    @property
    def h_y(self) -> float:
        return self.y_length / self.n_y

    @property
    def y(self) -> np.ndarray:
        return self.h_y * np.arange(self.n_y)

    def omega(self) -> np.ndarray:
        """Angular frequencies of the real FFT along y."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n_y, d=self.h_y)

    def horizon(self, d_perp: float) -> float:
        """Largest time at which periodic decay still mimics the plane."""
        return 0.1 * self.y_length**2 / d_perp


@dataclass
class Field2D:
    """State sampled on a :class:`Grid2D`; values shaped (n_y, n_z, n)."""

    grid: Grid2D
    values: np.ndarray
    time: float = 0.0
    n: int = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.shape[0] != self.grid.n_y or v.shape[1] != self.grid.zgrid.n_z:
            raise DimensionMismatchError(
                f"field shape {v.shape} does not match grid "
                f"({self.grid.n_y}, {self.grid.zgrid.n_z}, ...)")
        self.values = v
        self.n = v.shape[2]

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise DimensionMismatchError("field contains non-finite entries")

    def copy(self) -> "Field2D":
        return Field2D(self.grid, self.values.copy(), self.time)

    def sup_norm(self, z_mask=None) -> float:
        if z_mask is None:
            return float(np.max(np.abs(self.values)))
        return float(np.max(np.abs(self.values[:, z_mask, :])))
