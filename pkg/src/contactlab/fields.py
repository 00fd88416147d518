"""Field containers: complex fields on the periodic box, samples on the half-line."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, ValidationError
from .grids import BoxGrid3D, RadialGrid


@dataclass(frozen=True, eq=False)
class WaveField:
    """Complex scalar field on a periodic 3D box."""

    grid: BoxGrid3D
    values: np.ndarray = field(repr=False)
    norm_target: float | None = None

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.complex128)
        if v.shape != (self.grid.m,) * 3:
            raise GridError(f"values shape {v.shape} does not match grid m={self.grid.m}")
        if not np.all(np.isfinite(v.view(np.float64))):
            raise ValidationError("field values must be finite")
        if self.norm_target is not None and self.norm_target <= 0:
            raise ValidationError("norm_target must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def mass(self) -> float:
        """L2 norm squared times the volume element."""
        return float(np.vdot(self.values, self.values).real * self.grid.dvol)

    def with_values(self, values: np.ndarray) -> "WaveField":
        return WaveField(grid=self.grid, values=values, norm_target=self.norm_target)

    def normalized(self, mass: float | None = None) -> "WaveField":
        target = mass if mass is not None else self.norm_target
        if target is None:
            raise ValidationError("no normalization target given")
        current = self.mass
        if current == 0.0:
            raise ValidationError("cannot normalize a zero field")
        return WaveField(
            grid=self.grid,
            values=self.values * np.sqrt(target / current),
            norm_target=target,
        )


@dataclass(frozen=True, eq=False)
class RadialField:
    """Real or complex samples on a half-line grid; s-wave unless stated."""

    grid: RadialGrid
    values: np.ndarray = field(repr=False)
    angular_momentum: int = 0

    def __post_init__(self):
        v = np.ascontiguousarray(self.values)
        if v.shape != (self.grid.n,):
            raise GridError(f"values shape {v.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("field values must be finite")
        if self.angular_momentum < 0:
            raise ValidationError("angular momentum must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
