"""Spectral transforms and kinetic operators.

The box kinetic operator |k|^order is a plain Fourier multiplier. The
half-line square-root kinetic operator uses the Dirichlet sine basis
(DST-I) on a lattice grid with endpoints at 0 and (n+1)h; the multiplier is
the continuum value k_m = m*pi/L, so sine modes are exact eigenvectors.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.fft

from .errors import GridError, ValidationError
from .fields import WaveField
from .grids import RadialGrid


def fft_workers() -> int:
    """Worker cap for FFTs, settable via CONTACTLAB_THREADS."""
    raw = os.environ.get("CONTACTLAB_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return max(1, min(4, os.cpu_count() or 1))


def forward(field: WaveField) -> np.ndarray:
    return scipy.fft.fftn(field.values, workers=fft_workers())


def inverse(grid, coeffs: np.ndarray) -> np.ndarray:
    return scipy.fft.ifftn(coeffs, workers=fft_workers())


def apply_kinetic(field: WaveField, order: float) -> WaveField:
    """Apply the Fourier multiplier |k|^order (order 1 is sqrt of the Laplacian)."""
    if order not in (1, 2):
        raise ValidationError(f"kinetic order must be 1 or 2, got {order}")
    k2 = field.grid.k_squared()
    mult = k2 if order == 2 else np.sqrt(k2)
    out = inverse(field.grid, mult * forward(field))
    return WaveField(grid=field.grid, values=out)


def _require_lattice(grid: RadialGrid) -> float:
    if not grid.is_lattice:
        raise GridError(
            "sine-basis kinetic operator needs a uniform lattice grid "
            "(nodes i*h, see lattice_radial_grid)"
        )
    return grid.spacing


def sine_multipliers(grid: RadialGrid, order: float = 1.0) -> np.ndarray:
    """Multipliers k_m^order on the Dirichlet sine basis of the lattice grid."""
    h = _require_lattice(grid)
    length = (grid.n + 1) * h
    k = np.arange(1, grid.n + 1) * np.pi / length
    return k**order


def apply_sqrt_kinetic_radial(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """Apply sqrt(-d^2/dr^2) with Dirichlet ends via DST-I, O(n log n)."""
    mult = sine_multipliers(grid, 1.0)
    coeffs = scipy.fft.dst(values, type=1, workers=fft_workers())
    return scipy.fft.idst(mult * coeffs, type=1, workers=fft_workers())


def sqrt_kinetic_dense(grid: RadialGrid, order: float = 1.0) -> np.ndarray:
    """Dense matrix of the sine-basis kinetic operator |k|^order."""
    h = _require_lattice(grid)
    n = grid.n
    mult = sine_multipliers(grid, order)
    i = np.arange(1, n + 1)
    # DST-I synthesis matrix; S @ S = (n+1)/2 * I
    s = np.sin(np.outer(i, i) * (np.pi / (n + 1)))
    return (2.0 / (n + 1)) * (s * mult) @ s
