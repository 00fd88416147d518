"""Grids: half-line radial grids and the periodic 3D box.

Radial grids carry the relative coordinate of the two-body and model-operator
problems; the inner cutoff r_min > 0 regularizes the coincidence singularity
and doubles as the extension-parameter proxy studied under refinement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError

UNIFORM = "uniform"
LOGARITHMIC = "logarithmic"


@dataclass(frozen=True, eq=False)
class RadialGrid:
    n: int
    r_min: float
    r_max: float
    spacing_law: str
    nodes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.nodes.setflags(write=False)

    @property
    def spacing(self) -> float:
        """Node spacing; only meaningful for the uniform law."""
        if self.spacing_law != UNIFORM:
            raise GridError("spacing is defined only for uniform grids")
        return (self.r_max - self.r_min) / (self.n - 1)

    @property
    def is_lattice(self) -> bool:
        """True when the nodes are i*h, i = 1..n (uniform grid anchored at 0).

        This is the layout required by the Dirichlet sine-basis kinetic
        operator: node 0 and node (n+1)*h are the Dirichlet endpoints.
        """
        if self.spacing_law != UNIFORM:
            return False
        h = self.spacing
        return abs(self.r_min - h) <= 1e-12 * max(h, 1.0)

    def meta(self) -> dict:
        return {
            "n": self.n,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "spacing_law": self.spacing_law,
        }


def make_radial_grid(n: int, r_min: float, r_max: float, law: str = UNIFORM) -> RadialGrid:
    """Build a radial grid with n nodes on [r_min, r_max].

    Uniform law gives equal steps, logarithmic equal log-steps.
    """
    if n < 2:
        raise GridError(f"need at least 2 nodes, got n={n}")
    if r_min <= 0:
        raise GridError(f"r_min must be positive, got {r_min}")
    if r_max <= r_min:
        raise GridError(f"r_max must exceed r_min, got r_min={r_min}, r_max={r_max}")
    if law == UNIFORM:
        nodes = np.linspace(r_min, r_max, n)
    elif law == LOGARITHMIC:
        nodes = np.geomspace(r_min, r_max, n)
    else:
        raise GridError(f"unknown spacing law {law!r}")
    return RadialGrid(n=n, r_min=r_min, r_max=r_max, spacing_law=law, nodes=nodes)


def lattice_radial_grid(r_min: float, r_max: float) -> RadialGrid:
    """Uniform grid with nodes i*r_min, i = 1..n, n = round(r_max/r_min) - 1.

    Dirichlet endpoints sit at 0 and (n+1)*r_min, so the sine-basis kinetic
    operator applies exactly; refining r_min by a factor of 2 doubles n.
    """
    if r_min <= 0 or r_max <= r_min:
        raise GridError(f"need 0 < r_min < r_max, got {r_min}, {r_max}")
    n = int(round(r_max / r_min)) - 1
    if n < 2:
        raise GridError(f"r_max/r_min too small for a lattice grid: {r_max / r_min}")
    return make_radial_grid(n, r_min, n * r_min, UNIFORM)


@dataclass(frozen=True, eq=False)
class BoxGrid3D:
    """Periodic cube of side `side` with m points per axis (power of two)."""

    m: int
    side: float

    def __post_init__(self):
        if self.m < 8:
            raise GridError(f"need m >= 8 points per axis, got {self.m}")
        if self.m & (self.m - 1):
            raise GridError(f"m must be a power of two, got {self.m}")
        if self.side <= 0:
            raise GridError(f"side must be positive, got {self.side}")

    @property
    def dx(self) -> float:
        return self.side / self.m

    @property
    def dvol(self) -> float:
        return self.dx**3

    def axis(self) -> np.ndarray:
        """Coordinates per axis, centered so the box spans [-side/2, side/2)."""
        return (np.arange(self.m) - self.m // 2) * self.dx

    def coords(self):
        """Broadcastable (x, y, z) coordinate arrays."""
        a = self.axis()
        return a[:, None, None], a[None, :, None], a[None, None, :]

    def k_axis(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.m, d=self.dx)

    def k_squared(self) -> np.ndarray:
        k = self.k_axis()
        return (k**2)[:, None, None] + (k**2)[None, :, None] + (k**2)[None, None, :]

    def meta(self) -> dict:
        return {"m": self.m, "side": self.side, "dx": self.dx}
