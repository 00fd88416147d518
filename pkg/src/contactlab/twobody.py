"""Scaled two-body potential families and radial bound-state machinery.

Potentials are radial and attractive, -g * shape(r) before scaling. The
scaling families are eps^-3 * shape(r/eps) (strong, classified by the L1
norm) and eps^-2 * shape(r/eps) (weak, classified by the Rollnik norm).
The reduced s-wave problem -u'' + V u acts on u = r*phi with Dirichlet
ends, so all spectra come from real symmetric tridiagonal matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.special

from .eigen import EigenRequest, SpectrumResult, eigs_smallest, from_tridiagonal
from .errors import (
    BracketError,
    GridError,
    ResolutionError,
    ValidationError,
)
from .fields import RadialField
from .grids import UNIFORM, RadialGrid, make_radial_grid

STRONG = "strong"
WEAK = "weak"
UNSCALED = "unscaled"

_AMPLITUDE_POWER = {STRONG: 3, WEAK: 2, UNSCALED: 0}


# ---------------------------------------------------------------------------
# shapes


@dataclass(frozen=True)
class SquareWell:
    """Unit-depth well on r <= radius."""

    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValidationError("square well radius must be positive")

    def profile(self, u):
        return np.where(np.asarray(u, dtype=float) <= self.radius, 1.0, 0.0)

    def mean_profile(self, lo, hi):
        return np.clip((self.radius - lo) / (hi - lo), 0.0, 1.0)

    @property
    def resolution_radius(self):
        return self.radius

    @property
    def support_radius(self):
        return self.radius

    def describe(self):
        return {"kind": "square_well", "radius": self.radius}


@dataclass(frozen=True)
class GaussianShape:
    """exp(-r^2 / (2 sigma^2))."""

    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValidationError("gaussian sigma must be positive")

    def profile(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(-(u**2) / (2.0 * self.sigma**2))

    def mean_profile(self, lo, hi):
        s = self.sigma * math.sqrt(2.0)
        anti = self.sigma * math.sqrt(math.pi / 2.0)
        return anti * (scipy.special.erf(hi / s) - scipy.special.erf(lo / s)) / (hi - lo)

    @property
    def resolution_radius(self):
        return self.sigma

    @property
    def support_radius(self):
        # profile below 1e-14 outside this radius
        return self.sigma * math.sqrt(2.0 * math.log(1e14))

    def describe(self):
        return {"kind": "gaussian", "sigma": self.sigma}


@dataclass(frozen=True)
class TableShape:
    """User-tabulated nonnegative profile, linearly interpolated, zero outside."""

    radii: tuple
    samples: tuple

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.samples, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 2:
            raise ValidationError("table shape needs matching 1D radii and samples")
        if np.any(np.diff(r) <= 0) or r[0] < 0:
            raise ValidationError("table radii must be nonnegative and increasing")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValidationError("table samples must be finite and nonnegative")

    def profile(self, u):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.samples, dtype=float)
        return np.interp(np.asarray(u, dtype=float), r, v, left=v[0], right=0.0)

    def mean_profile(self, lo, hi):
        # piecewise-linear profile: 33-point Simpson per cell is exact enough
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        t = np.linspace(0.0, 1.0, 33)
        pts = lo[..., None] + (hi - lo)[..., None] * t
        vals = self.profile(pts)
        return scipy.integrate.simpson(vals, x=t, axis=-1)

    @property
    def resolution_radius(self):
        return float(self.radii[-1])

    @property
    def support_radius(self):
        return float(self.radii[-1])

    def describe(self):
        return {"kind": "user_table", "points": len(self.radii)}


# ---------------------------------------------------------------------------
# potential specs


@dataclass(frozen=True)
class PotentialSpec:
    """Attractive radial potential -g * scale(eps) * shape(r/eps)."""

    shape: object
    coupling: float
    scaling_class: str = UNSCALED
    epsilon: float = 1.0

    def __post_init__(self):
        if self.coupling < 0:
            raise ValidationError(f"coupling must be >= 0, got {self.coupling}")
        if self.scaling_class not in _AMPLITUDE_POWER:
            raise ValidationError(f"unknown scaling class {self.scaling_class!r}")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValidationError(f"epsilon must be in (0, 1], got {self.epsilon}")

    @property
    def amplitude(self) -> float:
        """Depth multiplier g * eps^-p."""
        return self.coupling * self.epsilon ** (-_AMPLITUDE_POWER[self.scaling_class])

    @property
    def range_radius(self) -> float:
        return self.epsilon * self.shape.resolution_radius

    @property
    def support_radius(self) -> float:
        return self.epsilon * self.shape.support_radius

    def amplitude_at(self, r):
        """Potential values -g * eps^-p * shape(r/eps)."""
        return -self.amplitude * self.shape.profile(np.asarray(r, dtype=float) / self.epsilon)

    def with_coupling(self, g: float) -> "PotentialSpec":
        return PotentialSpec(self.shape, g, self.scaling_class, self.epsilon)

    def describe(self):
        return {
            "shape": self.shape.describe(),
            "coupling": self.coupling,
            "scaling_class": self.scaling_class,
            "epsilon": self.epsilon,
        }


@dataclass(frozen=True)
class ExtensionNorms:
    l1: float
    rollnik: float


def realize_potential(
    spec: PotentialSpec, grid: RadialGrid, sampling: str = "cell_average"
) -> RadialField:
    """Realize the scaled potential on the grid, checking support resolution.

    Default sampling averages the potential over each grid cell, which keeps
    O(h^2) accuracy for discontinuous shapes (point samples of a step lose an
    O(h) sliver at the edge). "point" gives plain node samples.
    """
    inside = int(np.count_nonzero(grid.nodes <= spec.range_radius))
    if spec.coupling > 0 and inside < 8:
        raise ResolutionError(
            f"only {inside} nodes inside the scaled range r <= {spec.range_radius:g}; "
            "need at least 8"
        )
    if sampling == "cell_average" and grid.spacing_law == UNIFORM:
        half = 0.5 * grid.spacing / spec.epsilon
        u = grid.nodes / spec.epsilon
        lo = np.maximum(u - half, 0.0)
        values = -spec.amplitude * spec.shape.mean_profile(lo, u + half)
    elif sampling in ("point", "cell_average"):
        values = spec.amplitude_at(grid.nodes)
    else:
        raise ValidationError(f"unknown sampling mode {sampling!r}")
    return RadialField(grid=grid, values=values)


def extension_norms(spec: PotentialSpec, rel_tol: float = 1e-8) -> ExtensionNorms:
    """L1 and Rollnik norms of the realized potential, by quadrature.

    Both integrals are evaluated in the scaled variable u = r/eps, which
    makes the strong-class L1 invariance and weak-class Rollnik invariance
    exact rather than approximate.
    """
    if spec.coupling == 0.0:
        return ExtensionNorms(l1=0.0, rollnik=0.0)
    shape = spec.shape
    upper = shape.support_radius
    p = _AMPLITUDE_POWER[spec.scaling_class]
    eps = spec.epsilon
    g = spec.coupling

    moment2, _ = scipy.integrate.quad(
        lambda u: shape.profile(u) * u**2, 0.0, upper,
        epsrel=rel_tol, epsabs=0.0, limit=200,
    )
    l1 = 4.0 * math.pi * g * eps ** (3 - p) * moment2

    # angular-averaged |x-y|^-2 kernel for radial functions:
    # 4 pi^2 * u * v * log((u+v)/|u-v|)
    def inner(v, u):
        if v == u:
            return 0.0
        return shape.profile(v) * v * math.log((u + v) / abs(u - v))

    def outer(u):
        val, _ = scipy.integrate.quad(
            inner, 0.0, upper, args=(u,),
            points=[u] if u < upper else None,
            epsrel=rel_tol, epsabs=1e-14, limit=200,
        )
        return shape.profile(u) * u * val

    rollnik_scaled, _ = scipy.integrate.quad(
        outer, 0.0, upper, epsrel=rel_tol, epsabs=1e-14, limit=200,
    )
    rollnik = 4.0 * math.pi**2 * g**2 * eps ** (4 - 2 * p) * rollnik_scaled
    return ExtensionNorms(l1=l1, rollnik=rollnik)


# ---------------------------------------------------------------------------
# radial spectra


def radial_hamiltonian(pot: RadialField):
    """Tridiagonal FD operator -d^2/dr^2 + V with Dirichlet ends."""
    grid = pot.grid
    if grid.spacing_law != UNIFORM:
        raise GridError("radial hamiltonian requires a uniform grid")
    h = grid.spacing
    diag = 2.0 / h**2 + np.real(pot.values)
    off = np.full(grid.n - 1, -1.0 / h**2)
    return from_tridiagonal(diag, off, meta=grid.meta())


def bound_states_radial(pot: RadialField, req: EigenRequest) -> SpectrumResult:
    """Negative eigenvalues of the s-wave reduced problem, ascending."""
    if pot.angular_momentum != 0:
        raise ValidationError("only s-wave (angular_momentum=0) is supported")
    op = radial_hamiltonian(pot)
    k = min(max(req.k, 1), op.n)
    res = eigs_smallest(op, EigenRequest(k=k, tol=req.tol, max_iter=req.max_iter,
                                         seed=req.seed))
    keep = res.eigenvalues < 0.0
    return SpectrumResult(
        eigenvalues=res.eigenvalues[keep][: req.k],
        residuals=res.residuals[keep][: req.k],
        grid_meta=res.grid_meta,
        negative_count=res.negative_count,
        truncated=res.negative_count < req.k,
    )


def zero_energy_solution(pot: RadialField) -> np.ndarray:
    """Numerov integration of u'' = V(r) u at zero energy, u ~ r near 0."""
    grid = pot.grid
    if grid.spacing_law != UNIFORM:
        raise GridError("zero-energy integration requires a uniform grid")
    h = grid.spacing
    r = grid.nodes
    f = np.real(pot.values)
    # series start u(r) = r (1 + V(0) r^2 / 6); V taken at first node
    u = np.empty(grid.n)
    u[0] = r[0] * (1.0 + f[0] * r[0] ** 2 / 6.0)
    u[1] = r[1] * (1.0 + f[1] * r[1] ** 2 / 6.0)
    w = 1.0 - (h * h / 12.0) * f
    c = list(w)
    uw_prev = u[0] * c[0]
    uw_curr = u[1] * c[1]
    f_list = list(f)
    h2 = h * h
    for i in range(1, grid.n - 1):
        uw_next = 2.0 * uw_curr - uw_prev + h2 * f_list[i] * (uw_curr / c[i])
        uw_prev, uw_curr = uw_curr, uw_next
        u[i + 1] = uw_next / c[i + 1]
    return u


def scattering_length(pot: RadialField) -> float:
    """Extract a from u(r) ~ c (r - a) over the outer 25% of the grid."""
    grid = pot.grid
    window = grid.nodes >= grid.nodes[0] + 0.75 * (grid.nodes[-1] - grid.nodes[0])
    if np.any(np.abs(np.real(pot.values)[window]) > 0):
        raise ValidationError("potential support reaches the outer fit window")
    u = zero_energy_solution(pot)
    r = grid.nodes[window]
    coeffs = np.polynomial.polynomial.polyfit(r, u[window], 1)
    intercept, slope = coeffs
    if slope == 0.0:
        raise ValidationError("degenerate zero-energy solution (zero slope)")
    return float(-intercept / slope)


def _tuning_grid(spec: PotentialSpec) -> RadialGrid:
    support = max(spec.support_radius, 1e-3)
    r_max = 4.0 * support
    h_target = support / 2.0e4
    n = int(round(r_max / h_target))
    return make_radial_grid(n, r_max / n, r_max, UNIFORM)


def tune_to_resonance(
    spec: PotentialSpec,
    bracket: tuple,
    inv_tol: float = 1e-8,
    scan_points: int = 33,
) -> float:
    """Coupling g* with a zero-energy resonance (|1/a| <= inv_tol), by bisection.

    The bracket must contain exactly one sign change of 1/a; a preliminary
    scan rejects brackets containing several resonances.
    """
    g_lo, g_hi = bracket
    if not 0 <= g_lo < g_hi:
        raise ValidationError(f"invalid bracket {bracket}")
    grid = _tuning_grid(spec)

    def inv_a(g):
        pot = realize_potential(spec.with_coupling(g), grid)
        return 1.0 / scattering_length(pot)

    gs = np.linspace(g_lo, g_hi, scan_points)
    vals = [inv_a(g) for g in gs]
    signs = np.sign(vals)
    flips = int(np.count_nonzero(np.diff(signs) != 0))
    if flips == 0:
        raise BracketError(f"no sign change of 1/a on bracket {bracket}")
    if flips > 1:
        raise BracketError(
            f"bracket {bracket} contains {flips} resonances; narrow it"
        )
    i = int(np.nonzero(np.diff(signs) != 0)[0][0])
    lo, hi = gs[i], gs[i + 1]
    f_lo = vals[i]
    g_mid, f_mid = lo, f_lo
    for _ in range(200):
        g_mid = 0.5 * (lo + hi)
        f_mid = inv_a(g_mid)
        if abs(f_mid) <= inv_tol:
            return float(g_mid)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = g_mid, f_mid
        else:
            hi = g_mid
        if hi - lo < 1e-15 * max(1.0, abs(hi)):
            break
    if abs(f_mid) <= inv_tol:
        return float(g_mid)
    raise BracketError(
        f"bisection stalled at g={g_mid} with 1/a={f_mid:g} (target {inv_tol:g})"
    )
