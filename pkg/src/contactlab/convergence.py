"""Resolvent-convergence diagnostics for scaled potential families.

Birman-Schwinger kernels K(z) = sqrt(u) (H + z)^-1 sqrt(u) assembled on the
potential support, the factorized resolvent correction
R - R0 = R0 B (1 - Q)^-1 B R0 with B = sqrt(-V) and Q = B R0 B, epsilon
sweeps tracking ground eigenvalues / negative counts / extension norms as
the scaling parameter shrinks, and the cross-term overlap norm
int sqrt(V1_eps) sqrt(V2_eps + V3) that decays like eps^(1/2).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.linalg

from .eigen import sturm_negative_count
from .errors import InvertibilityError, ValidationError
from .fields import RadialField
from .grids import RadialGrid
from .spectral import fft_workers
from .twobody import (
    STRONG,
    UNSCALED,
    WEAK,
    PotentialSpec,
    extension_norms,
    radial_hamiltonian,
    realize_potential,
)


@dataclass(frozen=True, eq=False)
class BSKernel:
    """Symmetric kernel sqrt(u) (H + z)^-1 sqrt(u) on the support of u."""

    z: float
    matrix: np.ndarray
    support: np.ndarray  # node indices carrying the kernel
    potential_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if not np.all(np.isfinite(m)):
            raise ValidationError("kernel entries must be finite")
        if m.size and not np.allclose(m, m.T, rtol=0.0, atol=1e-10 * max(1.0, float(np.max(np.abs(m))))):
            raise ValidationError("kernel must be symmetric")
        object.__setattr__(self, "matrix", 0.5 * (m + m.T))

    def max_eigenvalue(self) -> float:
        if self.matrix.size == 0:
            return 0.0
        return float(scipy.linalg.eigvalsh(self.matrix)[-1])

    def count_above_one(self) -> int:
        if self.matrix.size == 0:
            return 0
        return int(np.count_nonzero(scipy.linalg.eigvalsh(self.matrix) > 1.0))


@dataclass(frozen=True, eq=False)
class CompositePotential:
    """Three-channel potential V1 (strong) + V2 (weak) + V3 (unscaled)."""

    v1: PotentialSpec
    v2: PotentialSpec
    v3: PotentialSpec

    def __post_init__(self):
        labels = ((self.v1, STRONG), (self.v2, WEAK), (self.v3, UNSCALED))
        for spec, want in labels:
            if spec.scaling_class != want:
                raise ValidationError(
                    f"component class mismatch: expected {want!r}, "
                    f"got {spec.scaling_class!r}"
                )

    def at_epsilon(self, eps: float) -> "CompositePotential":
        return CompositePotential(
            v1=PotentialSpec(self.v1.shape, self.v1.coupling, STRONG, eps),
            v2=PotentialSpec(self.v2.shape, self.v2.coupling, WEAK, eps),
            v3=self.v3,
        )

    def components(self):
        return (self.v1, self.v2, self.v3)

    def realize(self, grid: RadialGrid) -> RadialField:
        total = np.zeros(grid.n)
        for spec in self.components():
            if spec.coupling > 0:
                total = total + np.real(realize_potential(spec, grid).values)
        return RadialField(grid=grid, values=total)

    def describe(self):
        return {
            "v1": self.v1.describe(),
            "v2": self.v2.describe(),
            "v3": self.v3.describe(),
        }


@dataclass(frozen=True, eq=False)
class EpsilonRecord:
    epsilon: float
    ground_eigenvalue: float
    negative_count: int
    extension_norms: dict
    bs_max_eigenvalue: float


@dataclass(frozen=True, eq=False)
class EpsilonSweepReport:
    epsilons: np.ndarray
    per_epsilon: list
    cauchy_gaps: np.ndarray
    monotone_flag: bool

    def __post_init__(self):
        eps = np.asarray(self.epsilons, dtype=float)
        if eps.size == 0:
            raise ValidationError("epsilon sweep needs at least one epsilon")
        if np.any(np.diff(eps) >= 0):
            raise ValidationError("epsilons must be strictly decreasing")
        gaps = np.asarray(self.cauchy_gaps, dtype=float)
        if gaps.size != eps.size - 1:
            raise ValidationError("cauchy_gaps length must be len(epsilons) - 1")
        object.__setattr__(self, "epsilons", eps)
        object.__setattr__(self, "cauchy_gaps", gaps)


def _tridiagonal_solve(op, z: float, rhs: np.ndarray) -> np.ndarray:
    """(H + z) x = rhs for a tridiagonal handle, via banded Cholesky/LU."""
    d, e = op.tridiagonal
    n = d.size
    ab = np.zeros((3, n))
    ab[0, 1:] = e
    ab[1] = d + z
    ab[2, :-1] = e
    return scipy.linalg.solve_banded((1, 1), ab, rhs)


def _resolvent_apply(h_base, z: float, rhs: np.ndarray) -> np.ndarray:
    if getattr(h_base, "tridiagonal", None) is not None:
        return _tridiagonal_solve(h_base, z, rhs)
    a = h_base.dense() + z * np.eye(h_base.n)
    return scipy.linalg.solve(a, rhs, assume_a="sym")


def bs_kernel(h_base, u: RadialField, z: float) -> BSKernel:
    """Assemble K(z) = sqrt(u) (H + z)^-1 sqrt(u) on the support of u.

    u must be nonnegative (u = -V for an attractive potential); z must lie
    outside the spectrum of h_base (any z > 0 works for the free operator).
    """
    if z <= 0:
        raise ValidationError(f"spectral parameter z must be positive, got {z}")
    uvals = np.real(np.asarray(u.values))
    if np.any(uvals < -1e-14 * max(1.0, float(np.max(np.abs(uvals), initial=0.0)))):
        raise ValidationError("u must be nonnegative (pass -V for attractive V)")
    uvals = np.maximum(uvals, 0.0)
    support = np.flatnonzero(uvals > 0)
    meta = dict(u.grid.meta())
    if support.size == 0:
        return BSKernel(z=z, matrix=np.zeros((0, 0)), support=support,
                        potential_meta=meta)
    sqrt_u = np.sqrt(uvals[support])
    rhs = np.zeros((u.grid.n, support.size))
    rhs[support, np.arange(support.size)] = sqrt_u
    sol = _resolvent_apply(h_base, z, rhs)
    kernel = sqrt_u[:, None] * sol[support, :]
    return BSKernel(z=z, matrix=kernel, support=support, potential_meta=meta)


def kk_correction(
    composite: CompositePotential, eps: float, z: float, grid: RadialGrid
) -> np.ndarray:
    """Factorized resolvent difference R(z) - R0(z) on the grid.

    Assembles R0 B (1 - Q)^-1 B R0 with B = sqrt(-V_eps) and Q = B R0 B;
    requires the operator norm of Q to stay below 1, which fails exactly when
    z crosses a bound-state energy of the interacting operator.
    """
    if z <= 0:
        raise ValidationError(f"spectral parameter z must be positive, got {z}")
    scaled = composite.at_epsilon(eps)
    pot = scaled.realize(grid)
    free = radial_hamiltonian(RadialField(grid=grid, values=np.zeros(grid.n)))
    kernel = bs_kernel(free, RadialField(grid=grid, values=-np.real(pot.values)), z)
    if kernel.support.size == 0:
        return np.zeros((grid.n, grid.n))
    q_norm = kernel.max_eigenvalue()
    if q_norm >= 1.0:
        raise InvertibilityError(
            f"1 - Q not invertible: ||Q({z})|| = {q_norm:g} >= 1 "
            "(z too close to a bound state)",
            norm=q_norm,
        )
    support = kernel.support
    sqrt_u = np.sqrt(-np.real(pot.values)[support])
    # columns of R0 restricted to the support, i.e. R0 B before the sqrt scaling
    rhs = np.zeros((grid.n, support.size))
    rhs[support, np.arange(support.size)] = sqrt_u
    r0_b = _resolvent_apply(free, z, rhs)
    middle = scipy.linalg.solve(
        np.eye(support.size) - kernel.matrix, r0_b.T, assume_a="sym"
    )
    return r0_b @ middle


def epsilon_sweep(
    composite: CompositePotential,
    epsilons,
    grid: RadialGrid,
    z: float = 1.0,
    observables: tuple = ("norms", "bs"),
) -> EpsilonSweepReport:
    """Per-epsilon spectral observables of the composite on a fixed grid.

    Records the ground eigenvalue, negative count, extension norms, and the
    largest Birman-Schwinger eigenvalue for each epsilon; flags whether the
    ground eigenvalue is nonincreasing as epsilon decreases and reports the
    successive Cauchy gaps.
    """
    eps_list = [float(e) for e in epsilons]
    if not eps_list:
        raise ValidationError("epsilon sweep needs at least one epsilon")
    free = radial_hamiltonian(RadialField(grid=grid, values=np.zeros(grid.n)))

    def record(eps: float) -> EpsilonRecord:
        scaled = composite.at_epsilon(eps)
        pot = scaled.realize(grid)
        op = radial_hamiltonian(pot)
        d, e = op.tridiagonal
        vals = scipy.linalg.eigvalsh_tridiagonal(d, e, select="i", select_range=(0, 0))
        neg = sturm_negative_count(d, e)
        norms = {}
        if "norms" in observables:
            for name, spec in zip(("v1", "v2", "v3"), scaled.components()):
                n = extension_norms(spec)
                norms[name] = {"l1": n.l1, "rollnik": n.rollnik}
        bs_max = float("nan")
        if "bs" in observables:
            u = RadialField(grid=grid, values=np.maximum(-np.real(pot.values), 0.0))
            bs_max = bs_kernel(free, u, z).max_eigenvalue()
        return EpsilonRecord(
            epsilon=eps,
            ground_eigenvalue=float(vals[0]),
            negative_count=neg,
            extension_norms=norms,
            bs_max_eigenvalue=bs_max,
        )

    with ThreadPoolExecutor(max_workers=min(len(eps_list), fft_workers())) as pool:
        records = list(pool.map(record, eps_list))

    ground = np.array([r.ground_eigenvalue for r in records])
    gaps = np.abs(np.diff(ground))
    monotone = bool(np.all(np.diff(ground) <= 1e-8 * np.maximum(1.0, np.abs(ground[:-1]))))
    return EpsilonSweepReport(
        epsilons=np.array(eps_list),
        per_epsilon=records,
        cauchy_gaps=gaps,
        monotone_flag=monotone,
    )


def cross_term_norm(composite: CompositePotential, eps: float, rel_tol: float = 1e-10) -> float:
    """L1 norm of sqrt(V1_eps) sqrt(V2_eps + V3) by radial quadrature.

    The overlap lives on the (shrinking) support of V1_eps, so the integrand
    is 4 pi r^2 sqrt(A1(r) A23(r)) with A = -V over that support.
    """
    if not 0.0 < eps <= 1.0:
        raise ValidationError(f"epsilon must be in (0, 1], got {eps}")
    scaled = composite.at_epsilon(eps)
    v1, v2, v3 = scaled.components()
    if v1.coupling == 0.0:
        return 0.0
    upper = v1.support_radius
    breaks = sorted(
        {s.support_radius for s in (v2, v3) if s.coupling > 0 and s.support_radius < upper}
    )

    def integrand(r):
        a1 = max(-float(v1.amplitude_at(r)), 0.0)
        a23 = max(-float(v2.amplitude_at(r)) - float(v3.amplitude_at(r)), 0.0)
        return 4.0 * math.pi * r * r * math.sqrt(a1 * a23)

    val, _ = scipy.integrate.quad(
        integrand, 0.0, upper, points=breaks or None,
        epsrel=rel_tol, epsabs=1e-300, limit=400,
    )
    return float(val)
