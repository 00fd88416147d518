"""Mean-field solvers on the periodic box.

Energy functional E = <psi, -Lap psi> + <psi, V psi> - g * I[psi] with the
quartic interaction I = int |psi|^4 (cubic mode) or the shell-coupled
I = int |psi|^2 S_r0[|psi|^2] (shell mode), where S_r0 is the spherical
surface average at radius r0 (Fourier symbol sin(k r0)/(k r0)). The
variational gradient carries the factor -2g |psi|^2 psi; ground states come
from normalized imaginary-time flow with monotone-energy backtracking, and
dynamics from Strang split-step evolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .errors import CollapseError, GridError, NonConvergenceError, ValidationError
from .fields import WaveField
from .grids import BoxGrid3D
from .spectral import fft_workers

TRAP_NONE = "none"
TRAP_HARMONIC = "harmonic"
TRAP_TABLE = "user_table"

CUBIC = "cubic"
SHELL = "shell"

# Strang splitting step bound: dt * max|k|^2 must stay below this
SPLIT_STABILITY_MAX = 1.0


@dataclass(frozen=True, eq=False)
class MeanFieldConfig:
    g: float
    trap: str = TRAP_HARMONIC
    omega: float = 1.0
    trap_table: np.ndarray | None = None
    nonlinearity: str = CUBIC
    r0: float = 0.0
    mass: float = 1.0
    dt: float = 1e-3
    steps: int = 1000

    def __post_init__(self):
        if self.g < 0:
            raise ValidationError(f"coupling g must be >= 0, got {self.g}")
        if self.trap not in (TRAP_NONE, TRAP_HARMONIC, TRAP_TABLE):
            raise ValidationError(f"unknown trap {self.trap!r}")
        if self.trap == TRAP_HARMONIC and self.omega <= 0:
            raise ValidationError("harmonic trap needs omega > 0")
        if self.trap == TRAP_TABLE and self.trap_table is None:
            raise ValidationError("user_table trap needs trap_table values")
        if self.nonlinearity not in (CUBIC, SHELL):
            raise ValidationError(f"unknown nonlinearity {self.nonlinearity!r}")
        if self.mass <= 0:
            raise ValidationError("mass target must be positive")
        if self.dt <= 0:
            raise ValidationError("dt must be positive")
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")

    def trap_values(self, grid: BoxGrid3D) -> np.ndarray:
        if self.trap == TRAP_NONE:
            return np.zeros((grid.m,) * 3)
        if self.trap == TRAP_HARMONIC:
            x, y, z = grid.coords()
            return self.omega**2 * (x**2 + y**2 + z**2)
        table = np.asarray(self.trap_table, dtype=float)
        if table.shape != (grid.m,) * 3:
            raise GridError("trap_table shape does not match the grid")
        return table

    def check_shell_radius(self, grid: BoxGrid3D):
        if not grid.dx < self.r0 < grid.side / 4.0:
            raise ValidationError(
                f"shell radius r0={self.r0} outside (dx={grid.dx}, side/4={grid.side / 4})"
            )


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    trap: float
    interaction: float
    total: float

    @classmethod
    def build(cls, kinetic, trap, interaction):
        return cls(kinetic=kinetic, trap=trap, interaction=interaction,
                   total=kinetic + trap + interaction)


@dataclass(frozen=True, eq=False)
class GPState:
    field: WaveField
    energy: EnergyBreakdown
    gradient_residual: float
    iterations: int


def _fftn(a):
    return scipy.fft.fftn(a, workers=fft_workers())


def _ifftn(a):
    return scipy.fft.ifftn(a, workers=fft_workers())


def shell_multiplier(grid: BoxGrid3D, r0: float) -> np.ndarray:
    """Fourier symbol sin(|k| r0)/(|k| r0) of the surface average."""
    k = np.sqrt(grid.k_squared())
    return np.sinc(k * (r0 / np.pi))


def spherical_average(grid: BoxGrid3D, values: np.ndarray, r0: float) -> np.ndarray:
    return _ifftn(shell_multiplier(grid, r0) * _fftn(values))


def shell_nonlinearity(field: WaveField, r0: float) -> WaveField:
    """psi(x) times the surface average of |psi|^2 at radius r0 around x."""
    grid = field.grid
    if not grid.dx < r0 < grid.side / 4.0:
        raise ValidationError(
            f"shell radius r0={r0} outside (dx={grid.dx}, side/4={grid.side / 4})"
        )
    rho = np.abs(field.values) ** 2
    avg = spherical_average(grid, rho, r0).real
    return field.with_values(field.values * avg)


def _nonlinear_density(cfg: MeanFieldConfig, grid: BoxGrid3D, rho: np.ndarray) -> np.ndarray:
    """Effective density entering both energy and gradient: rho or S[rho]."""
    if cfg.nonlinearity == CUBIC:
        return rho
    cfg.check_shell_radius(grid)
    return spherical_average(grid, rho, cfg.r0).real


def gp_energy(field: WaveField, cfg: MeanFieldConfig) -> EnergyBreakdown:
    """Spectral kinetic + trap + interaction energy of the field."""
    grid = field.grid
    dvol = grid.dvol
    psi_hat = _fftn(field.values)
    kinetic = float(
        np.sum(grid.k_squared() * np.abs(psi_hat) ** 2) * dvol / grid.m**3
    )
    rho = np.abs(field.values) ** 2
    trap = float(np.sum(cfg.trap_values(grid) * rho) * dvol)
    interaction = float(-cfg.g * np.sum(rho * _nonlinear_density(cfg, grid, rho)) * dvol)
    return EnergyBreakdown.build(kinetic, trap, interaction)


def gp_gradient(field: WaveField, cfg: MeanFieldConfig, project: bool = False) -> WaveField:
    """Variational gradient (-Lap + V) psi - 2 g N[psi].

    With project=True the chemical-potential component along psi is removed
    (the constrained gradient on the fixed-mass sphere).
    """
    grid = field.grid
    lap = _ifftn(grid.k_squared() * _fftn(field.values))
    rho = np.abs(field.values) ** 2
    eff = _nonlinear_density(cfg, grid, rho)
    grad = lap + (cfg.trap_values(grid) - 2.0 * cfg.g * eff) * field.values
    if project:
        norm2 = float(np.vdot(field.values, field.values).real)
        if norm2 > 0:
            mu = np.vdot(field.values, grad) / norm2
            grad = grad - mu * field.values
    return field.with_values(grad)


def gradient_residual(field: WaveField, cfg: MeanFieldConfig) -> float:
    g = gp_gradient(field, cfg, project=True)
    return float(np.linalg.norm(g.values) * np.sqrt(field.grid.dvol))


def rms_width_sq(field: WaveField) -> float:
    """Mass-normalized second moment around the box center."""
    grid = field.grid
    x, y, z = grid.coords()
    rho = np.abs(field.values) ** 2
    total = float(np.sum(rho))
    if total == 0:
        return 0.0
    return float(np.sum((x**2 + y**2 + z**2) * rho) / total)


def gaussian_packet(grid: BoxGrid3D, width: float = 1.0, mass: float = 1.0) -> WaveField:
    """Normalized Gaussian exp(-|x|^2 / (2 width^2)) for initial data."""
    x, y, z = grid.coords()
    vals = np.exp(-(x**2 + y**2 + z**2) / (2.0 * width**2)).astype(complex)
    return WaveField(grid=grid, values=vals, norm_target=mass).normalized(mass)


def _imaginary_step(cfg: MeanFieldConfig, grid, values, dt, half_kin):
    psi = _ifftn(half_kin * _fftn(values))
    rho = np.abs(psi) ** 2
    w = cfg.trap_values(grid) - 2.0 * cfg.g * _nonlinear_density(cfg, grid, rho)
    psi = np.exp(-dt * w) * psi
    return _ifftn(half_kin * _fftn(psi))


def ground_state(
    cfg: MeanFieldConfig,
    init: WaveField,
    tol: float = 1e-8,
    max_steps: int = 20000,
) -> GPState:
    """Normalized gradient flow to the constrained minimizer.

    Two phases: split-step imaginary time takes the state close (its fixed
    point is biased by O(dt^2), so it cannot reach tight residuals alone),
    then kinetic-preconditioned projected gradient descent polishes until the
    projected gradient L2 norm falls below tol. Accepted steps never increase
    the energy; backtracking shrinks the step on an uphill proposal.
    Focusing collapse aborts with a CollapseError.
    """
    if cfg.trap == TRAP_NONE:
        raise ValidationError("ground-state runs require a confining trap")
    grid = init.grid
    if init.mass == 0:
        raise ValidationError("initial field must be nonzero")
    k2 = grid.k_squared()
    width_floor = 4.0 * grid.dx**2

    def renorm(values):
        nrm = np.sqrt(np.sum(np.abs(values) ** 2) * grid.dvol)
        return values * (np.sqrt(cfg.mass) / nrm)

    state_field = init.normalized(cfg.mass)
    psi = state_field.values
    energy = gp_energy(state_field, cfg)
    e0 = abs(energy.total)
    iterations = 0

    def check_collapse(field, e_total):
        if e_total < -10.0 * max(e0, 1e-6) and rms_width_sq(field) < width_floor:
            raise CollapseError(
                f"focusing collapse: energy {e_total:g} with width at grid scale",
                last_state=field,
            )

    # phase 1: imaginary-time split-step until the energy stops moving
    dt = cfg.dt
    eps_accept = 1e-12
    while iterations < max_steps:
        iterations += 1
        half_kin = np.exp(-0.5 * dt * k2)
        trial = renorm(_imaginary_step(cfg, grid, psi, dt, half_kin))
        if not np.all(np.isfinite(trial.view(np.float64))):
            raise CollapseError("imaginary-time flow produced non-finite values",
                                last_state=state_field)
        trial_field = WaveField(grid=grid, values=trial, norm_target=cfg.mass)
        trial_energy = gp_energy(trial_field, cfg)
        drop = energy.total - trial_energy.total
        scale = max(1.0, abs(energy.total))
        if drop >= -eps_accept * scale:
            psi = trial
            state_field = trial_field
            energy = trial_energy
            check_collapse(state_field, energy.total)
            if drop < 1e-10 * scale:
                break
        else:
            dt *= 0.5
            if dt < 1e-6 * cfg.dt:
                break

    # phase 2: preconditioned projected descent with the Rayleigh-quotient
    # step length along each direction. Near the minimizer the energy change
    # per step is O(residual^2) -- below the rounding floor of the total
    # energy -- so acceptance is on residual decrease, which stays meaningful
    # all the way to tol.
    trap = cfg.trap_values(grid)

    def residual_state(values):
        rho = np.abs(values) ** 2
        eff = _nonlinear_density(cfg, grid, rho)
        w = trap - 2.0 * cfg.g * eff
        h_psi = _ifftn(k2 * _fftn(values)) + w * values
        n2 = float(np.vdot(values, values).real)
        mu = float(np.vdot(values, h_psi).real / n2)
        grad = h_psi - mu * values
        return grad, mu, w, n2, float(np.linalg.norm(grad) * np.sqrt(grid.dvol))

    grad, mu, w, n2, res = residual_state(psi)
    while res > tol and iterations < max_steps:
        iterations += 1
        direction = _ifftn(_fftn(grad) / (k2 + max(1.0, abs(mu))))
        direction -= psi * (np.vdot(psi, direction) / n2)
        h_dir = _ifftn(k2 * _fftn(direction)) + w * direction
        curvature = float(np.vdot(direction, h_dir).real
                          - mu * np.vdot(direction, direction).real)
        numerator = float(np.vdot(grad, direction).real)
        alpha = numerator / curvature if curvature > 0 else cfg.dt
        accepted = False
        for _ in range(40):
            trial = renorm(psi - alpha * direction)
            t_grad, t_mu, t_w, t_n2, t_res = residual_state(trial)
            if t_res < res:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        psi = trial
        grad, mu, w, n2, res = t_grad, t_mu, t_w, t_n2, t_res
        state_field = WaveField(grid=grid, values=psi, norm_target=cfg.mass)
        energy = gp_energy(state_field, cfg)
        check_collapse(state_field, energy.total)

    if res <= tol:
        return GPState(field=state_field, energy=energy,
                       gradient_residual=res, iterations=iterations)
    raise NonConvergenceError(
        f"gradient flow stalled at residual {res:g} after {iterations} steps",
        achieved_residuals=[res],
    )


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    time: float
    mass: float
    energy: EnergyBreakdown


@dataclass(frozen=True, eq=False)
class Trajectory:
    samples: list
    snapshots: list  # (step index, WaveField) pairs


def evolve(
    state: GPState | WaveField,
    cfg: MeanFieldConfig,
    sample_every: int = 1,
    snapshot_steps: tuple = (),
) -> Trajectory:
    """Strang split-step evolution: half kinetic, full phase, half kinetic."""
    start = state.field if isinstance(state, GPState) else state
    grid = start.grid
    k2 = grid.k_squared()
    kmax2 = float(np.max(k2))
    if cfg.dt * kmax2 > SPLIT_STABILITY_MAX:
        raise ValidationError(
            f"dt*max|k|^2 = {cfg.dt * kmax2:g} exceeds the splitting bound "
            f"{SPLIT_STABILITY_MAX}; reduce dt below {SPLIT_STABILITY_MAX / kmax2:g}"
        )
    if cfg.nonlinearity == SHELL:
        cfg.check_shell_radius(grid)
    half_kin = np.exp(-0.5j * cfg.dt * k2)
    trap = cfg.trap_values(grid)
    psi = start.values.copy()
    samples = [TrajectorySample(0.0, start.mass, gp_energy(start, cfg))]
    snapshots = [(0, start)] if 0 in snapshot_steps else []
    for step in range(1, cfg.steps + 1):
        psi = _ifftn(half_kin * _fftn(psi))
        rho = np.abs(psi) ** 2
        w = trap - 2.0 * cfg.g * _nonlinear_density(cfg, grid, rho)
        psi = np.exp(-1j * cfg.dt * w) * psi
        psi = _ifftn(half_kin * _fftn(psi))
        if not np.all(np.isfinite(psi.view(np.float64))):
            raise CollapseError(
                f"evolution produced non-finite values at step {step}",
                last_state=samples[-1],
            )
        if step % sample_every == 0 or step == cfg.steps:
            f = WaveField(grid=grid, values=psi)
            samples.append(TrajectorySample(step * cfg.dt, f.mass, gp_energy(f, cfg)))
        if step in snapshot_steps or step == cfg.steps:
            snapshots.append((step, WaveField(grid=grid, values=psi)))
    return Trajectory(samples=samples, snapshots=snapshots)
