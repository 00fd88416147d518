"""Experiment dispatch: one validated config in, one RunReport out.

Each command maps onto the corresponding module operations; every number in
the report comes straight from an operation output, and tables mirror the
results one row per eigenvalue / epsilon / time sample.
"""

from __future__ import annotations

import os

import numpy as np
import scipy

from . import __version__
from .config import ExperimentConfig, build_composite_parts, build_grid, build_potential
from .contact import (
    build_model_operator,
    critical_constants,
    efimov_sequence,
    fit_all_models,
    refinement_grids,
)
from .convergence import CompositePotential, bs_kernel, cross_term_norm, epsilon_sweep
from .eigen import EigenRequest
from .errors import ValidationError
from .fieldio import read_field, write_field
from .fields import RadialField
from .grids import BoxGrid3D, lattice_radial_grid
from .meanfield import (
    MeanFieldConfig,
    evolve,
    gaussian_packet,
    gp_energy,
    ground_state,
)
from .report import RunReport
from .twobody import (
    bound_states_radial,
    extension_norms,
    radial_hamiltonian,
    realize_potential,
    scattering_length,
    tune_to_resonance,
)


def _provenance(extra: dict | None = None) -> dict:
    prov = {
        "contactlab_version": __version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
    }
    prov.update(extra or {})
    return prov


def _energy_dict(breakdown) -> dict:
    return {
        "kinetic": breakdown.kinetic,
        "trap": breakdown.trap,
        "interaction": breakdown.interaction,
        "total": breakdown.total,
    }


def _spectrum_table(result):
    rows = [
        [i + 1, result.eigenvalues[i], result.residuals[i]]
        for i in range(result.eigenvalues.size)
    ]
    return ["n", "lambda", "residual"], rows


def _run_twobody(cfg: ExperimentConfig):
    p = cfg.parameters
    spec = build_potential(p["potential"])
    grid = build_grid(p["grid"])
    pot = realize_potential(spec, grid)
    spectrum = bound_states_radial(pot, EigenRequest(k=p["k"], seed=cfg.seed))
    results = {
        "eigenvalues": list(spectrum.eigenvalues),
        "negative_count": spectrum.negative_count,
        "truncated": spectrum.truncated,
    }
    if p["norms"]:
        norms = extension_norms(spec)
        results["extension_norms"] = {"l1": norms.l1, "rollnik": norms.rollnik}
    if p["scattering"]:
        results["scattering_length"] = scattering_length(pot)
    tables = {"eigenvalues": _spectrum_table(spectrum)}
    return results, tables, grid.meta(), []


def _run_resonance(cfg: ExperimentConfig):
    p = cfg.parameters
    spec = build_potential(p["potential"])
    bracket = p["bracket"]
    if len(bracket) != 2:
        raise ValidationError(f"bracket must have two entries, got {bracket}")
    g_star = tune_to_resonance(
        spec, (bracket[0], bracket[1]), inv_tol=p["inv_tol"],
        scan_points=p["scan_points"],
    )
    return {"g_star": g_star, "inv_tol": p["inv_tol"]}, {}, {}, []


def _run_contact_spectrum(cfg: ExperimentConfig):
    p = cfg.parameters
    grid = lattice_radial_grid(p["r_min"], p["r_max"])
    op = build_model_operator(p["kind"], p["coupling"], grid)
    spectrum = efimov_sequence(op, EigenRequest(k=p["k"], seed=cfg.seed))
    results = {
        "eigenvalues": list(spectrum.eigenvalues),
        "negative_count": spectrum.negative_count,
        "truncated": spectrum.truncated,
    }
    tables = {"eigenvalues": _spectrum_table(spectrum)}
    warnings = []
    if p["fit"]:
        if np.count_nonzero(spectrum.eigenvalues < 0) >= 4:
            fits = fit_all_models(spectrum)
            results["fits"] = [
                {
                    "model": f.model,
                    "params": f.params,
                    "rms_residual": f.rms_residual,
                    "n_used": f.n_used,
                }
                for f in fits
            ]
            results["best_fit_model"] = fits[0].model
            tables["fits"] = (
                ["model", "rms_residual", "n_used"],
                [[f.model, f.rms_residual, f.n_used] for f in fits],
            )
        else:
            warnings.append("fewer than 4 negative eigenvalues; asymptotic fit skipped")
    return results, tables, grid.meta(), warnings


def _run_critical(cfg: ExperimentConfig):
    p = cfg.parameters
    grids = refinement_grids(p["r_min_coarsest"], p["r_max"], p["levels"])
    constants = critical_constants(
        p["kind"], grids, probe_tol=p["probe_tol"], c_hi=p["c_hi"]
    )
    results = {
        "c1": constants.c1,
        "c2": constants.c2,
        "extrapolated_limit": constants.extrapolated_limit,
    }
    tables = {
        "refinement": (
            ["r_min", "negative_count", "c1_level"],
            [[r_min, count, c1] for r_min, count, c1 in constants.refinement_trace],
        )
    }
    return results, tables, grids[-1].meta(), []


def _mean_field_config(p: dict, steps_key: str) -> MeanFieldConfig:
    return MeanFieldConfig(
        g=p["g"],
        trap=p["trap"],
        omega=p["omega"],
        nonlinearity=p["nonlinearity"],
        r0=p["r0"],
        mass=p["mass"],
        dt=p["dt"],
        steps=p[steps_key],
    )


def _run_gp_groundstate(cfg: ExperimentConfig, out_dir):
    p = cfg.parameters
    grid = BoxGrid3D(m=p["m"], side=p["side"])
    mf = _mean_field_config(p, "max_steps")
    init = gaussian_packet(grid, p["init_width"], p["mass"])
    state = ground_state(mf, init, tol=p["tol"], max_steps=p["max_steps"])
    results = {
        "energy": _energy_dict(state.energy),
        "gradient_residual": state.gradient_residual,
        "iterations": state.iterations,
    }
    tables = {
        "energy": (
            ["kinetic", "trap", "interaction", "total"],
            [[state.energy.kinetic, state.energy.trap,
              state.energy.interaction, state.energy.total]],
        )
    }
    extra_files = []
    if p["save_field"]:
        extra_files.append(("groundstate.fld", state.field))
    return results, tables, grid.meta(), [], extra_files


def _run_gp_evolve(cfg: ExperimentConfig, out_dir):
    p = cfg.parameters
    grid = BoxGrid3D(m=p["m"], side=p["side"])
    mf = _mean_field_config(p, "steps")
    if p["init_field"]:
        start = read_field(p["init_field"])
        if start.grid.m != grid.m or start.grid.side != grid.side:
            raise ValidationError(
                "init_field grid does not match the configured m/side"
            )
    else:
        start = gaussian_packet(grid, p["init_width"], p["mass"])
    trajectory = evolve(start, mf, sample_every=p["sample_every"])
    samples = trajectory.samples
    mass0 = samples[0].mass
    energy0 = samples[0].energy.total
    results = {
        "initial_energy": _energy_dict(samples[0].energy),
        "final_energy": _energy_dict(samples[-1].energy),
        "mass_drift": max(abs(s.mass - mass0) for s in samples),
        "energy_drift": max(abs(s.energy.total - energy0) for s in samples),
        "samples": len(samples),
    }
    tables = {
        "trajectory": (
            ["time", "mass", "kinetic", "trap", "interaction", "total"],
            [[s.time, s.mass, s.energy.kinetic, s.energy.trap,
              s.energy.interaction, s.energy.total] for s in samples],
        )
    }
    extra_files = []
    if p["save_field"]:
        extra_files.append(("final.fld", trajectory.snapshots[-1][1]))
    return results, tables, grid.meta(), [], extra_files


def _run_sweep(cfg: ExperimentConfig):
    p = cfg.parameters
    composite = CompositePotential(*build_composite_parts(p["composite"]))
    grid = build_grid(p["grid"])
    report = epsilon_sweep(composite, p["epsilons"], grid, z=p["z"])
    cross = [cross_term_norm(composite, eps) for eps in p["epsilons"]]
    results = {
        "epsilons": list(report.epsilons),
        "ground_eigenvalues": [r.ground_eigenvalue for r in report.per_epsilon],
        "cauchy_gaps": list(report.cauchy_gaps),
        "monotone_flag": report.monotone_flag,
        "bs_max_eigenvalues": [r.bs_max_eigenvalue for r in report.per_epsilon],
        "extension_norms": [r.extension_norms for r in report.per_epsilon],
        "cross_term_norms": cross,
    }
    tables = {
        "sweep": (
            ["epsilon", "ground_eigenvalue", "negative_count", "cross_term_norm"],
            [[r.epsilon, r.ground_eigenvalue, r.negative_count, c]
             for r, c in zip(report.per_epsilon, cross)],
        )
    }
    return results, tables, grid.meta(), []


def _run_bs_kernel(cfg: ExperimentConfig):
    p = cfg.parameters
    spec = build_potential(p["potential"])
    grid = build_grid(p["grid"])
    pot = realize_potential(spec, grid)
    free = radial_hamiltonian(RadialField(grid=grid, values=np.zeros(grid.n)))
    kernel = bs_kernel(
        free, RadialField(grid=grid, values=np.maximum(-np.real(pot.values), 0.0)),
        p["z"],
    )
    results = {
        "z": kernel.z,
        "max_eigenvalue": kernel.max_eigenvalue(),
        "count_above_one": kernel.count_above_one(),
        "support_size": int(kernel.support.size),
    }
    return results, {}, grid.meta(), []


def _run_cross_term(cfg: ExperimentConfig):
    p = cfg.parameters
    composite = CompositePotential(*build_composite_parts(p["composite"]))
    eps = p["epsilons"]
    norms = [cross_term_norm(composite, e) for e in eps]
    results = {"epsilons": list(eps), "norms": norms}
    warnings = []
    if len(eps) >= 2 and all(n > 0 for n in norms):
        slope = float(np.polynomial.polynomial.polyfit(
            np.log(eps), np.log(norms), 1)[1])
        results["loglog_slope"] = slope
    else:
        warnings.append("log-log slope skipped (need >= 2 positive norms)")
    tables = {
        "crossterm": (["epsilon", "norm"], [[e, n] for e, n in zip(eps, norms)])
    }
    return results, tables, {}, warnings


def run_experiment(cfg: ExperimentConfig) -> tuple[RunReport, list]:
    """Execute the command and assemble the report.

    Returns the report plus a list of (filename, WaveField) snapshots for the
    caller to persist next to the report.
    """
    extra_files = []
    if cfg.command == "twobody":
        results, tables, grid_meta, warnings = _run_twobody(cfg)
    elif cfg.command == "resonance":
        results, tables, grid_meta, warnings = _run_resonance(cfg)
    elif cfg.command == "contact-spectrum":
        results, tables, grid_meta, warnings = _run_contact_spectrum(cfg)
    elif cfg.command == "critical":
        results, tables, grid_meta, warnings = _run_critical(cfg)
    elif cfg.command == "gp-groundstate":
        results, tables, grid_meta, warnings, extra_files = _run_gp_groundstate(
            cfg, cfg.output_dir)
    elif cfg.command == "gp-evolve":
        results, tables, grid_meta, warnings, extra_files = _run_gp_evolve(
            cfg, cfg.output_dir)
    elif cfg.command == "sweep":
        results, tables, grid_meta, warnings = _run_sweep(cfg)
    elif cfg.command == "bs-kernel":
        results, tables, grid_meta, warnings = _run_bs_kernel(cfg)
    elif cfg.command == "cross-term":
        results, tables, grid_meta, warnings = _run_cross_term(cfg)
    else:
        raise ValidationError(f"unknown command {cfg.command!r}")

    report = RunReport(
        config_echo=cfg.echo(),
        results=results,
        provenance=_provenance({"grid": grid_meta}),
        warnings=warnings,
        tables=tables,
    )
    return report, extra_files


def persist_fields(extra_files, out_dir) -> list:
    written = []
    for name, fld in extra_files:
        path = os.path.join(out_dir, name)
        write_field(fld, path)
        written.append(path)
    return written
