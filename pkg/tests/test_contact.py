import numpy as np
import pytest

from contactlab.contact import (
    FIT_MODELS,
    build_model_operator,
    critical_constants,
    efimov_sequence,
    fit_all_models,
    fit_asymptotics,
    model_negative_count,
    refinement_grids,
)
from contactlab.eigen import EigenRequest, SpectrumResult, check_symmetry
from contactlab.errors import ValidationError
from contactlab.grids import lattice_radial_grid, make_radial_grid


def synthetic(eigenvalues):
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    return SpectrumResult(eigenvalues=ev, residuals=np.zeros(ev.size))


class TestModelOperator:
    def test_requires_lattice_grid(self):
        grid = make_radial_grid(50, 0.5, 1.0)
        with pytest.raises(ValidationError):
            build_model_operator("strong", 1.0, grid)

    def test_handle_is_symmetric(self):
        grid = lattice_radial_grid(0.01, 1.0)
        op = build_model_operator("strong", 1.0, grid)
        check_symmetry(op.handle())

    def test_matvec_matches_dense(self):
        grid = lattice_radial_grid(0.02, 1.0)
        op = build_model_operator("weak", 0.8, grid)
        handle = op.handle()
        rng = np.random.default_rng(0)
        x = rng.standard_normal(grid.n)
        assert np.allclose(handle.matvec(x), handle.dense() @ x, atol=1e-9)

    def test_b_kernel_must_be_symmetric_zero_diagonal(self):
        grid = lattice_radial_grid(0.1, 1.0)
        bad = np.eye(grid.n)
        with pytest.raises(ValidationError):
            build_model_operator("strong", 1.0, grid, b_kernel=bad)

    def test_subcritical_has_no_negatives(self):
        grid = lattice_radial_grid(1e-3, 1.0)
        assert model_negative_count("strong", 0.3, grid) == 0

    def test_supercritical_grows_under_refinement(self):
        counts = [
            model_negative_count("strong", 4.0, lattice_radial_grid(r, 1.0))
            for r in (0.01, 0.005, 0.0025, 0.00125)
        ]
        assert all(b > a for a, b in zip(counts, counts[1:])), counts

    def test_scale_covariance(self):
        # dilating the grid by s scales every eigenvalue by 1/s
        coarse = lattice_radial_grid(0.002, 1.0)
        dilated = lattice_radial_grid(0.004, 2.0)
        req = EigenRequest(k=3)
        a = efimov_sequence(build_model_operator("strong", 2.0, coarse), req)
        b = efimov_sequence(build_model_operator("strong", 2.0, dilated), req)
        assert np.allclose(b.eigenvalues, a.eigenvalues / 2.0, rtol=1e-8)


class TestEfimovSequence:
    def test_negatives_only_and_truncation_flag(self):
        grid = lattice_radial_grid(1e-3, 1.0)
        op = build_model_operator("strong", 2.0, grid)
        res = efimov_sequence(op, EigenRequest(k=10))
        assert np.all(res.eigenvalues < 0)
        assert res.truncated == (res.negative_count < 10)

    def test_pinned_count_small_coupling_deep_cutoff(self):
        # frozen against direct dense diagonalization of the same operator
        grid = lattice_radial_grid(1e-4, 0.2001)
        assert grid.n == 2000
        assert model_negative_count("strong", 1.0, grid) == 2

    def test_k_must_be_positive(self):
        grid = lattice_radial_grid(0.1, 1.0)
        op = build_model_operator("strong", 2.0, grid)
        with pytest.raises(ValidationError):
            efimov_sequence(op, EigenRequest(k=0))


class TestCriticalConstants:
    def test_ladder_brackets_the_threshold(self):
        grids = refinement_grids(0.02, 1.0, 4)
        constants = critical_constants("strong", grids, probe_tol=5e-3)
        assert 0 < constants.c1 <= constants.c2
        # per-level thresholds decrease toward the continuum limit
        levels = [c1 for (_, _, c1) in constants.refinement_trace]
        assert all(b < a for a, b in zip(levels, levels[1:]))
        assert constants.extrapolated_limit < levels[-1]

    def test_needs_at_least_four_grids(self):
        with pytest.raises(ValidationError):
            critical_constants("strong", refinement_grids(0.02, 1.0, 3))


class TestFits:
    def test_exact_recovery_sqrt(self):
        n = np.arange(1, 13)
        fit = fit_asymptotics(synthetic(-2.5 / np.sqrt(n)), "sqrt_n")
        assert fit.rms_residual < 1e-12
        assert fit.params["c"] == pytest.approx(2.5)

    def test_exact_recovery_log(self):
        n = np.arange(1, 13)
        fit = fit_asymptotics(synthetic(-1.7 * np.log(n)), "log_n")
        assert fit.rms_residual < 1e-12
        assert fit.params["b"] == pytest.approx(1.7)

    def test_exact_recovery_geometric(self):
        n = np.arange(1, 13)
        fit = fit_asymptotics(synthetic(-3.0 * np.exp(-0.9 * n)), "geometric")
        assert fit.rms_residual < 1e-12
        assert fit.params["kappa"] == pytest.approx(0.9)

    def test_exact_recovery_recip(self):
        n = np.arange(1, 13)
        fit = fit_asymptotics(synthetic(-4.0 / n), "recip_n")
        assert fit.rms_residual < 1e-12

    def test_all_models_ranked_by_residual(self):
        n = np.arange(1, 13)
        reports = fit_all_models(synthetic(-3.0 * np.exp(-0.9 * n)))
        assert len(reports) == len(FIT_MODELS)
        assert reports[0].model == "geometric"
        res = [r.rms_residual for r in reports]
        assert res == sorted(res)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValidationError):
            fit_asymptotics(synthetic([-3.0, -1.0, -0.5]), "sqrt_n")
