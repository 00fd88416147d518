import math

import numpy as np
import pytest
import scipy.optimize

from contactlab.eigen import EigenRequest
from contactlab.errors import BracketError, ResolutionError, ValidationError
from contactlab.grids import UNIFORM, make_radial_grid
from contactlab.twobody import (
    STRONG,
    UNSCALED,
    WEAK,
    GaussianShape,
    PotentialSpec,
    SquareWell,
    TableShape,
    bound_states_radial,
    extension_norms,
    realize_potential,
    scattering_length,
    tune_to_resonance,
)


def well_spec(g, radius=1.0):
    return PotentialSpec(SquareWell(radius), g)


def fine_grid(r_max=8.0, n=20000):
    return make_radial_grid(n, r_max / n, r_max, UNIFORM)


def well_scattering_length(g):
    """Closed form for the unit square well: a = 1 - tan(sqrt(g))/sqrt(g)."""
    return 1.0 - math.tan(math.sqrt(g)) / math.sqrt(g)


def well_ground_energy(g):
    """Transcendental oracle: K cot(K R) = -kappa, K^2 = g - kappa^2."""

    def f(kappa):
        k_in = math.sqrt(g - kappa**2)
        return k_in / math.tan(k_in) + kappa

    # scan from the deepest end; f has tangent poles, so bracket by sign scan
    kappas = np.linspace(math.sqrt(g) - 1e-9, 1e-9, 400)
    vals = [f(k) for k in kappas]
    for i in range(len(kappas) - 1):
        if vals[i] * vals[i + 1] < 0 and abs(vals[i]) < 50 and abs(vals[i + 1]) < 50:
            kappa = scipy.optimize.brentq(f, kappas[i + 1], kappas[i])
            return -(kappa**2)
    raise AssertionError("no bound state found by the oracle")


class TestSpecs:
    def test_amplitude_scaling_powers(self):
        shape = SquareWell(1.0)
        strong = PotentialSpec(shape, 2.0, STRONG, 0.1)
        weak = PotentialSpec(shape, 2.0, WEAK, 0.1)
        plain = PotentialSpec(shape, 2.0, UNSCALED, 0.1)
        assert strong.amplitude == pytest.approx(2.0 * 1e3)
        assert weak.amplitude == pytest.approx(2.0 * 1e2)
        assert plain.amplitude == pytest.approx(2.0)

    def test_epsilon_shrinks_the_range(self):
        spec = PotentialSpec(SquareWell(1.0), 1.0, STRONG, 0.25)
        assert spec.range_radius == pytest.approx(0.25)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValidationError):
            PotentialSpec(SquareWell(1.0), -1.0)
        with pytest.raises(ValidationError):
            PotentialSpec(SquareWell(1.0), 1.0, STRONG, 1.5)
        with pytest.raises(ValidationError):
            PotentialSpec(SquareWell(1.0), 1.0, "cubic")

    def test_table_shape_interpolates(self):
        shape = TableShape(radii=(0.0, 1.0, 2.0), samples=(1.0, 0.5, 0.0))
        assert shape.profile(0.5) == pytest.approx(0.75)
        assert shape.profile(3.0) == 0.0


class TestRealization:
    def test_under_resolved_support_rejected(self):
        grid = make_radial_grid(100, 0.1, 10.0, UNIFORM)
        spec = PotentialSpec(SquareWell(1.0), 1.0, STRONG, 0.01)
        with pytest.raises(ResolutionError):
            realize_potential(spec, grid)

    def test_cell_average_recovers_well_depth(self):
        grid = fine_grid()
        pot = realize_potential(well_spec(3.0), grid)
        inside = grid.nodes < 0.9
        assert np.allclose(np.real(pot.values)[inside], -3.0)


class TestNorms:
    def test_square_well_l1_closed_form(self):
        norms = extension_norms(well_spec(2.0))
        assert norms.l1 == pytest.approx(2.0 * 4.0 * math.pi / 3.0, rel=1e-8)

    def test_strong_class_l1_is_epsilon_invariant(self):
        shape = GaussianShape(0.7)
        a = extension_norms(PotentialSpec(shape, 1.5, STRONG, 1.0))
        b = extension_norms(PotentialSpec(shape, 1.5, STRONG, 0.05))
        assert a.l1 == pytest.approx(b.l1, rel=1e-12)

    def test_weak_class_rollnik_is_epsilon_invariant(self):
        shape = SquareWell(1.0)
        a = extension_norms(PotentialSpec(shape, 1.5, WEAK, 1.0))
        b = extension_norms(PotentialSpec(shape, 1.5, WEAK, 0.05))
        assert a.rollnik == pytest.approx(b.rollnik, rel=1e-12)

    def test_strong_class_rollnik_diverges(self):
        shape = SquareWell(1.0)
        a = extension_norms(PotentialSpec(shape, 1.0, STRONG, 0.1))
        b = extension_norms(PotentialSpec(shape, 1.0, STRONG, 0.05))
        assert b.rollnik > a.rollnik * 3.9  # eps^-2 growth


class TestSpectra:
    def test_square_well_ground_state_oracle(self):
        grid = fine_grid()
        pot = realize_potential(well_spec(12.0), grid)
        res = bound_states_radial(pot, EigenRequest(k=2))
        assert res.eigenvalues[0] == pytest.approx(well_ground_energy(12.0), abs=5e-6)

    def test_shallow_well_has_no_bound_state(self):
        grid = fine_grid()
        pot = realize_potential(well_spec(1.0), grid)  # below pi^2/4
        res = bound_states_radial(pot, EigenRequest(k=2))
        assert res.negative_count == 0
        assert res.truncated

    def test_deep_well_counts_match_levels(self):
        # N bound states once g > ((2N-1) pi / 2)^2
        grid = fine_grid()
        pot = realize_potential(well_spec(30.0), grid)
        res = bound_states_radial(pot, EigenRequest(k=4))
        assert res.negative_count == 2


class TestScattering:
    def test_closed_form_match(self):
        grid = fine_grid(n=40000)
        for g in (0.3, 1.0, 2.0, 4.0, 5.5):
            pot = realize_potential(well_spec(g), grid)
            assert scattering_length(pot) == pytest.approx(
                well_scattering_length(g), rel=1e-6
            )

    def test_support_reaching_window_rejected(self):
        grid = fine_grid(r_max=1.2)
        pot = realize_potential(well_spec(1.0), grid)
        with pytest.raises(ValidationError):
            scattering_length(pot)


class TestResonance:
    def test_square_well_threshold(self):
        g_star = tune_to_resonance(well_spec(1.0), (1.0, 3.0), inv_tol=1e-10)
        assert g_star == pytest.approx(math.pi**2 / 4.0, abs=1e-8)

    def test_no_resonance_in_bracket(self):
        with pytest.raises(BracketError):
            tune_to_resonance(well_spec(1.0), (0.1, 1.0))

    def test_multiple_resonances_rejected(self):
        # pi^2/4 and 9 pi^2/4 both lie inside (1, 25)
        with pytest.raises(BracketError):
            tune_to_resonance(well_spec(1.0), (1.0, 25.0))
