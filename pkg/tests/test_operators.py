import math

import numpy as np
import pytest

from tracelab.constants import ExponentVector, scale_potential_spectrum
from tracelab.errors import ConvergenceError, GridError, ReliabilityError
from tracelab.operators import (
    GridSpec,
    build_dirichlet_nd,
    build_operator_1d,
    build_operator_nd,
    converge_spectrum,
    counting_function,
    eigenvalues,
    ground_energy_1d,
    homotopy_to_dirichlet,
)

ALPHA21 = ExponentVector((2.0, 1.0))
ALPHA11 = ExponentVector((1.0, 1.0))


class TestGridSpec:
    def test_spacing_and_nodes(self):
        g = GridSpec.from_spacing((2.0,), 0.1)
        assert g.spacings[0] <= 0.1
        x = g.axis_nodes(0)
        assert x[0] == pytest.approx(-2.0 + g.spacings[0])
        assert x[-1] == pytest.approx(2.0 - g.spacings[0])

    def test_refined_keeps_nodes_nested(self):
        g = GridSpec((3.0,), (11,))
        r = g.refined()
        assert r.points == (23,)
        assert set(np.round(g.axis_nodes(0), 12)) <= set(np.round(r.axis_nodes(0), 12))

    def test_validation(self):
        with pytest.raises(GridError):
            GridSpec((-1.0,), (10,))
        with pytest.raises(GridError):
            GridSpec((1.0, 2.0), (10,))


class TestOneDimensional:
    def test_harmonic_levels(self):
        grid = GridSpec.from_spacing((10.0,), 0.02)
        spec = converge_spectrum(lambda g: build_operator_1d(2.0, 1.0, g), grid,
                                 k=8, rel_tol=1e-4, max_refinements=4, richardson=True)
        exact = 2.0 * np.arange(8) + 1.0
        assert np.max(np.abs(spec.eigenvalues - exact) / exact) < 1e-5

    def test_grid_halving_reduces_error_fourfold(self):
        grid = GridSpec.from_spacing((10.0,), 0.08)
        coarse = eigenvalues(build_operator_1d(2.0, 1.0, grid), 5).eigenvalues
        fine = eigenvalues(build_operator_1d(2.0, 1.0, grid.refined()), 5).eigenvalues
        exact = 2.0 * np.arange(5) + 1.0
        ratio = np.abs(coarse - exact) / np.abs(fine - exact)
        assert np.all(ratio > 3.0) and np.all(ratio < 5.0)

    def test_coupling_scaling_spot_check(self):
        grid = GridSpec.from_spacing((12.0,), 0.02)
        unit = converge_spectrum(lambda g: build_operator_1d(3.0, 1.0, g), grid,
                                 k=6, rel_tol=1e-4, max_refinements=4, richardson=True)
        scaled = converge_spectrum(lambda g: build_operator_1d(3.0, 4.0, g), grid,
                                   k=6, rel_tol=1e-4, max_refinements=4, richardson=True)
        predicted = scale_potential_spectrum(unit, 4.0, 3.0).eigenvalues
        assert np.max(np.abs(scaled.eigenvalues - predicted) / predicted) < 1e-4

    def test_ground_energy_values(self):
        assert ground_energy_1d(1.0) == pytest.approx(1.018793, abs=1e-4)
        assert ground_energy_1d(2.0) == pytest.approx(1.0, abs=1e-5)
        # steep exponents approach the unit-box Dirichlet energy pi**2/4
        assert ground_energy_1d(64.0) == pytest.approx(math.pi**2 / 4.0, rel=0.25)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            build_operator_1d(-1.0, 1.0, GridSpec.from_spacing((5.0,), 0.1))
        with pytest.raises(ValueError):
            ground_energy_1d(0.0)


class TestProductPotential:
    def test_spectrum_discrete_and_positive(self):
        grid = GridSpec.from_spacing((6.0, 24.0), 0.2)
        spec = eigenvalues(build_operator_nd(ALPHA21, grid), 12)
        assert np.all(spec.eigenvalues > 0)
        assert np.all(np.diff(spec.eigenvalues) >= -1e-12)
        assert math.isfinite(spec.reliability_cutoff)

    def test_reliability_guard(self):
        grid = GridSpec.from_spacing((6.0, 24.0), 0.2)
        spec = eigenvalues(build_operator_nd(ALPHA21, grid), 12)
        with pytest.raises(ReliabilityError):
            counting_function(spec, spec.reliability_cutoff * 2.0)
        assert counting_function(spec, spec.eigenvalues[2] + 1e-9) >= 3

    def test_dimension_mismatch(self):
        with pytest.raises(GridError):
            build_operator_nd(ALPHA21, GridSpec.from_spacing((5.0,), 0.1))


class TestDirichletDomain:
    def test_domain_indicator(self):
        op = build_dirichlet_nd(ALPHA11, GridSpec.from_spacing((3.0, 3.0), 0.1))
        x = np.array([0.5, 2.0])
        inside = op.domain_inside([x, x])
        # |xy| < 1 holds at (0.5, 0.5) but not at (2, 2)
        assert inside[0, 0] and not inside[1, 1]

    def test_ground_state_converges(self):
        vals = []
        for h in (0.12, 0.06):
            op = build_dirichlet_nd(ALPHA11, GridSpec.from_spacing((6.0, 6.0), h))
            vals.append(eigenvalues(op, 1).eigenvalues[0])
        # first-order boundary error: halving the spacing halves the motion
        assert abs(vals[1] - vals[0]) < 0.1
        assert vals[1] == pytest.approx(2.17, abs=0.1)


class TestHomotopy:
    def test_requires_ascending_powers(self):
        grid = GridSpec.from_spacing((4.0, 4.0), 0.2)
        with pytest.raises(ValueError):
            homotopy_to_dirichlet(ALPHA11, [4, 2], grid, k=2)

    def test_monotone_toward_dirichlet(self):
        grid = GridSpec.from_spacing((4.0, 4.0), 0.1)
        seq = homotopy_to_dirichlet(ALPHA11, [1, 4, 16], grid, k=2)
        evs = np.array([s.eigenvalues for s in seq])
        assert np.all(np.diff(evs, axis=0) > 0)


def test_convergence_budget_error():
    grid = GridSpec.from_spacing((8.0,), 0.4)
    with pytest.raises(ConvergenceError):
        converge_spectrum(lambda g: build_operator_1d(2.0, 1.0, g), grid,
                          k=4, rel_tol=1e-12, max_refinements=1)
