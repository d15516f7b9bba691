import math

import numpy as np
import pytest

from tracelab.constants import ExponentVector
from tracelab.feynman_kac import (
    ConfinementPolicy,
    MCParams,
    exit_probability,
    fk_confined_lower,
    fk_trace,
    log_volume_lhs,
    log_volume_rhs,
    sample_bridges,
)

ALPHA21 = ExponentVector((2.0, 1.0))


class TestBridges:
    def test_pinned_endpoints_and_anchor(self):
        ens = sample_bridges(np.array([1.5]), 0.7, steps=32, count=200, seed=4)
        assert ens.samples.shape == (200, 33, 1)
        assert np.allclose(ens.samples[:, 0, 0], 1.5)
        assert np.allclose(ens.samples[:, -1, 0], 1.5)

    def test_midpoint_variance(self):
        # bridge over [0, 2t]: variance at the midpoint is t/2
        t = 0.8
        ens = sample_bridges(np.zeros(1), t, steps=64, count=60_000, seed=9)
        var = float(ens.samples[:, 32, 0].var())
        expected = t / 2.0
        sigma = expected * math.sqrt(2.0 / 60_000)
        assert abs(var - expected) < 4.0 * sigma

    def test_deterministic_for_seed(self):
        a = sample_bridges(np.zeros(2), 0.5, 16, 50, seed=3).samples
        b = sample_bridges(np.zeros(2), 0.5, 16, 50, seed=3).samples
        c = sample_bridges(np.zeros(2), 0.5, 16, 50, seed=4).samples
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestTraceEstimates:
    def test_harmonic_oracle(self):
        est = fk_trace((2.0, 1.0), 1.0, MCParams(paths=40_000, steps=64, seed=1))
        exact = 0.5 / math.sinh(1.0)
        assert abs(est.mean - exact) <= 3.0 * est.stderr + est.truncation_bound

    def test_product_2d_runs_and_is_positive(self):
        est = fk_trace(ALPHA21, 1.0, MCParams(paths=20_000, steps=32, seed=2))
        assert est.mean > 0
        assert est.stderr < 0.1 * est.mean

    def test_deterministic(self):
        p = MCParams(paths=5_000, steps=32, seed=7)
        assert fk_trace((2.0, 1.0), 1.0, p).mean == fk_trace((2.0, 1.0), 1.0, p).mean

    def test_stderr_shrinks_with_paths(self):
        small = fk_trace((2.0, 1.0), 1.0, MCParams(paths=5_000, steps=32, seed=5))
        large = fk_trace((2.0, 1.0), 1.0, MCParams(paths=80_000, steps=32, seed=5))
        assert large.stderr < 0.5 * small.stderr

    def test_step_floor_enforced(self):
        with pytest.raises(ValueError):
            MCParams(paths=100, steps=8)

    def test_confined_lower_bounds_trace(self):
        params = MCParams(paths=30_000, steps=32, seed=6)
        full = fk_trace(ALPHA21, 0.5, params)
        policy = ConfinementPolicy(mode="xn-band", band=1.0)
        lower = fk_confined_lower(ALPHA21, 0.5, policy, params)
        assert lower.mean <= full.mean + 3.0 * (lower.stderr + full.stderr)


def test_exit_probability_under_envelope():
    rho, bound = exit_probability(0.25, band=3.0, samples=40_000, seed=8)
    assert 0.0 <= rho <= bound
    assert bound < 0.01


class TestLogVolume:
    @pytest.mark.parametrize("f", [lambda p: np.exp(-p), lambda p: (1.0 + p) ** -3.0])
    def test_identity_quadrature_n2(self, f):
        rhs = log_volume_rhs(f, 0.9, 2)
        lhs, _ = log_volume_lhs(f, 0.9, 2, method="quadrature")
        assert abs(lhs - rhs) / rhs < 1e-6

    def test_identity_n1(self):
        f = lambda p: np.exp(-p)
        rhs = log_volume_rhs(f, 0.5, 1)
        lhs, _ = log_volume_lhs(f, 0.5, 1, method="quadrature")
        assert abs(lhs - rhs) / rhs < 1e-8

    def test_identity_mc_n3(self):
        f = lambda p: np.exp(-p)
        rhs = log_volume_rhs(f, 0.8, 3)
        lhs, sigma = log_volume_lhs(f, 0.8, 3, method="MC", seed=12)
        assert abs(lhs - rhs) < 3.0 * sigma

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            log_volume_rhs(lambda p: p, -1.0, 2)
        with pytest.raises(ValueError):
            log_volume_lhs(lambda p: p, 1.0, 3, method="quadrature")
