import math

import numpy as np
import pytest

from tracelab.constants import AsymptoticLaw, ExponentVector, Regime
from tracelab.errors import TraceTruncationError
from tracelab.spectra import Spectrum
from tracelab.traces import (
    ChainArtifacts,
    DivergenceCertificate,
    HeatTraceCurve,
    OneDHeatTrace,
    SliceFunction,
    check_chain,
    heat_trace,
    heat_trace_modeled,
    separable_reduction,
    separable_upper_bound,
    z_classical_1d,
    z_classical_product_divergence,
    z_sliced_bread,
    z_sliced_gt,
)

ALPHA21 = ExponentVector((2.0, 1.0))
ALPHA11 = ExponentVector((1.0, 1.0))


@pytest.fixture(scope="module")
def harmonic_spectrum():
    return Spectrum(2.0 * np.arange(60) + 1.0)


class TestHeatTrace:
    def test_harmonic_oracle(self, harmonic_spectrum):
        for t in (0.5, 1.0, 2.0):
            v, err = heat_trace(harmonic_spectrum, t)
            assert v == pytest.approx(0.5 / math.sinh(t), rel=1e-10)

    def test_truncation_guard(self, harmonic_spectrum):
        short = Spectrum(harmonic_spectrum.eigenvalues[:5])
        with pytest.raises(TraceTruncationError):
            heat_trace(short, 0.05)

    def test_modeled_tail_recovers_small_t(self, harmonic_spectrum):
        short = Spectrum(harmonic_spectrum.eigenvalues[:20])
        law = AsymptoticLaw(1.0, 0, 0.5, Regime.COUNTING)  # N(E) ~ E/2
        v, err = heat_trace_modeled(short, 0.05, law)
        exact = 0.5 / math.sinh(0.05)
        assert abs(v - exact) / exact < 0.02
        assert err > 0


class TestHeatTraceCurve:
    def test_accepts_decreasing(self):
        t = np.array([0.5, 1.0, 2.0])
        HeatTraceCurve(t, np.array([3.0, 2.0, 1.0]), np.zeros(3), "test")

    def test_rejects_increasing_beyond_error(self):
        t = np.array([0.5, 1.0])
        with pytest.raises(ValueError):
            HeatTraceCurve(t, np.array([1.0, 2.0]), np.zeros(2), "test")


class TestOneDHeatTrace:
    def test_harmonic_all_regimes(self):
        tr = OneDHeatTrace(2.0)
        for s in (0.01, 0.05, 0.2, 0.5, 1.0, 3.0):
            exact = 0.5 / math.sinh(s)
            assert abs(tr.value(s) - exact) / exact < 1e-3

    def test_small_s_classical_power(self):
        tr = OneDHeatTrace(1.0)
        mu = 1.5
        ratio = tr.value(1e-4) / tr.value(2e-4)
        assert ratio == pytest.approx(2.0**mu, rel=1e-2)

    def test_value_err_brackets(self):
        tr = OneDHeatTrace(2.0)
        v, err = tr.value_err(0.1)
        assert abs(v - 0.5 / math.sinh(0.1)) < max(err, 1e-3)


class TestSlicedTraces:
    def test_sliced_bread_decreasing_in_t(self, harmonic_spectrum):
        tr = OneDHeatTrace(0.5)
        values = [z_sliced_bread(ALPHA21, t, harmonic_spectrum, tr)[0]
                  for t in (0.5, 1.0, 2.0)]
        assert values[0] > values[1] > values[2]

    def test_sliced_bread_exponent_mismatch(self, harmonic_spectrum):
        with pytest.raises(ValueError):
            z_sliced_bread(ALPHA21, 1.0, harmonic_spectrum, OneDHeatTrace(1.0))

    def test_sliced_gt_finite_for_distinct(self):
        # slice base carries the transverse exponent alpha_1 = 2
        slice_fn = SliceFunction(OneDHeatTrace(2.0), 2.0)
        v, err = z_sliced_gt(ALPHA21, 1.0, slice_fn)
        assert v > 0 and err < 0.01 * v

    def test_sliced_gt_certificate_for_equal(self):
        slice_fn = SliceFunction(OneDHeatTrace(2.0 / 3.0), 1.5)
        out = z_sliced_gt(ALPHA11, 1.0, slice_fn)
        assert isinstance(out, DivergenceCertificate)

    def test_classical_1d_value(self):
        # gamma=2: mu=1, amplitude Gamma(3/2)/sqrt(pi) = 1/2
        assert z_classical_1d(2.0, 0.5) == pytest.approx(1.0)

    def test_classical_product_divergence(self):
        cert = z_classical_product_divergence(ALPHA21)
        assert cert.quantity == "Z_cl"
        with pytest.raises(ValueError):
            z_classical_product_divergence(ExponentVector((2.0,)))


class TestSeparableBound:
    def test_reduction_exponents_shrink(self):
        pairs = separable_reduction(ALPHA21)
        assert len(pairs) == 2
        for coeff, eta in pairs:
            assert coeff > 0
            assert 0 < eta < 2.0

    def test_upper_bound_dominates_trace(self, harmonic_spectrum):
        # crude product bound must exceed the sliced estimate
        tr = OneDHeatTrace(0.5)
        zsb = z_sliced_bread(ALPHA21, 1.0, harmonic_spectrum, tr)[0]
        bound = separable_upper_bound(ALPHA21, 1.0, traces={})
        assert bound >= zsb


class TestChain:
    def test_ordering_and_certificates(self, harmonic_spectrum):
        tr = OneDHeatTrace(0.5)
        slice_fn = SliceFunction(OneDHeatTrace(2.0), 2.0)
        law = AsymptoticLaw(2.5, 0, 0.41, Regime.COUNTING)
        # stand-in quantum trace: scaled-down sliced estimate, so ordering holds
        art = ChainArtifacts(
            zq=lambda t: (0.9 * z_sliced_bread(ALPHA21, t, harmonic_spectrum, tr)[0], 0.0),
            zsb=lambda t: z_sliced_bread(ALPHA21, t, harmonic_spectrum, tr),
            zsgt=lambda t: z_sliced_gt(ALPHA21, t, slice_fn),
            zcl=z_classical_product_divergence(ALPHA21),
        )
        report = check_chain(ALPHA21, [0.5, 1.0], art)
        assert report.passed
        assert all(r["Z_cl"] == "divergent" for r in report.records)

    def test_violation_recorded_not_raised(self, harmonic_spectrum):
        art = ChainArtifacts(
            zq=lambda t: (100.0, 0.0),
            zsb=lambda t: (1.0, 0.0),
        )
        report = check_chain(ALPHA21, [1.0], art)
        assert not report.passed
        assert report.violations[0]["pair"] == ("Z_Q", "Z_SB")
