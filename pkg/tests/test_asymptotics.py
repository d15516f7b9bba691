import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tracelab.asymptotics import (
    fit_asymptotic,
    fit_heat_curve,
    karamata_convert,
    laplace_stieltjes,
    spectral_zeta,
)
from tracelab.constants import AsymptoticLaw, Regime, gamma_fn
from tracelab.errors import ConvergenceError, TraceTruncationError
from tracelab.spectra import Spectrum


class TestKaramata:
    def test_gamma_factor(self):
        heat = AsymptoticLaw(2.0, 1, 2.0, Regime.HEAT_TRACE)
        counting = karamata_convert(heat)
        assert counting.regime is Regime.COUNTING
        assert counting.constant == pytest.approx(2.0 / gamma_fn(3.0))
        assert counting.power == 2.0 and counting.log_power == 1

    @given(st.floats(0.2, 6.0), st.integers(0, 2), st.floats(1e-3, 1e3))
    def test_involution(self, power, log_power, constant):
        law = AsymptoticLaw(power, log_power, constant, Regime.COUNTING)
        back = karamata_convert(karamata_convert(law))
        assert back.power == law.power
        assert back.log_power == law.log_power
        assert back.constant == pytest.approx(law.constant, rel=1e-12)
        assert back.regime is law.regime


class TestLaplaceStieltjes:
    def test_quadratic_counting_oracle(self):
        E = np.arange(0.0, 4000.0, 0.05)
        for t in (0.01, 0.05, 0.1):
            val = laplace_stieltjes((E, E**2), t)
            assert val == pytest.approx(2.0 / t**2, rel=1e-3)

    def test_spectrum_input(self):
        spec = Spectrum(2.0 * np.arange(50) + 1.0)
        assert laplace_stieltjes(spec, 1.0) == pytest.approx(0.5 / math.sinh(1.0))

    def test_remainder_guard(self):
        E = np.linspace(0.0, 10.0, 200)
        with pytest.raises(TraceTruncationError):
            laplace_stieltjes((E, E**2), 0.01)


class TestFits:
    def _synthetic(self, c, l, d, n=400):
        E = np.geomspace(2.0, 200.0, n)
        return E, c * E**l * np.log(E) ** d

    def test_pure_power_round_trip(self):
        E, N = self._synthetic(0.4, 2.5, 0)
        fit = fit_asymptotic((E, N), d_candidates=(0, 1), window=(2.0, 200.0))
        assert fit.law.log_power == 0
        assert fit.law.power == pytest.approx(2.5, abs=1e-6)
        assert fit.law.constant == pytest.approx(0.4, rel=1e-6)

    def test_log_model_round_trip(self):
        E, N = self._synthetic(0.3, 1.5, 1)
        fit = fit_asymptotic((E, N), d_candidates=(0, 1), window=(2.0, 200.0))
        assert fit.law.log_power == 1
        assert fit.law.power == pytest.approx(1.5, abs=1e-6)

    def test_small_window_warns(self):
        E = np.geomspace(50.0, 55.0, 50)
        fit = fit_asymptotic((E, E**2), window=(50.0, 55.0))
        assert fit.conditioning_warning is not None

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            fit_asymptotic((np.array([2.0, 3.0]), np.array([1.0, 2.0])))

    def test_heat_curve_fit(self):
        t = np.geomspace(1e-3, 0.5, 60)
        z = 1.3 * t**-2.5
        fit = fit_heat_curve(t, z, d_candidates=(0,))
        assert fit.law.regime is Regime.HEAT_TRACE
        assert fit.law.power == pytest.approx(2.5, abs=1e-9)
        assert fit.law.constant == pytest.approx(1.3, rel=1e-9)


class TestSpectralZeta:
    def test_harmonic_zeta_two(self):
        spec = Spectrum(2.0 * np.arange(200) + 1.0)
        val = spectral_zeta(spec, 2.0, tail="weyl-power")
        assert val.total == pytest.approx(math.pi**2 / 8.0, abs=2e-3)
        assert val.error >= 0

    def test_tail_divergence_guard(self):
        spec = Spectrum(2.0 * np.arange(100) + 1.0)
        with pytest.raises(ConvergenceError):
            spectral_zeta(spec, 0.8, tail="weyl-power")

    def test_no_tail_mode(self):
        spec = Spectrum(np.array([1.0, 2.0, 4.0] * 1 + [8.0] * 0))
        val = spectral_zeta(spec, 1.0, tail="none")
        assert val.total == pytest.approx(1.0 + 0.5 + 0.25)
        assert val.tail_estimate == 0.0
