import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tracelab.constants import (
    ExponentVector,
    PrefactorPair,
    Regime,
    dim_exponent,
    gamma_fn,
    lemma_exponents,
    q_exponent,
    riemann_zeta,
    theorem_constant,
)

ALPHA21 = ExponentVector((2.0, 1.0))
ALPHA11 = ExponentVector((1.0, 1.0))
PI2_OVER_8 = math.pi**2 / 8.0  # sum of (2k+1)**-2


class TestExponentVector:
    def test_sorted_descending_with_permutation(self):
        v = ExponentVector((1.0, 3.0, 2.0))
        assert v.alphas == (3.0, 2.0, 1.0)
        assert v.permutation == (1, 2, 0)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ExponentVector((2.0, 0.0))

    def test_equal_and_distinct_flags(self):
        assert ALPHA11.is_equal and not ALPHA11.strictly_distinct
        assert ALPHA21.strictly_distinct and not ALPHA21.is_equal
        assert ALPHA11.alpha0 == 1.0
        with pytest.raises(ValueError):
            ALPHA21.alpha0

    @given(st.lists(st.floats(0.1, 50.0), min_size=1, max_size=5))
    def test_order_invariance(self, values):
        assert ExponentVector(values).alphas == ExponentVector(sorted(values)).alphas


class TestDerivedExponents:
    def test_dim_exponent(self):
        assert dim_exponent(ALPHA21) == pytest.approx(2.0)
        assert dim_exponent(ALPHA11) == pytest.approx(1.5)
        assert q_exponent(ALPHA21) == pytest.approx(1.0)

    def test_lemma_exponents(self):
        ex = lemma_exponents(2.0, n=2, alpha0=1.0)
        assert ex.tau == pytest.approx(0.5)
        assert ex.mu == pytest.approx(1.0)
        assert ex.d_n == pytest.approx(1.5)
        assert ex.b_n == pytest.approx(0.75)


class TestTheoremConstants:
    def test_heat_pair_distinct(self):
        pair = theorem_constant("T1", ALPHA21, zeta_value=PI2_OVER_8)
        assert isinstance(pair, PrefactorPair)
        assert pair.sliced.power == pytest.approx(2.5)
        assert pair.sliced.regime is Regime.HEAT_TRACE
        # pi**-0.5 * Gamma(3) * pi**2/8
        assert pair.sliced.constant == pytest.approx(2.0 * PI2_OVER_8 / math.sqrt(math.pi))
        assert pair.full.constant == pytest.approx(2.0 * PI2_OVER_8 / math.pi)
        assert pair.sliced.constant / pair.full.constant == pytest.approx(math.sqrt(math.pi))

    def test_counting_pair_distinct(self):
        pair = theorem_constant("T3", ALPHA21, zeta_value=PI2_OVER_8)
        expected = PI2_OVER_8 * gamma_fn(3.0) / (math.sqrt(math.pi) * gamma_fn(3.5))
        assert pair.sliced.constant == pytest.approx(expected)
        assert pair.sliced.regime is Regime.COUNTING

    def test_equal_exponent_heat(self):
        law = theorem_constant("T2", ALPHA11)
        assert law.power == pytest.approx(2.0)
        assert law.log_power == 1
        assert law.constant == pytest.approx(2.0 / math.pi)

    def test_equal_exponent_counting(self):
        law = theorem_constant("T4", ALPHA11)
        assert law.constant == pytest.approx(1.0 / math.pi, abs=1e-15)

    def test_domain_counting(self):
        law = theorem_constant("T7", ALPHA11)
        assert law.power == pytest.approx(1.0)
        assert law.log_power == 1
        assert law.constant == pytest.approx(1.0 / math.pi, abs=1e-15)

    def test_power_domain_2d(self):
        law = theorem_constant("Simon2D-power", ALPHA21)
        assert law.constant == pytest.approx(8.0 / (9.0 * math.pi), abs=1e-13)
        assert law.power == pytest.approx(1.5)

    def test_log_domain_2d(self):
        law = theorem_constant("Simon2D-log", ALPHA11)
        assert law.constant == pytest.approx(1.0 / math.pi)

    def test_power_domain_requires_distinct_ratio(self):
        with pytest.raises(ValueError):
            theorem_constant("Simon2D-power", ALPHA11)

    def test_zeta_required_for_anchored_laws(self):
        with pytest.raises(ValueError):
            theorem_constant("T1", ALPHA21)

    def test_unknown_id(self):
        with pytest.raises(ValueError):
            theorem_constant("T99", ALPHA21)


def test_riemann_zeta_values():
    assert riemann_zeta(2.0) == pytest.approx(math.pi**2 / 6.0)
    with pytest.raises(ValueError):
        riemann_zeta(1.0)
