"""Exponent vectors, scaling relations, and closed-form asymptotic constants.

The asymptotic laws computed here describe either the small-time behavior of
a heat trace, ``Z(t) ~ c * t**(-l) * |log t|**d``, or the large-energy
behavior of an eigenvalue counting function, ``N(E) ~ c * E**l * (log E)**d``.
The two regimes are related by a Tauberian correspondence that multiplies or
divides the constant by Gamma(l+1) and preserves (l, d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from scipy.special import gamma as _scipy_gamma
from scipy.special import zeta as _scipy_zeta

from .spectra import Spectrum

__all__ = [
    "ExponentVector",
    "AsymptoticLaw",
    "ScalingExponents",
    "Regime",
    "PrefactorPair",
    "gamma_fn",
    "riemann_zeta",
    "dim_exponent",
    "q_exponent",
    "scale_potential_spectrum",
    "scale_laplacian_spectrum",
    "lemma_exponents",
    "theorem_constant",
    "THEOREM_IDS",
]


def gamma_fn(x: float) -> float:
    """Gamma function on the positive half line."""
    if x <= 0:
        raise ValueError(f"gamma_fn requires x > 0, got {x}")
    return float(_scipy_gamma(x))


def riemann_zeta(s: float) -> float:
    """Riemann zeta on s > 1 (where the defining series converges)."""
    if s <= 1:
        raise ValueError(f"riemann_zeta requires s > 1, got {s}")
    return float(_scipy_zeta(s, 1))


class Regime(str, Enum):
    HEAT_TRACE = "heat-trace-small-t"
    COUNTING = "counting-large-E"


@dataclass(frozen=True)
class ExponentVector:
    """Potential exponents (alpha_1, ..., alpha_n), stored sorted descending.

    Callers may supply the exponents in any order; the applied sorting
    permutation is recorded.
    """

    alphas: tuple
    permutation: tuple

    def __init__(self, alphas):
        values = [float(a) for a in alphas]
        if len(values) < 1:
            raise ValueError("at least one exponent required")
        if any(not math.isfinite(a) or a <= 0 for a in values):
            raise ValueError(f"exponents must be positive and finite: {values}")
        order = sorted(range(len(values)), key=lambda i: -values[i])
        object.__setattr__(self, "alphas", tuple(values[i] for i in order))
        object.__setattr__(self, "permutation", tuple(order))

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def is_equal(self) -> bool:
        return max(self.alphas) - min(self.alphas) <= 1e-12 * max(self.alphas)

    @property
    def alpha0(self) -> float:
        if not self.is_equal:
            raise ValueError("alpha0 only defined for equal exponents")
        return self.alphas[0]

    @property
    def strictly_distinct(self) -> bool:
        return all(a > b * (1 + 1e-12) for a, b in zip(self.alphas, self.alphas[1:]))

    def scaled(self, j: float) -> "ExponentVector":
        return ExponentVector([j * a for a in self.alphas])

    def drop_smallest(self) -> "ExponentVector":
        if self.n < 2:
            raise ValueError("cannot drop from a 1D exponent vector")
        return ExponentVector(self.alphas[:-1])


@dataclass(frozen=True)
class AsymptoticLaw:
    """A law c * E**l * (log E)**d (counting) or c * t**(-l) * |log t|**d (heat)."""

    power: float
    log_power: int
    constant: float
    regime: Regime

    def __post_init__(self):
        if self.power <= 0:
            raise ValueError("power must be positive")
        if self.log_power < 0 or int(self.log_power) != self.log_power:
            raise ValueError("log_power must be a nonnegative integer")
        if not (self.constant > 0 and math.isfinite(self.constant)):
            raise ValueError("constant must be positive and finite")

    def predict(self, x) -> float:
        """Evaluate the law at energy E (counting) or time t (heat)."""
        import numpy as np

        x = np.asarray(x, dtype=float)
        if self.regime is Regime.COUNTING:
            return self.constant * x**self.power * np.log(x) ** self.log_power
        return self.constant * x ** (-self.power) * np.abs(np.log(x)) ** self.log_power


@dataclass(frozen=True)
class PrefactorPair:
    """Both candidate normalizations of a zeta-anchored law.

    ``sliced`` carries the pi**(-1/2) prefactor suggested by the one-step
    slicing derivation; ``full`` carries the pi**(-n/2) prefactor of the
    theorem statement.  Downstream numerics adjudicate between them.
    """

    sliced: AsymptoticLaw
    full: AsymptoticLaw

    def as_dict(self) -> dict:
        return {"sliced": self.sliced, "full": self.full}


@dataclass(frozen=True)
class ScalingExponents:
    """Exponent bookkeeping for the equal-exponent slicing analysis."""

    tau: float
    eta: float
    mu: float
    d_n: float
    b_n: float

    def __post_init__(self):
        if not (0 < self.b_n < 1):
            raise ValueError("b_n must lie in (0, 1)")


def dim_exponent(alpha: ExponentVector) -> float:
    """(alpha_1 + ... + alpha_{n-1} + 2) / (2 alpha_n)."""
    if alpha.n < 2:
        raise ValueError("dim_exponent requires dimension >= 2")
    return (sum(alpha.alphas[:-1]) + 2.0) / (2.0 * alpha.alphas[-1])


def q_exponent(alpha: ExponentVector) -> float:
    """(alpha_1 + ... + alpha_{n-1}) / (2 alpha_n)."""
    if alpha.n < 2:
        raise ValueError("q_exponent requires dimension >= 2")
    return sum(alpha.alphas[:-1]) / (2.0 * alpha.alphas[-1])


def _scale_spectrum(spectrum: Spectrum, factor: float) -> Spectrum:
    return replace(
        spectrum,
        eigenvalues=spectrum.eigenvalues * factor,
        reliability_cutoff=spectrum.reliability_cutoff * factor,
    )


def scale_potential_spectrum(spectrum: Spectrum, c: float, p: float) -> Spectrum:
    """Spectrum of -Lap + c*V from that of -Lap + V, V homogeneous of degree p.

    Every eigenvalue is multiplied by c**(2/(p+2)).
    """
    if c <= 0:
        raise ValueError("coupling c must be positive")
    if p == -2:
        raise ValueError("degree p = -2 is excluded")
    return _scale_spectrum(spectrum, c ** (2.0 / (p + 2.0)))


def scale_laplacian_spectrum(spectrum: Spectrum, c: float, p: float) -> Spectrum:
    """Spectrum of -c*Lap + V from that of -Lap + V: factor c**(p/(p+2))."""
    if c <= 0:
        raise ValueError("coupling c must be positive")
    if p == -2:
        raise ValueError("degree p = -2 is excluded")
    return _scale_spectrum(spectrum, c ** (p / (p + 2.0)))


def lemma_exponents(gamma: float, n: int = 2, alpha0: float = 1.0) -> ScalingExponents:
    """Exponents (tau, eta, mu) with the derived (d_n, b_n) for equal exponents.

    tau = 2/(gamma+2) rescales the 1D coupling, eta = ((n-1)*alpha0 + 2)/2
    rescales the (n-1)-dimensional coupling, and mu = (gamma+2)/(2*gamma) is
    the 1D classical heat-trace power.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if alpha0 <= 0:
        raise ValueError("alpha0 must be positive")
    d_n = (n - 1) / 2.0 + 1.0 / alpha0
    return ScalingExponents(
        tau=2.0 / (gamma + 2.0),
        eta=((n - 1) * alpha0 + 2.0) / 2.0,
        mu=(gamma + 2.0) / (2.0 * gamma),
        d_n=d_n,
        b_n=d_n / (d_n + 0.5),
    )


THEOREM_IDS = ("T1", "T2", "T3", "T4", "T5", "T6", "T7", "Simon2D-power", "Simon2D-log")


def _require_distinct(alpha: ExponentVector, theorem_id: str) -> None:
    if not alpha.strictly_distinct:
        raise ValueError(f"{theorem_id} requires strictly decreasing exponents, got {alpha.alphas}")


def _require_zeta(zeta_value, theorem_id: str) -> float:
    if zeta_value is None:
        raise ValueError(f"{theorem_id} needs a spectral-zeta value of the reduced operator")
    if zeta_value <= 0:
        raise ValueError("spectral-zeta value must be positive")
    return float(zeta_value)


def _equal_exponent_heat_constant(n: int, alpha0: float) -> float:
    inv = 1.0 / alpha0
    return gamma_fn(1.0 + inv) * (n / 2.0 + inv) ** (n - 1) / (
        math.pi ** (n / 2.0) * math.factorial(n - 1)
    )


def _equal_domain_counting_constant(n: int) -> float:
    return n ** (n - 1) / (
        gamma_fn(n / 2.0) * math.pi ** (n / 2.0) * 2 ** (n - 1) * math.factorial(n - 1)
    )


def theorem_constant(theorem_id: str, alpha: ExponentVector, zeta_value: float | None = None):
    """Full asymptotic law (power, log power, constant) for one of the theorems.

    Zeta-anchored laws (T1/T3/T5) return a :class:`PrefactorPair` carrying
    both candidate normalizations; the closed-form laws return a single
    :class:`AsymptoticLaw`.
    """
    n = alpha.n
    if theorem_id == "T1":
        _require_distinct(alpha, "T1")
        z = _require_zeta(zeta_value, "T1")
        d_n = dim_exponent(alpha)
        l = d_n + 0.5
        base = z * gamma_fn(d_n + 1.0)
        make = lambda pref: AsymptoticLaw(l, 0, base * pref, Regime.HEAT_TRACE)
        return PrefactorPair(sliced=make(math.pi ** -0.5), full=make(math.pi ** (-n / 2.0)))
    if theorem_id == "T3":
        _require_distinct(alpha, "T3")
        z = _require_zeta(zeta_value, "T3")
        d_n = dim_exponent(alpha)
        l = d_n + 0.5
        base = z * gamma_fn(d_n + 1.0) / gamma_fn(d_n + 1.5)
        make = lambda pref: AsymptoticLaw(l, 0, base * pref, Regime.COUNTING)
        return PrefactorPair(sliced=make(math.pi ** -0.5), full=make(math.pi ** (-n / 2.0)))
    if theorem_id == "T5":
        _require_distinct(alpha, "T5")
        z = _require_zeta(zeta_value, "T5")
        q = q_exponent(alpha)
        l = q + 0.5
        base = z * gamma_fn(q + 1.0) / gamma_fn(q + 1.5)
        make = lambda pref: AsymptoticLaw(l, 0, base * pref, Regime.COUNTING)
        return PrefactorPair(sliced=make(math.pi ** -0.5), full=make(math.pi ** (-n / 2.0)))
    if theorem_id == "T2":
        a0 = alpha.alpha0
        l = n / 2.0 + 1.0 / a0
        return AsymptoticLaw(l, n - 1, _equal_exponent_heat_constant(n, a0), Regime.HEAT_TRACE)
    if theorem_id == "T4":
        a0 = alpha.alpha0
        l = n / 2.0 + 1.0 / a0
        c = _equal_exponent_heat_constant(n, a0) / gamma_fn(l + 1.0)
        return AsymptoticLaw(l, n - 1, c, Regime.COUNTING)
    if theorem_id == "T6":
        # Heat-trace form of the equal-exponent Dirichlet-domain law.
        c = _equal_domain_counting_constant(n) * gamma_fn(n / 2.0 + 1.0)
        return AsymptoticLaw(n / 2.0, n - 1, c, Regime.HEAT_TRACE)
    if theorem_id == "T7":
        return AsymptoticLaw(n / 2.0, n - 1, _equal_domain_counting_constant(n), Regime.COUNTING)
    if theorem_id == "Simon2D-power":
        if n != 2:
            raise ValueError("Simon2D laws are 2-dimensional")
        a = alpha.alphas[0] / alpha.alphas[1]
        if a <= 1:
            raise ValueError("Simon2D-power needs exponent ratio > 1 (use Simon2D-log at ratio 1)")
        c = (
            riemann_zeta(a)
            * (math.pi / 2.0) ** (-a)
            * gamma_fn(a / 2.0 + 1.0)
            / (math.sqrt(math.pi) * gamma_fn(a / 2.0 + 1.5))
        )
        return AsymptoticLaw((a + 1.0) / 2.0, 0, c, Regime.COUNTING)
    if theorem_id == "Simon2D-log":
        if n != 2 or not alpha.is_equal:
            raise ValueError("Simon2D-log is the 2D equal-exponent law")
        return AsymptoticLaw(1.0, 1, 1.0 / math.pi, Regime.COUNTING)
    raise ValueError(f"unknown theorem id {theorem_id!r}; choose from {THEOREM_IDS}")
