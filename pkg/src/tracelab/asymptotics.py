"""Tauberian conversions, numerical Laplace-Stieltjes transforms, and law fitting.

The counting laws c*E**l*(ln E)**d and heat-trace laws c*t**(-l)*|ln t|**d are
interconvertible by the factor Gamma(l+1); this module also extracts (c, l, d)
from computed spectra by log-scale least squares and evaluates spectral zeta
values with fitted growth tails.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .constants import AsymptoticLaw, Regime, gamma_fn
from .errors import ConvergenceError, TraceTruncationError
from .spectra import Spectrum

__all__ = [
    "karamata_convert",
    "laplace_stieltjes",
    "fit_asymptotic",
    "fit_heat_curve",
    "spectral_zeta",
    "FitResult",
    "ZetaValue",
]


def karamata_convert(law: AsymptoticLaw) -> AsymptoticLaw:
    """Exchange heat-trace and counting asymptotics; involutive.

    Heat c*t**(-l)*|ln t|**d corresponds to counting (c/Gamma(l+1))*E**l*(ln E)**d.
    """
    if law.power <= 0:
        raise ValueError("law power must be positive")
    g = gamma_fn(law.power + 1.0)
    if law.regime is Regime.HEAT_TRACE:
        return AsymptoticLaw(law.power, law.log_power, law.constant / g, Regime.COUNTING)
    return AsymptoticLaw(law.power, law.log_power, law.constant * g, Regime.HEAT_TRACE)


def laplace_stieltjes(counting, t: float, remainder_limit: float = 0.05) -> float:
    """Stieltjes sum Integral exp(-t*E) dN(E) from step data.

    ``counting`` is either a Spectrum (exact jump positions) or a pair of
    arrays (E, N) sampled densely; jumps between samples are placed at
    interval midpoints.  The remainder beyond the last sample is estimated
    from the top-decade density and must stay below ``remainder_limit``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if isinstance(counting, Spectrum):
        ev = counting.eigenvalues
        value = float(np.exp(-t * ev).sum())
        if ev.size >= 2:
            density = ev.size / (ev[-1] - ev[0]) if ev[-1] > ev[0] else 0.0
        else:
            density = 0.0
        e_max = float(ev[-1])
    else:
        E, N = (np.asarray(a, dtype=float) for a in counting)
        if E.ndim != 1 or E.shape != N.shape or E.size < 2:
            raise ValueError("need matched 1D arrays of energies and counts")
        if N[0] != 0 and E[0] > 0:
            # mass below the first sample sits at (or below) E[0]
            pass
        jumps = np.diff(N)
        mids = 0.5 * (E[:-1] + E[1:])
        value = float(N[0] * math.exp(-t * E[0]) + np.sum(jumps * np.exp(-t * mids)))
        top = max(1, E.size // 10)
        density = (N[-1] - N[-1 - top]) / (E[-1] - E[-1 - top]) if E[-1] > E[-1 - top] else 0.0
        e_max = float(E[-1])
    if value == 0.0:
        return 0.0
    remainder = density / t * math.exp(-t * e_max)
    if remainder > remainder_limit * value:
        raise TraceTruncationError(
            f"cutoff remainder {remainder:.3g} exceeds {remainder_limit:.0%} of the "
            f"transform {value:.3g} at t={t}; extend the energy range"
        )
    return value


@dataclass(frozen=True)
class FitResult:
    """Best asymptotic law over a window, with the competing-model residuals."""

    law: AsymptoticLaw
    residual: float
    window: tuple
    model_comparison: dict  # d -> {"power", "constant", "residual"}
    conditioning_warning: str | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "power": self.law.power,
                "log_power": self.law.log_power,
                "constant": self.law.constant,
                "regime": self.law.regime.value,
                "residual": self.residual,
                "window": list(self.window),
                "model_comparison": self.model_comparison,
                "conditioning_warning": self.conditioning_warning,
            }
        )


def _counting_points(data) -> tuple[np.ndarray, np.ndarray, float]:
    """(E, N, reliability cutoff) pairs from a Spectrum or an (E, N) pair."""
    if isinstance(data, Spectrum):
        ev = data.eigenvalues
        return ev, np.arange(1, ev.size + 1, dtype=float), data.reliability_cutoff
    E, N = (np.asarray(a, dtype=float) for a in data)
    return E, N, math.inf


def fit_asymptotic(data, d_candidates=(0, 1), window: tuple | None = None) -> FitResult:
    """Least-squares extraction of c*E**l*(ln E)**d from counting data.

    For each candidate integer d the model log N = log c + l*log E + d*log log E
    is linear; the returned law is the lowest-residual candidate and the full
    comparison is retained.  Windows must stay below the reliability cutoff
    and above E=1 (so the log-log factor exists).
    """
    E, N, cutoff = _counting_points(data)
    lo, hi = window if window is not None else (1.0, cutoff)
    hi = min(hi, cutoff)
    mask = (E > max(lo, 1.0 + 1e-9)) & (E <= hi) & (N > 0)
    if mask.sum() < 10:
        raise ValueError("need at least 10 samples inside the fit window")
    x = np.log(E[mask])
    y = np.log(N[mask])
    llx = np.log(x)
    warn = None
    if llx.max() - llx.min() < 0.05:
        warn = "log-log-E range too small to separate the models"
    comparison = {}
    best = None
    for d in sorted(set(int(v) for v in d_candidates)):
        if d < 0:
            raise ValueError("log powers must be nonnegative")
        yy = y - d * llx
        l, logc = np.polyfit(x, yy, 1)
        resid = float(np.sqrt(np.mean((yy - (l * x + logc)) ** 2)))
        comparison[d] = {"power": float(l), "constant": float(math.exp(logc)), "residual": resid}
        if best is None or resid < comparison[best]["residual"]:
            best = d
    law = AsymptoticLaw(
        comparison[best]["power"], best, comparison[best]["constant"], Regime.COUNTING
    )
    return FitResult(
        law=law,
        residual=comparison[best]["residual"],
        window=(float(max(lo, 1.0)), float(hi)),
        model_comparison=comparison,
        conditioning_warning=warn,
    )


def fit_heat_curve(t: np.ndarray, z: np.ndarray, d_candidates=(0, 1)) -> FitResult:
    """Same extraction for small-t heat data: c*t**(-l)*|ln t|**d, t < 1."""
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(t >= 1.0) or np.any(t <= 0):
        raise ValueError("heat-law fits need 0 < t < 1")
    x = np.log(t)
    y = np.log(z)
    llx = np.log(-x)
    warn = None
    if llx.max() - llx.min() < 0.05:
        warn = "log-|log t| range too small to separate the models"
    comparison = {}
    best = None
    for d in sorted(set(int(v) for v in d_candidates)):
        yy = y - d * llx
        slope, logc = np.polyfit(x, yy, 1)
        resid = float(np.sqrt(np.mean((yy - (slope * x + logc)) ** 2)))
        comparison[d] = {"power": float(-slope), "constant": float(math.exp(logc)), "residual": resid}
        if best is None or resid < comparison[best]["residual"]:
            best = d
    law = AsymptoticLaw(
        comparison[best]["power"], best, comparison[best]["constant"], Regime.HEAT_TRACE
    )
    return FitResult(law, comparison[best]["residual"], (float(t.min()), float(t.max())),
                     comparison, warn)


@dataclass(frozen=True)
class ZetaValue:
    """Partial spectral zeta sum plus a fitted-growth tail."""

    s: float
    partial_sum: float
    tail_estimate: float
    error: float

    @property
    def total(self) -> float:
        return self.partial_sum + self.tail_estimate

    def to_json(self) -> str:
        return json.dumps(
            {
                "s": self.s,
                "partial_sum": self.partial_sum,
                "tail_estimate": self.tail_estimate,
                "total": self.total,
                "error": self.error,
            }
        )


def spectral_zeta(spectrum: Spectrum, s: float, tail: str = "weyl-power") -> ZetaValue:
    """Sum of eigenvalue powers lambda**(-s) with a counting-law tail model.

    The tail integrates E**(-s) against the fitted counting density above the
    last computed eigenvalue; it converges only when s exceeds the fitted
    growth power l (equivalently, eigenvalue growth exponent 1/l times s
    exceeds 1).
    """
    if s <= 0:
        raise ValueError("s must be positive")
    ev = spectrum.eigenvalues
    partial = float(np.sum(ev ** -s))
    if tail == "none":
        return ZetaValue(s, partial, 0.0, 0.0)
    if tail not in ("weyl-power", "weyl-power-log"):
        raise ValueError("tail must be 'none', 'weyl-power' or 'weyl-power-log'")
    d = 0 if tail == "weyl-power" else 1
    fit = fit_asymptotic(spectrum, d_candidates=(d,), window=(float(ev[0]), float(ev[-1])))
    c, l = fit.law.constant, fit.law.power
    if s <= l:
        raise ConvergenceError(
            f"zeta tail diverges: s={s} must exceed the fitted growth power l={l:.3f}"
        )
    e_max = float(ev[-1])

    def density(E):
        base = c * l * E ** (l - 1.0)
        if d == 1:
            return base * np.log(E) + c * E ** (l - 1.0)
        return base

    tail_val, _ = quad(lambda E: density(E) * E ** -s, e_max, np.inf, limit=200)
    err = abs(tail_val) * min(1.0, 3.0 * fit.residual)
    return ZetaValue(s, partial, float(tail_val), float(err))
