"""Acceptance criteria: oracle checks, property suites, and asymptotic fits.

Each criterion is a function of a shared :class:`ArtifactCache` (expensive
spectra are computed once and reused) returning a :class:`CriterionResult`
with pass/fail plus the measured numbers.  The ``verify`` CLI subcommand and
the acceptance test suite both run this registry.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .asymptotics import fit_asymptotic, karamata_convert, laplace_stieltjes, spectral_zeta
from .constants import (
    AsymptoticLaw,
    ExponentVector,
    Regime,
    dim_exponent,
    gamma_fn,
    scale_potential_spectrum,
    theorem_constant,
)
from .feynman_kac import MCParams, fk_trace, log_volume_lhs, log_volume_rhs
from .operators import (
    GridSpec,
    build_dirichlet_nd,
    build_operator_1d,
    build_operator_nd,
    converge_spectrum,
    eigenvalues,
    homotopy_to_dirichlet,
)
from .traces import (
    ChainArtifacts,
    DivergenceCertificate,
    OneDHeatTrace,
    SliceFunction,
    check_chain,
    heat_trace,
    heat_trace_modeled,
    z_classical_product_divergence,
    z_sliced_bread,
    z_sliced_gt,
)

__all__ = ["CriterionResult", "ArtifactCache", "CRITERIA", "run_criteria"]

AIRY_ORACLE = (1.018793, 2.338107, 3.248198, 4.087949, 4.820099, 5.520560)


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "id": self.cid,
            "name": self.name,
            "passed": self.passed,
            "seconds": round(self.seconds, 2),
            "details": self.details,
        }


class ArtifactCache:
    """Expensive shared artifacts, computed lazily and kept for the session."""

    @cached_property
    def harmonic_1d(self):
        grid = GridSpec.from_spacing((12.0,), 0.02)
        return converge_spectrum(
            lambda g: build_operator_1d(2.0, 1.0, g), grid, k=40, rel_tol=2e-5,
            max_refinements=5, richardson=True,
        )

    @cached_property
    def airy_1d(self):
        # the 40th level sits near 16.6, so the box must confine well past that
        grid = GridSpec.from_spacing((24.0,), 0.02)
        return converge_spectrum(
            lambda g: build_operator_1d(1.0, 1.0, g), grid, k=40, rel_tol=2e-5,
            max_refinements=5, richardson=True,
        )

    @cached_property
    def airy_exact(self):
        """Eigenvalues of -d2/dx2 + |x| from the zeros of Ai and Ai'."""
        from scipy.special import ai_zeros

        a, ap, _, _ = ai_zeros(400)
        return np.sort(np.concatenate([-ap, -a]))

    @cached_property
    def alpha21(self):
        return ExponentVector((2.0, 1.0))

    @cached_property
    def alpha11(self):
        return ExponentVector((1.0, 1.0))

    @cached_property
    def spectrum21(self):
        """Product potential |x|^2|y| on the long-channel production grid."""
        grid = GridSpec.from_spacing((8.0, 256.0), 0.12)
        op = build_operator_nd(self.alpha21, grid)
        return eigenvalues(op, 120)

    @cached_property
    def spectrum21_fine(self):
        """Half-spacing companion of :attr:`spectrum21` for error control."""
        grid = GridSpec.from_spacing((8.0, 256.0), 0.06)
        op = build_operator_nd(self.alpha21, grid)
        return eigenvalues(op, 120)

    @cached_property
    def spectrum11(self):
        """Product potential |xy|; wide box because both channels are shallow."""
        grid = GridSpec.from_spacing((216.0, 216.0), 0.1)
        op = build_operator_nd(self.alpha11, grid)
        return eigenvalues(op, 150)

    @cached_property
    def dirichlet11(self):
        """Dirichlet Laplacian on |xy| < 1."""
        grid = GridSpec.from_spacing((9.0, 9.0), 0.04)
        op = build_dirichlet_nd(self.alpha11, grid)
        return eigenvalues(op, 160)

    @cached_property
    def slice_trace_half(self):
        # slice exponent 1/d_n for alpha=(2,1): d_n = 2
        return OneDHeatTrace(0.5)

    @cached_property
    def slice_trace_twothirds(self):
        # slice exponent 1/d_n for alpha=(1,1): d_n = 3/2
        return OneDHeatTrace(2.0 / 3.0)

    @cached_property
    def linear_trace(self):
        return OneDHeatTrace(1.0)

    @cached_property
    def harmonic_trace(self):
        return OneDHeatTrace(2.0)

    @cached_property
    def law21(self) -> AsymptoticLaw:
        fit = fit_asymptotic(self.spectrum21, d_candidates=(0,), window=(3.0, 8.0))
        return fit.law

    @cached_property
    def law11(self) -> AsymptoticLaw:
        fit = fit_asymptotic(self.spectrum11, d_candidates=(1,), window=(4.0, 12.0))
        return fit.law


# --- criteria ---------------------------------------------------------------


def criterion_1(ctx: ArtifactCache) -> CriterionResult:
    """Harmonic oscillator: eigenvalues 2k+1 and heat trace 1/(2 sinh t)."""
    spec = ctx.harmonic_1d
    exact = 2.0 * np.arange(10) + 1.0
    ev_err = float(np.max(np.abs(spec.eigenvalues[:10] - exact) / exact))
    trace_errs = {}
    for t in (0.5, 1.0, 2.0):
        z, _ = heat_trace(spec, t)
        oracle = 0.5 / math.sinh(t)
        trace_errs[t] = abs(z - oracle) / oracle
    passed = ev_err < 1e-4 and all(e < 1e-4 for e in trace_errs.values())
    return CriterionResult(1, "harmonic-benchmark", passed,
                           {"eigenvalue_rel_err": ev_err,
                            "heat_trace_rel_err": {str(k): v for k, v in trace_errs.items()}})


def criterion_2(ctx: ArtifactCache) -> CriterionResult:
    """Linear potential: lowest six eigenvalues against the Airy-zero oracle."""
    ev = ctx.airy_1d.eigenvalues[:6]
    errs = np.abs(ev - np.array(AIRY_ORACLE))
    return CriterionResult(2, "airy-benchmark", bool(np.max(errs) < 1e-3),
                           {"max_abs_err": float(np.max(errs)), "eigenvalues": ev.tolist()})


def criterion_3(ctx: ArtifactCache) -> CriterionResult:
    """Coupling scaling: c**(2/(p+2)) for the potential, c**(p/(p+2)) for -c*Lap."""
    worst = 0.0
    table = {}
    for gamma in (1.0, 2.0, 3.0):
        L = max(12.0, 8.0 * 8.0 ** (1.0 / gamma))
        grid = GridSpec.from_spacing((L,), 0.04)

        def solve(g):
            return converge_spectrum(
                lambda gr: build_operator_1d(gamma, g, gr), grid, k=10,
                rel_tol=2e-5, max_refinements=5, richardson=True,
            )

        unit = solve(1.0)
        for c in (2.0, 4.0, 8.0):
            direct = solve(c).eigenvalues
            predicted = scale_potential_spectrum(unit, c, gamma).eigenvalues
            pot_err = float(np.max(np.abs(direct - predicted) / direct))
            # -c*Lap + |x|**gamma = c*(-Lap + (1/c)|x|**gamma)
            lap_direct = c * solve(1.0 / c).eigenvalues
            lap_predicted = c ** (gamma / (gamma + 2.0)) * unit.eigenvalues
            lap_err = float(np.max(np.abs(lap_direct - lap_predicted) / lap_direct))
            table[f"gamma={gamma:g},c={c:g}"] = {"potential": pot_err, "laplacian": lap_err}
            worst = max(worst, pot_err, lap_err)
    return CriterionResult(3, "coupling-scaling", worst < 1e-4,
                           {"max_rel_err": worst, "per_case": table})


def _chain_for(ctx: ArtifactCache, alpha, spectrum, law, base, slice_trace,
               transverse_trace):
    # the slice function freezes x_n, so its base trace carries the transverse
    # exponent alpha_1; the per-eigenvalue trace in Z_SB carries exponent 1/d_n
    d_n = dim_exponent(alpha)
    slice_fn = SliceFunction(transverse_trace, d_n)
    return ChainArtifacts(
        zq=lambda t: heat_trace_modeled(spectrum, t, law),
        zsb=lambda t: z_sliced_bread(alpha, t, base, slice_trace),
        zsgt=(lambda t: z_sliced_gt(alpha, t, slice_fn))
        if abs(alpha.alphas[-1] / alpha.alphas[-2] - 1.0) > 1e-12
        else z_sliced_gt(alpha, 1.0, slice_fn),
        zcl=z_classical_product_divergence(alpha),
    )


def criterion_4(ctx: ArtifactCache) -> CriterionResult:
    """Trace chain Z_Q <= Z_SB <= Z_SGT (<= Z_cl, divergent) at several t."""
    t_list = (0.2, 0.5, 1.0)
    art21 = _chain_for(ctx, ctx.alpha21, ctx.spectrum21, ctx.law21,
                       ctx.harmonic_1d, ctx.slice_trace_half, ctx.harmonic_trace)
    rep21 = check_chain(ctx.alpha21, t_list, art21)
    art11 = _chain_for(ctx, ctx.alpha11, ctx.spectrum11, ctx.law11,
                       ctx.airy_1d, ctx.slice_trace_twothirds, ctx.linear_trace)
    rep11 = check_chain(ctx.alpha11, t_list, art11)
    sgt_divergent = all(r["Z_SGT"] == "divergent" for r in rep11.records)
    passed = rep21.passed and rep11.passed and sgt_divergent
    return CriterionResult(4, "trace-bound-chain", passed,
                           {"alpha21_records": rep21.records,
                            "alpha21_violations": rep21.violations,
                            "alpha11_records": rep11.records,
                            "alpha11_violations": rep11.violations,
                            "alpha11_sgt_divergent": sgt_divergent})


def criterion_5(ctx: ArtifactCache) -> CriterionResult:
    """Weighted log-volume identity: quadrature n=2 to 1e-6, MC n=3 to 3 sigma."""
    integrands = {
        "exp": lambda p: np.exp(-p),
        "gauss": lambda p: np.exp(-(p**2)),
        "cubic": lambda p: (1.0 + p) ** -3.0,
    }
    quad_errs = {}
    for name, f in integrands.items():
        rhs = log_volume_rhs(f, 0.7, 2)
        lhs, _ = log_volume_lhs(f, 0.7, 2, method="quadrature")
        quad_errs[name] = abs(lhs - rhs) / abs(rhs)
    rhs3 = log_volume_rhs(integrands["exp"], 0.8, 3)
    lhs3, sigma3 = log_volume_lhs(integrands["exp"], 0.8, 3, method="MC", seed=7)
    mc_dev = abs(lhs3 - rhs3) / sigma3
    passed = all(e < 1e-6 for e in quad_errs.values()) and mc_dev < 3.0
    return CriterionResult(5, "log-volume-lemma", passed,
                           {"quadrature_rel_err": quad_errs, "mc_sigma_dev": mc_dev})


def criterion_6(ctx: ArtifactCache) -> CriterionResult:
    """Path-integral traces agree with reference heat traces within 3 sigma.

    References: the closed form for the harmonic case, the Airy-zero spectrum
    for the linear case, and a Richardson-extrapolated eigenvalue sum with a
    modeled tail for the 2D product potential (the single-grid sum carries a
    ~1% discretization bias, larger than the Monte Carlo error).
    """

    def ref_2d(t):
        zc, ec = heat_trace_modeled(ctx.spectrum21, t, ctx.law21)
        zf, ef = heat_trace_modeled(ctx.spectrum21_fine, t, ctx.law21)
        return (4.0 * zf - zc) / 3.0, abs(zf - zc) / 3.0 + ef

    def ref_linear(t):
        ev = ctx.airy_exact
        return float(np.exp(-t * ev).sum()), 0.0

    rows = []
    ok = True
    for label, potential, reference in (
        ("harmonic-1d", (2.0, 1.0), lambda t: (0.5 / math.sinh(t), 0.0)),
        ("linear-1d", (1.0, 1.0), ref_linear),
        ("product-2d", ctx.alpha21, ref_2d),
    ):
        for i, t in enumerate((0.5, 1.0)):
            est = fk_trace(potential, t, MCParams(paths=100_000, steps=64, seed=11 + i))
            ref, ref_err = reference(t)
            budget = 3.0 * (est.stderr + ref_err) + est.truncation_bound
            dev = abs(est.mean - ref)
            ok &= dev <= budget
            rows.append({"case": label, "t": t, "fk": est.mean, "stderr": est.stderr,
                         "reference": ref, "deviation": dev, "budget": budget})
    return CriterionResult(6, "path-integral-consistency", bool(ok), {"cases": rows})


def criterion_7(ctx: ArtifactCache) -> CriterionResult:
    """Distinct exponents alpha=(2,1): counting power 2.5, pure power preferred."""
    fit = fit_asymptotic(ctx.spectrum21, d_candidates=(0, 1), window=(3.0, 8.0))
    power_ok = abs(fit.law.power - 2.5) <= 0.15
    pure_preferred = fit.law.log_power == 0
    return CriterionResult(7, "distinct-exponent-power", power_ok and pure_preferred,
                           {"fitted_power": fit.law.power,
                            "fitted_constant": fit.law.constant,
                            "model_comparison": fit.model_comparison})


def criterion_8(ctx: ArtifactCache) -> CriterionResult:
    """Equal exponents alpha=(1,1): E**2*ln(E) counting law with log correction.

    The heat power for n=2, alpha0=1 is n/2 + 1/alpha0 = 2, so the counting
    law is (1/pi)*E**2*ln(E).  Checks: the free d=1 fit power is near 2, at
    fixed power 2 the d=1 model beats d=0, and the ratio against the limit
    law stays bracketed and trends toward 1.
    """
    spec = ctx.spectrum11
    lo, hi = 4.0, 12.0
    fit = fit_asymptotic(spec, d_candidates=(0, 1), window=(lo, hi))
    free_power = fit.model_comparison[1]["power"]
    power_ok = abs(free_power - 2.0) <= 0.25

    # fixed-power comparison: intercept-only least squares at l = 2
    E = spec.eigenvalues
    mask = (E > lo) & (E <= hi)
    x, y = np.log(E[mask]), np.log(np.arange(1, E.size + 1)[mask].astype(float))
    residuals = {}
    for d in (0, 1):
        r = y - 2.0 * x - d * np.log(x)
        residuals[d] = float(np.std(r))
    d1_better = residuals[1] < residuals[0]

    limit_const = theorem_constant("T4", ctx.alpha11).constant  # 1/pi
    probes = (3.0, 6.0, 9.0, float(E[-1] * 0.999))
    ratios = [float(spec.counting([Ep])[0] / (limit_const * Ep**2 * math.log(Ep)))
              for Ep in probes]
    bracketed = all(0.3 <= r <= 3.0 for r in ratios)
    trending = all(b <= a for a, b in zip(ratios, ratios[1:]))
    passed = power_ok and d1_better and bracketed and trending
    return CriterionResult(8, "equal-exponent-log-law", passed,
                           {"free_d1_power": free_power,
                            "fixed_power_residuals": residuals,
                            "ratio_probes": dict(zip(map(str, probes), ratios)),
                            "ratio_trending_to_1": trending,
                            "model_comparison": fit.model_comparison})


def criterion_9(ctx: ArtifactCache) -> CriterionResult:
    """Prefactor adjudication for alpha=(2,1): which normalization fits Z_Q?

    The reduced operator (freeze the small-exponent coordinate at unit
    coupling) is -d2/dx2 + x**2; its zeta value at d_n = 2 anchors both
    candidate constants, differing by the factor sqrt(pi).
    """
    zeta = spectral_zeta(ctx.harmonic_1d, 2.0, tail="weyl-power")
    t_grid = np.geomspace(0.1, 0.4, 8)
    z_vals = np.array([heat_trace_modeled(ctx.spectrum21, float(t), ctx.law21)[0]
                       for t in t_grid])
    fitted_c = float(np.exp(np.mean(np.log(z_vals * t_grid**2.5))))
    cand_sliced = math.pi ** -0.5 * gamma_fn(3.0) * zeta.total
    cand_full = math.pi ** -1.0 * gamma_fn(3.0) * zeta.total
    dev_sliced = abs(fitted_c - cand_sliced) / cand_sliced
    dev_full = abs(fitted_c - cand_full) / cand_full
    exactly_one = (dev_sliced < 0.25) != (dev_full < 0.25)
    verdict = "sliced" if dev_sliced < dev_full else "full"
    return CriterionResult(9, "prefactor-adjudication", exactly_one,
                           {"zeta_at_2": zeta.total, "fitted_heat_constant": fitted_c,
                            "candidate_sliced": cand_sliced, "candidate_full": cand_full,
                            "dev_sliced": dev_sliced, "dev_full": dev_full,
                            "verdict": verdict})


def criterion_10(ctx: ArtifactCache) -> CriterionResult:
    """Steep-potential homotopy reaches the Dirichlet spectrum; domain law fits.

    Convergence of the j-th power potential to the hard wall is O(1/j), so
    the 5% agreement target needs j up to 1024; the j=64 gap is recorded.
    """
    alpha = ctx.alpha11
    grid = GridSpec.from_spacing((6.0, 6.0), 0.05)
    js = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024]
    seq = homotopy_to_dirichlet(alpha, js, grid, k=3)
    evs = np.array([s.eigenvalues for s in seq])
    monotone = bool(np.all(np.diff(evs, axis=0) > -1e-10))
    dop = build_dirichlet_nd(alpha, grid)
    dspec = eigenvalues(dop, 3)
    gaps = {j: float(np.max(np.abs(e - dspec.eigenvalues) / dspec.eigenvalues))
            for j, e in zip(js, evs)}
    final_ok = gaps[js[-1]] < 0.05

    fit = fit_asymptotic(ctx.dirichlet11, d_candidates=(0, 1), window=(8.0, 100.0))
    d1 = fit.model_comparison[1]
    power_ok = abs(d1["power"] - 1.0) <= 0.2
    d1_better = d1["residual"] < fit.model_comparison[0]["residual"]
    c7 = theorem_constant("T7", alpha).constant  # 1/pi
    probes = (10.0, 30.0, 60.0, 90.0)
    ratios = [float(ctx.dirichlet11.counting([Ep])[0] / (c7 * Ep * math.log(Ep)))
              for Ep in probes]
    bracketed = all(0.3 <= r <= 3.0 for r in ratios)
    trending = all(b >= a - 0.02 for a, b in zip(ratios, ratios[1:]))
    passed = monotone and final_ok and power_ok and d1_better and bracketed and trending
    return CriterionResult(10, "dirichlet-homotopy", passed,
                           {"monotone_in_j": monotone,
                            "dirichlet_low3": dspec.eigenvalues.tolist(),
                            "gap_by_j": {str(k): v for k, v in gaps.items()},
                            "final_j": js[-1], "final_gap": gaps[js[-1]],
                            "counting_model_comparison": fit.model_comparison,
                            "ratio_probes": dict(zip(map(str, probes), ratios)),
                            "ratio_trending_to_1": trending})


def criterion_11(ctx: ArtifactCache) -> CriterionResult:
    """Transform round trip: N = E**2 gives 2*t**-2; the conversion is involutive."""
    E = np.arange(0.0, 25000.0, 0.05)
    N = E**2
    errs = {}
    for t in np.geomspace(1e-3, 1e-1, 7):
        val = laplace_stieltjes((E, N), float(t))
        oracle = 2.0 * t**-2.0
        errs[f"{t:.4g}"] = abs(val - oracle) / oracle
    law = AsymptoticLaw(2.0, 1, 0.75, Regime.COUNTING)
    back = karamata_convert(karamata_convert(law))
    involutive = (back.power == law.power and back.log_power == law.log_power
                  and abs(back.constant - law.constant) < 1e-14 and back.regime is law.regime)
    passed = all(e < 0.01 for e in errs.values()) and involutive
    return CriterionResult(11, "tauberian-numerics", passed,
                           {"transform_rel_err": errs, "involution_exact": involutive})


def criterion_12(ctx: ArtifactCache) -> CriterionResult:
    """Closed-form constants: 1/pi twice, and 8/(9 pi) for the ratio-2 domain."""
    c_t7 = theorem_constant("T7", ctx.alpha11).constant
    c_t4 = theorem_constant("T4", ctx.alpha11).constant
    c_simon = theorem_constant("Simon2D-power", ctx.alpha21).constant
    devs = {
        "T7_vs_1/pi": abs(c_t7 - 1.0 / math.pi),
        "T4_vs_1/pi": abs(c_t4 - 1.0 / math.pi),
        "Simon2D_vs_8/(9pi)": abs(c_simon - 8.0 / (9.0 * math.pi)),
    }
    passed = all(v < 1e-12 for v in devs.values())
    return CriterionResult(12, "constant-cross-checks", passed, {"abs_devs": devs})


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
    9: criterion_9, 10: criterion_10, 11: criterion_11, 12: criterion_12,
}


def run_criteria(ids=None, ctx: ArtifactCache | None = None) -> list[CriterionResult]:
    """Run the selected criteria (all by default) against a shared cache."""
    ctx = ctx or ArtifactCache()
    out = []
    for cid in sorted(ids or CRITERIA):
        fn = CRITERIA[int(cid)]
        start = time.time()
        res = fn(ctx)
        res.seconds = time.time() - start
        out.append(res)
    return out
