"""Command-line harness: every experiment is a subcommand driven by a flat
key=value configuration (file and/or ``--set`` overrides) and writes CSV,
JSON, and rendered figures into one output directory.

Exit codes: 0 success, 2 bad configuration, 3 convergence or sampling budget
exhausted, 4 acceptance failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from .acceptance import ArtifactCache, run_criteria
from .asymptotics import fit_asymptotic, spectral_zeta
from .config import Config, ConfigError
from .constants import ExponentVector, PrefactorPair, dim_exponent, theorem_constant
from .errors import (
    ConvergenceError,
    GridError,
    ReliabilityError,
    SamplingError,
    TraceTruncationError,
)
from .feynman_kac import ConfinementPolicy, MCParams, fk_confined_lower, fk_trace, log_volume_lhs, log_volume_rhs
from .operators import (
    GridSpec,
    build_dirichlet_nd,
    build_operator_1d,
    build_operator_nd,
    eigenvalues,
    homotopy_to_dirichlet,
)
from .reporting import Reporter
from .traces import (
    ChainArtifacts,
    DivergenceCertificate,
    OneDHeatTrace,
    SliceFunction,
    check_chain,
    heat_trace_modeled,
    separable_upper_bound,
    z_classical_1d,
    z_classical_product_divergence,
    z_sliced_bread,
    z_sliced_gt,
)

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_ACCEPTANCE_FAILED = 4

LOGVOL_INTEGRANDS = {
    "exp": lambda p: np.exp(-p),
    "gauss": lambda p: np.exp(-(p**2)),
    "cubic": lambda p: (1.0 + p) ** -3.0,
}


def _alpha(cfg: Config, key: str = "alpha", default=(2.0, 1.0)) -> ExponentVector:
    return ExponentVector(cfg.get_floats(key, tuple(default)))


def _grid(cfg: Config, alpha: ExponentVector | None, default_L=10.0, default_h=0.1) -> GridSpec:
    n = alpha.n if alpha is not None else 1
    widths = cfg.get_floats("half_widths", (default_L,) * n)
    if len(widths) == 1 and n > 1:
        widths = widths * n
    if len(widths) != n:
        raise ConfigError(f"half_widths has {len(widths)} entries for dimension {n}")
    return GridSpec.from_spacing(widths, cfg.get_float("spacing", default_h))


def _t_grid(cfg: Config) -> np.ndarray:
    lo = cfg.get_float("t_min", 0.2)
    hi = cfg.get_float("t_max", 2.0)
    count = cfg.get_int("t_count", 12)
    if not (0 < lo < hi) or count < 2:
        raise ConfigError("need 0 < t_min < t_max and t_count >= 2")
    return np.geomspace(lo, hi, count)


def _spectrum_from_cfg(cfg: Config):
    """Build and solve the operator selected by the config (1D or product nD)."""
    gamma = cfg.get("gamma")
    k = cfg.get_int("k", 40)
    if gamma is not None:
        g = cfg.get_float("coupling", 1.0)
        grid = _grid(cfg, None, default_L=14.0, default_h=0.02)
        op = build_operator_1d(float(gamma), g, grid)
        return eigenvalues(op, k), None
    alpha = _alpha(cfg)
    grid = _grid(cfg, alpha)
    op = build_operator_nd(alpha, grid, power=cfg.get_float("potential_power", 1.0))
    return eigenvalues(op, k), alpha


def _write_spectrum(rep: Reporter, spec, extra: dict) -> None:
    rep.write_csv(
        "spectrum.csv",
        ["index", "eigenvalue", "convergence_estimate"],
        [(i, float(ev), float(c)) for i, (ev, c) in
         enumerate(zip(spec.eigenvalues, spec.convergence))],
    )
    rep.write_json("summary.json", {"spectrum": spec.summary(), **extra})

    def plot(ax):
        ev = spec.eigenvalues
        ax.loglog(ev, np.arange(1, ev.size + 1), drawstyle="steps-post")
        if math.isfinite(spec.reliability_cutoff):
            ax.axvline(spec.reliability_cutoff, ls="--", color="gray",
                       label="reliability cutoff")
            ax.legend()
        ax.set_xlabel("E")
        ax.set_ylabel("N(E)")
        ax.set_title("eigenvalue counting function")

    rep.figure("counting.png", plot)


# --- subcommands ------------------------------------------------------------


def cmd_constants(cfg: Config, rep: Reporter) -> int:
    theorem = cfg.get("theorem", "T1")
    alpha = _alpha(cfg)
    zeta = cfg.get("zeta")
    law = theorem_constant(theorem, alpha, float(zeta) if zeta is not None else None)
    if isinstance(law, PrefactorPair):
        payload = {"theorem": theorem, "alpha": list(alpha.alphas),
                   "sliced": vars(law.sliced), "full": vars(law.full)}
    else:
        payload = {"theorem": theorem, "alpha": list(alpha.alphas), "law": vars(law)}
    rep.write_json("constants.json", payload)
    print(json.dumps(payload, default=str, indent=2))
    return EXIT_OK


def cmd_eig(cfg: Config, rep: Reporter) -> int:
    spec, alpha = _spectrum_from_cfg(cfg)
    extra = {"alpha": list(alpha.alphas)} if alpha else {"gamma": cfg.get("gamma")}
    _write_spectrum(rep, spec, extra)
    print(json.dumps(spec.summary(), default=str))
    return EXIT_OK


def cmd_dirichlet(cfg: Config, rep: Reporter) -> int:
    alpha = _alpha(cfg, default=(1.0, 1.0))
    grid = _grid(cfg, alpha, default_L=9.0, default_h=0.05)
    op = build_dirichlet_nd(alpha, grid)
    spec = eigenvalues(op, cfg.get_int("k", 60))
    _write_spectrum(rep, spec, {"alpha": list(alpha.alphas), "domain": "dirichlet"})
    print(json.dumps(spec.summary(), default=str))
    return EXIT_OK


def _chain_artifacts(cfg: Config, alpha: ExponentVector):
    if alpha.n != 2:
        raise ConfigError("the trace chain is implemented for two dimensions")
    d_n = dim_exponent(alpha)
    grid = _grid(cfg, alpha)
    spec = eigenvalues(build_operator_nd(alpha, grid), cfg.get_int("k", 120))
    win_lo = cfg.get_float("fit_lo", max(1.5, 0.4 * spec.reliability_cutoff))
    d_cands = (1,) if alpha.is_equal else (0,)
    law = fit_asymptotic(spec, d_candidates=d_cands,
                         window=(win_lo, spec.reliability_cutoff)).law
    base_grid = GridSpec.from_spacing((cfg.get_float("base_half_width", 14.0),), 0.01)
    base = eigenvalues(build_operator_1d(alpha.alphas[0], 1.0, base_grid),
                       cfg.get_int("base_k", 40))
    slice_trace = OneDHeatTrace(1.0 / d_n)
    # the slice function freezes x_n; its base carries the transverse exponent
    slice_fn = SliceFunction(OneDHeatTrace(alpha.alphas[0]), d_n)
    ratio = alpha.alphas[-1] / alpha.alphas[-2]
    return ChainArtifacts(
        zq=lambda t: heat_trace_modeled(spec, t, law),
        zsb=lambda t: z_sliced_bread(alpha, t, base, slice_trace),
        zsgt=(lambda t: z_sliced_gt(alpha, t, slice_fn)) if abs(ratio - 1.0) > 1e-12
        else z_sliced_gt(alpha, 1.0, slice_fn),
        zcl=z_classical_product_divergence(alpha),
    )


def cmd_trace(cfg: Config, rep: Reporter) -> int:
    source = cfg.get("source", "spectrum-sum")
    t_grid = _t_grid(cfg)
    if source == "chain":
        alpha = _alpha(cfg)
        report = check_chain(alpha, [float(t) for t in t_grid], _chain_artifacts(cfg, alpha))
        rep.write_json("chain.json", {"records": report.records,
                                      "violations": report.violations,
                                      "passed": report.passed})
        print(json.dumps({"passed": report.passed, "violations": report.violations},
                         default=str))
        return EXIT_OK if report.passed else EXIT_ACCEPTANCE_FAILED

    rows = []
    if source == "spectrum-sum":
        spec, alpha = _spectrum_from_cfg(cfg)
        d_cands = (1,) if (alpha is not None and alpha.is_equal) else (0,)
        lo = cfg.get_float("fit_lo", max(1.5, 0.4 * spec.reliability_cutoff))
        law = fit_asymptotic(spec, d_candidates=d_cands,
                             window=(lo, spec.reliability_cutoff)).law
        for t in t_grid:
            v, e = heat_trace_modeled(spec, float(t), law)
            rows.append((float(t), v, e))
    elif source == "classical-1d":
        gamma = cfg.get_float("gamma", 2.0)
        rows = [(float(t), z_classical_1d(gamma, float(t)), 0.0) for t in t_grid]
    elif source == "separable-product":
        alpha = _alpha(cfg)
        traces: dict = {}
        rows = [(float(t), separable_upper_bound(alpha, float(t), traces), 0.0)
                for t in t_grid]
    elif source in ("sliced-bread", "sliced-gt"):
        alpha = _alpha(cfg)
        if alpha.n != 2:
            raise ConfigError(f"{source} is implemented for two dimensions")
        d_n = dim_exponent(alpha)
        if source == "sliced-bread":
            slice_trace = OneDHeatTrace(1.0 / d_n)
            base_grid = GridSpec.from_spacing((cfg.get_float("base_half_width", 14.0),), 0.01)
            base = eigenvalues(build_operator_1d(alpha.alphas[0], 1.0, base_grid),
                               cfg.get_int("base_k", 40))
            for t in t_grid:
                v, e = z_sliced_bread(alpha, float(t), base, slice_trace)
                rows.append((float(t), v, e))
        else:
            slice_fn = SliceFunction(OneDHeatTrace(alpha.alphas[0]), d_n)
            for t in t_grid:
                out = z_sliced_gt(alpha, float(t), slice_fn)
                if isinstance(out, DivergenceCertificate):
                    rep.write_json("divergence.json", vars(out))
                    print(json.dumps(vars(out), default=str))
                    return EXIT_OK
                rows.append((float(t), out[0], out[1]))
    else:
        raise ConfigError(f"unknown trace source {source!r}")

    rep.write_csv("trace.csv", ["t", "value", "error"], rows)
    rep.write_json("trace.json", {"source": source, "samples": len(rows)})

    def plot(ax):
        arr = np.array(rows)
        ax.loglog(arr[:, 0], arr[:, 1], "o-")
        ax.set_xlabel("t")
        ax.set_ylabel("Tr exp(-tH)")
        ax.set_title(f"heat trace ({source})")

    rep.figure("trace.png", plot)
    print(json.dumps({"source": source, "first": rows[0], "last": rows[-1]}))
    return EXIT_OK


def cmd_fk(cfg: Config, rep: Reporter) -> int:
    t = cfg.get_float("t", 1.0)
    params = MCParams(
        paths=cfg.get_int("paths", 100_000),
        steps=cfg.get_int("steps", 64),
        seed=cfg.get_int("seed", 0),
    )
    gamma = cfg.get("gamma")
    if gamma is not None:
        potential = (float(gamma), cfg.get_float("coupling", 1.0))
    else:
        potential = _alpha(cfg)
    confine = cfg.get("confine", "none")
    if confine == "none":
        est = fk_trace(potential, t, params)
    else:
        if not isinstance(potential, ExponentVector):
            raise ConfigError("confined estimates need a product potential (alpha=...)")
        policy = ConfinementPolicy(
            mode=confine,
            band=cfg.get_float("band", 1.0),
            kappa_c=cfg.get_float("kappa_c", float(potential.n)),
        )
        est = fk_confined_lower(potential, t, policy, params)
    payload = json.loads(est.to_json())
    rep.write_json("fk.json", payload)
    print(json.dumps(payload))
    return EXIT_OK


def cmd_lemma_logvol(cfg: Config, rep: Reporter) -> int:
    name = cfg.get("integrand", "exp")
    if name not in LOGVOL_INTEGRANDS:
        raise ConfigError(f"integrand must be one of {sorted(LOGVOL_INTEGRANDS)}")
    f = LOGVOL_INTEGRANDS[name]
    n = cfg.get_int("n", 2)
    a = cfg.get_float("a", 0.7)
    method = cfg.get("method", "quadrature" if n <= 2 else "MC")
    rhs = log_volume_rhs(f, a, n)
    lhs, err = log_volume_lhs(f, a, n, method=method,
                              seed=cfg.get_int("seed", 0),
                              samples=cfg.get_int("samples", 400_000))
    payload = {"integrand": name, "n": n, "a": a, "method": method,
               "lhs": lhs, "rhs": rhs, "lhs_err": err,
               "rel_diff": abs(lhs - rhs) / abs(rhs)}
    rep.write_json("logvol.json", payload)
    print(json.dumps(payload))
    return EXIT_OK


def cmd_zeta(cfg: Config, rep: Reporter) -> int:
    spec, _ = _spectrum_from_cfg(cfg)
    val = spectral_zeta(spec, cfg.get_float("s", 2.0), tail=cfg.get("tail", "weyl-power"))
    payload = json.loads(val.to_json())
    rep.write_json("zeta.json", payload)
    print(json.dumps(payload))
    return EXIT_OK


def _read_spectrum_csv(path: str) -> np.ndarray:
    ev = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0] == "index":
                continue
            ev.append(float(row[1]))
    if not ev:
        raise ConfigError(f"no eigenvalues found in {path}")
    return np.array(ev)


def cmd_fit(cfg: Config, rep: Reporter) -> int:
    source = cfg.get("input")
    if source is not None:
        ev = _read_spectrum_csv(source)
        data = (ev, np.arange(1, ev.size + 1, dtype=float))
        cutoff = float(ev[-1])
    else:
        spec, _ = _spectrum_from_cfg(cfg)
        data = spec
        cutoff = spec.reliability_cutoff
    window = (cfg.get_float("fit_lo", 1.5), cfg.get_float("fit_hi", cutoff))
    d_cands = tuple(int(v) for v in cfg.get_floats("d_candidates", (0.0, 1.0)))
    result = fit_asymptotic(data, d_candidates=d_cands, window=window)
    payload = json.loads(result.to_json())
    rep.write_json("fit.json", payload)

    E = data[0] if isinstance(data, tuple) else data.eigenvalues
    N = data[1] if isinstance(data, tuple) else np.arange(1, E.size + 1, dtype=float)

    def plot(ax):
        ax.loglog(E, N, ".", ms=3, label="data")
        law = result.law
        Ef = np.geomspace(max(window[0], float(E[0])), window[1], 200)
        ax.loglog(Ef, law.constant * Ef**law.power * np.log(Ef) ** law.log_power,
                  label=f"fit l={law.power:.3f}, d={law.log_power}")
        ax.set_xlabel("E")
        ax.set_ylabel("N(E)")
        ax.legend()
        ax.set_title("counting-law fit")

    rep.figure("fit.png", plot)
    print(result.to_json())
    return EXIT_OK


def cmd_homotopy(cfg: Config, rep: Reporter) -> int:
    alpha = _alpha(cfg, default=(1.0, 1.0))
    grid = _grid(cfg, alpha, default_L=6.0, default_h=0.05)
    js = list(cfg.get_floats("j_list", (1, 2, 4, 8, 16, 32, 64)))
    k = cfg.get_int("k", 3)
    seq = homotopy_to_dirichlet(alpha, js, grid, k)
    dspec = eigenvalues(build_dirichlet_nd(alpha, grid), k)
    rows = [(j, *[float(v) for v in s.eigenvalues]) for j, s in zip(js, seq)]
    rep.write_csv("homotopy.csv", ["j"] + [f"lambda_{i}" for i in range(k)], rows)
    evs = np.array([s.eigenvalues for s in seq])
    gaps = np.max(np.abs(evs - dspec.eigenvalues) / dspec.eigenvalues, axis=1)
    payload = {
        "alpha": list(alpha.alphas),
        "j_list": js,
        "dirichlet": dspec.eigenvalues.tolist(),
        "monotone_in_j": bool(np.all(np.diff(evs, axis=0) > -1e-10)),
        "relative_gap_by_j": {str(j): float(g) for j, g in zip(js, gaps)},
    }
    rep.write_json("homotopy.json", payload)

    def plot(ax):
        for i in range(k):
            ax.semilogx(js, evs[:, i], "o-", label=f"level {i}")
            ax.axhline(dspec.eigenvalues[i], ls="--", color="gray", lw=0.8)
        ax.set_xlabel("potential power j")
        ax.set_ylabel("eigenvalue")
        ax.legend()
        ax.set_title("steep-potential homotopy to the Dirichlet spectrum")

    rep.figure("homotopy.png", plot)
    print(json.dumps(payload))
    return EXIT_OK


def cmd_verify(cfg: Config, rep: Reporter) -> int:
    wanted = cfg.get("criteria")
    ids = [int(v) for v in wanted.split(",")] if wanted else None
    results = run_criteria(ids, ArtifactCache())
    all_pass = all(r.passed for r in results)
    rep.write_json("verify_report.json", {
        "passed": all_pass,
        "criteria": [r.to_dict() for r in results],
    })
    for r in results:
        print(f"criterion {r.cid:2d} {r.name:28s} "
              f"{'PASS' if r.passed else 'FAIL'}  ({r.seconds:.1f}s)")
    print("overall:", "PASS" if all_pass else "FAIL")
    return EXIT_OK if all_pass else EXIT_ACCEPTANCE_FAILED


COMMANDS = {
    "constants": cmd_constants,
    "eig": cmd_eig,
    "dirichlet": cmd_dirichlet,
    "trace": cmd_trace,
    "fk": cmd_fk,
    "lemma-logvol": cmd_lemma_logvol,
    "zeta": cmd_zeta,
    "fit": cmd_fit,
    "homotopy": cmd_homotopy,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracelab",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or "").strip() or name)
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a configuration key")
        p.add_argument("--out", default="tracelab-out", help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = Config.load(args.config, args.overrides)
        rep = Reporter(args.out, cfg.hash(), cfg.to_dict())
        return COMMANDS[args.command](cfg, rep)
    except (ConfigError, GridError, ValueError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except (ConvergenceError, TraceTruncationError, SamplingError, ReliabilityError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
