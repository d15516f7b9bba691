"""Path-integral heat-trace estimates and the product-measure volume identity.

Diffusion convention (fixed once, here): the trace identity used is

    Z_Q(t) = (4 pi t)**(-n/2) * Integral_x E_{x,x;2t}[ exp(-1/2 Int_0^{2t} V(b(s)) ds) ] dx,

where b is a *standard* Brownian bridge pinned at x over the horizon 2t
(variance s(2t-s)/(2t), midpoint variance t/2).  This combination of
prefactor, horizon and 1/2-weight reproduces 1/(2 sinh t) exactly in
expectation on the 1D harmonic oscillator, which pins all three choices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import dblquad, quad

from .constants import ExponentVector
from .errors import SamplingError
from .operators import ground_energy_1d

__all__ = [
    "MCParams",
    "PathEnsemble",
    "FKEstimate",
    "ConfinementPolicy",
    "sample_bridges",
    "fk_trace",
    "fk_confined_lower",
    "exit_probability",
    "log_volume_rhs",
    "log_volume_lhs",
]

CONVENTION = "prefactor (4*pi*t)**(-n/2); standard bridge on [0, 2t]; weight exp(-0.5*int V)"


@dataclass(frozen=True)
class MCParams:
    """Monte Carlo controls for the path-integral estimators."""

    paths: int = 100_000
    steps: int = 64
    seed: int = 0
    decay_threshold: float = 12.0  # box reaches where t*channel_energy exceeds this
    base_spacing: float = 0.35
    mass_tol: float = 1e-4  # dropped fraction of the frozen-weight cell mass

    def __post_init__(self):
        if self.steps < 16:
            raise ValueError("steps must be at least 16")
        if self.paths < 1:
            raise ValueError("paths must be positive")


@dataclass(frozen=True)
class PathEnsemble:
    """Brownian bridges pinned at ``anchor`` over the horizon ``2t``.

    ``samples`` has shape (paths, steps+1, dim) and holds absolute positions
    including both pinned endpoints.
    """

    anchor: np.ndarray
    horizon: float
    steps: int
    paths: int
    seed: int
    samples: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.steps + 1)


@dataclass(frozen=True)
class FKEstimate:
    """Path-integral estimate with its statistical and systematic diagnostics."""

    mean: float
    stderr: float
    paths_kept: float
    t: float
    paths: int
    steps: int
    seed: int
    truncation_bound: float = 0.0
    convention: str = CONVENTION

    def to_json(self) -> str:
        return json.dumps(
            {
                "mean": self.mean,
                "stderr": self.stderr,
                "paths_kept": self.paths_kept,
                "t": self.t,
                "paths": self.paths,
                "steps": self.steps,
                "seed": self.seed,
                "truncation_bound": self.truncation_bound,
                "convention": self.convention,
            }
        )


@dataclass(frozen=True)
class ConfinementPolicy:
    """Which Brownian paths to keep, and the matching potential bound.

    ``xn-band`` keeps paths whose last coordinate stays within ``band`` of its
    anchor and bounds that coordinate's potential factor by (|x_n|+band)**a_n.
    ``all-band`` keeps paths confined within sqrt(t)*|ln t| in every
    coordinate, drops the region where some |x_i| < sqrt(t)*(ln t)**2, and
    multiplies the frozen potential by kappa(t) = exp(c/|ln t|).
    """

    mode: str = "xn-band"
    band: float = 1.0
    kappa_c: float | None = None  # defaults to the dimension

    def __post_init__(self):
        if self.mode not in ("xn-band", "all-band"):
            raise ValueError("mode must be 'xn-band' or 'all-band'")

    def kappa(self, t: float, n: int) -> float:
        c = self.kappa_c if self.kappa_c is not None else float(n)
        if not 0 < t < 0.9:
            raise ValueError("kappa(t) correction requires t well below 1")
        return math.exp(c / abs(math.log(t)))


def _bridge_increments(paths: int, steps: int, dim: int, horizon: float, seed: int) -> np.ndarray:
    """Standard Brownian bridges from 0 to 0, shape (paths, steps+1, dim)."""
    rng = np.random.Generator(np.random.Philox(seed))
    ds = horizon / steps
    incr = rng.normal(0.0, math.sqrt(ds), size=(paths, steps, dim))
    w = np.concatenate([np.zeros((paths, 1, dim)), np.cumsum(incr, axis=1)], axis=1)
    frac = (np.arange(steps + 1) / steps)[None, :, None]
    return w - frac * w[:, -1:, :]


def sample_bridges(x, t: float, steps: int, count: int, seed: int) -> PathEnsemble:
    """Deterministic ensemble of bridges pinned at ``x`` over [0, 2t]."""
    if t <= 0:
        raise ValueError("t must be positive")
    anchor = np.atleast_1d(np.asarray(x, dtype=float))
    params = MCParams(paths=count, steps=steps, seed=seed)  # reuse validation
    bridges = _bridge_increments(params.paths, params.steps, anchor.size, 2.0 * t, seed)
    return PathEnsemble(
        anchor=anchor,
        horizon=2.0 * t,
        steps=steps,
        paths=count,
        seed=seed,
        samples=anchor[None, None, :] + bridges,
    )


def _channel_half_width(alpha_list, i: int, t: float, threshold: float) -> float:
    """|x_i| beyond which t * (transverse ground energy) exceeds the threshold."""
    others = [a for j, a in enumerate(alpha_list) if j != i]
    if not others:
        # 1D: the frozen weight e^{-t g |x|**gamma} itself decays
        gamma, g = alpha_list[0]
        return (threshold / (t * g)) ** (1.0 / gamma)
    p = min(others)
    # coupling of the transverse well at |x_i| = L is L**alpha_i
    # ground energy ~ lambda_0(p) * (L**alpha_i)**(2/(2+p))
    lam0 = ground_energy_1d(p)
    a_i = alpha_list[i]
    return (threshold / (t * lam0)) ** ((2.0 + p) / (2.0 * a_i))


def _axis_centers(half_width: float, spacing: float) -> np.ndarray:
    """Uniform midpoint-cell centers covering [-L, L].

    Uniform spacing matters: the composite midpoint rule on a smooth decaying
    integrand is then superconvergent, while graded cells leave a first-order
    bias (measured on the harmonic oracle).
    """
    m = max(2, int(math.ceil(half_width / spacing)))
    return (np.arange(-m, m) + 0.5) * spacing


def _cell_table(spec: list, n: int, t: float, params: MCParams):
    """Active midpoint cells: (centers (N, n), cell volume, rough masses, dropped mass).

    The rough mass vol*exp(-t*(V + sum of transverse channel energies)) drives
    both the pruning (keep cells covering 1 - mass_tol of the mass) and the
    per-cell path allocation; it tracks the true slice decay rate in the
    channels, where the frozen potential alone vanishes.
    """
    half = [_channel_half_width(spec, i, t, params.decay_threshold) for i in range(n)]
    spacings = [params.base_spacing] * n
    # keep the raw product grid bounded; coarsen the longest axis first (each
    # axis stays uniform, which is what the midpoint accuracy depends on)
    while np.prod([2 * math.ceil(L / h) for L, h in zip(half, spacings)]) > 4e6:
        i = int(np.argmax([L / h for L, h in zip(half, spacings)]))
        spacings[i] *= 2.0
    axes = [_axis_centers(L, h) for L, h in zip(half, spacings)]
    vol = float(np.prod(spacings))
    grids = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([g.ravel() for g in grids], axis=1)
    energy = _potential_on_paths([centers[:, i] for i in range(n)], spec)
    for i in range(n):
        others = [a for j, a in enumerate(spec) if j != i]
        if others:
            p = min(others)
            energy = energy + ground_energy_1d(p) * np.abs(centers[:, i]) ** (
                spec[i] * 2.0 / (2.0 + p)
            )
    rough = vol * np.exp(-t * np.minimum(energy, 700.0 / t))
    order = np.argsort(rough)[::-1]
    cum = np.cumsum(rough[order])
    total = cum[-1]
    keep_n = int(np.searchsorted(cum, (1.0 - params.mass_tol) * total)) + 1
    kept = order[:keep_n]
    dropped_mass = float(total - cum[keep_n - 1])
    return centers[kept], vol, rough[kept], dropped_mass


def _allocate_paths(rough: np.ndarray, paths: int) -> np.ndarray:
    """Largest-remainder allocation proportional to the rough cell masses."""
    if rough.size > paths:
        raise SamplingError(
            f"{rough.size} active cells exceed {paths} paths; "
            "increase paths or the spacing"
        )
    quota = paths * rough / rough.sum()
    alloc = np.maximum(1, np.floor(quota).astype(int))
    excess = int(alloc.sum()) - paths
    while excess > 0:  # the minimum of one oversubscribed; take back from the largest overshoot
        cand = np.where(alloc > 1)[0]
        take = cand[np.argsort(alloc[cand] - quota[cand])[::-1][:excess]]
        alloc[take] -= 1
        excess = int(alloc.sum()) - paths
    if excess < 0:
        order = np.argsort(alloc - quota)
        alloc[order[:-excess]] += 1
    return alloc


def _stratified_trace(spec, n, t, params, weight_fn):
    """Shared core of the stratified path-cell estimators.

    ``weight_fn(positions, cell_centers)`` maps absolute path positions of
    shape (chunk, steps+1, n) to per-path weights; cells receive contiguous
    path blocks, and per-cell means/variances come from one bincount pass.
    """
    centers, vol, rough, dropped = _cell_table(spec, n, t, params)
    alloc = _allocate_paths(rough, params.paths)
    cell_of_path = np.repeat(np.arange(centers.shape[0]), alloc)
    horizon = 2.0 * t
    pref = (4.0 * math.pi * t) ** (-n / 2.0)

    w = np.empty(params.paths)
    chunk = max(1, 20_000_000 // ((params.steps + 1) * n * 8))
    rng_offset = 0
    bridges = _bridge_increments(params.paths, params.steps, n, horizon, params.seed)
    for lo in range(0, params.paths, chunk):
        hi = min(lo + chunk, params.paths)
        pos = centers[cell_of_path[lo:hi], None, :] + bridges[lo:hi]
        w[lo:hi] = weight_fn(pos, centers[cell_of_path[lo:hi]])
    del bridges

    sums = np.bincount(cell_of_path, weights=w, minlength=centers.shape[0])
    sq = np.bincount(cell_of_path, weights=w * w, minlength=centers.shape[0])
    means = sums / alloc
    mean = pref * vol * float(means.sum())

    multi = alloc >= 2
    var_cell = np.zeros_like(means)
    var_cell[multi] = (sq[multi] / alloc[multi] - means[multi] ** 2) * alloc[multi] / (
        alloc[multi] - 1
    )
    # singleton cells borrow the pooled relative variance
    if multi.any() and (~multi).any():
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = var_cell[multi] / means[multi] ** 2
        pooled = float(np.nanmean(np.where(np.isfinite(rel), rel, np.nan)))
        var_cell[~multi] = pooled * means[~multi] ** 2
    var = pref**2 * vol**2 * float((var_cell / alloc).sum())
    stderr = math.sqrt(max(var, 0.0))
    kept_frac = float(np.mean(w > 0.0))
    trunc = pref * 3.0 * dropped  # rough-mass estimate, safety factor 3
    return mean, stderr, kept_frac, trunc


def _potential_spec(potential) -> tuple[list, int]:
    """Normalize 'ExponentVector or (gamma, g)' into per-axis exponent data."""
    if isinstance(potential, ExponentVector):
        return list(potential.alphas), potential.n
    gamma, g = potential
    if gamma <= 0 or g <= 0:
        raise ValueError("1D potential needs positive gamma and g")
    return [(float(gamma), float(g))], 1


def _potential_on_paths(axes_positions: list[np.ndarray], spec: list) -> np.ndarray:
    """Product potential evaluated on (paths, steps+1) position arrays."""
    out = None
    for pos, a in zip(axes_positions, spec):
        if isinstance(a, tuple):
            gamma, g = a
            term = g * np.abs(pos) ** gamma
        else:
            term = np.abs(pos) ** a
        out = term if out is None else out * term
    return out


def _trapezoid_weights(steps: int, horizon: float) -> np.ndarray:
    ds = horizon / steps
    tw = np.full(steps + 1, ds)
    tw[0] = tw[-1] = 0.5 * ds
    return tw


def fk_trace(potential, t: float, params: MCParams = MCParams()) -> FKEstimate:
    """Path-integral estimate of Tr exp(-tH) on a truncated box.

    Spatial integral: product midpoint rule on a uniform grid, pruned by the
    frozen-weight cell mass; each active cell receives a block of bridges
    sized proportionally to that mass, so the work scales with the path
    count, not the cell count.  The stderr aggregates per-cell variances;
    the pruning and box truncation are reported as ``truncation_bound``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    spec, n = _potential_spec(potential)
    if n > 2:
        raise ValueError("fk_trace supports n in {1, 2}")
    tw = _trapezoid_weights(params.steps, 2.0 * t)

    def weight(pos, _centers):
        V = _potential_on_paths([pos[:, :, i] for i in range(n)], spec)
        return np.exp(-0.5 * (V @ tw))

    mean, stderr, _, trunc = _stratified_trace(spec, n, t, params, weight)
    if stderr > 0.25 * abs(mean):
        raise SamplingError(f"stderr {stderr:.3g} exceeds 25% of mean {mean:.3g}")
    return FKEstimate(
        mean=mean, stderr=stderr, paths_kept=1.0, t=t,
        paths=params.paths, steps=params.steps, seed=params.seed,
        truncation_bound=trunc,
    )


def fk_confined_lower(
    alpha: ExponentVector, t: float, policy: ConfinementPolicy, params: MCParams = MCParams()
) -> FKEstimate:
    """Lower bound on Z_Q from confined paths and a frozen potential bound.

    Both the path restriction and the potential majorization shrink the
    integrand, so the estimate is a genuine lower bound up to noise.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    spec, n = _potential_spec(alpha)
    pref = (4.0 * math.pi * t) ** (-n / 2.0)
    tw = _trapezoid_weights(params.steps, 2.0 * t)

    if policy.mode == "xn-band":
        if n != 2:
            raise ValueError("xn-band mode implemented for n=2")

        def weight(pos, cells):
            # paths straying beyond the band in x_n contribute zero; kept
            # paths use the frozen majorant (|x_n|+band)**a_n for that factor
            bridge_n = pos[:, :, -1] - cells[:, -1:]
            keep = np.max(np.abs(bridge_n), axis=1) <= policy.band
            p_other = np.abs(pos[:, :, 0]) ** spec[0]
            bound_n = (np.abs(cells[:, -1]) + policy.band) ** spec[1]
            return keep * np.exp(-0.5 * ((p_other * bound_n[:, None]) @ tw))

        mean, stderr, kept_frac, _ = _stratified_trace(spec, n, t, params, weight)
        if kept_frac == 0.0:
            raise SamplingError("no paths satisfy the x_n band constraint")
        return FKEstimate(mean=mean, stderr=stderr, paths_kept=kept_frac, t=t,
                          paths=params.paths, steps=params.steps, seed=params.seed)

    # all-band mode: paths enter only through the kept fraction
    band = math.sqrt(t) * abs(math.log(t))
    a_excl = math.sqrt(t) * math.log(t) ** 2
    bridges = _bridge_increments(params.paths, params.steps, n, 2.0 * t, params.seed)
    sup_all = np.max(np.abs(bridges), axis=(1, 2))
    frac = float(np.mean(sup_all <= band))
    del bridges
    if frac == 0.0:
        raise SamplingError("no paths satisfy the all-coordinate band constraint")
    kap = policy.kappa(t, n)
    centers, vol, _, _ = _cell_table(spec, n, t, params)
    inside = np.all(np.abs(centers) >= a_excl, axis=1)
    V = _potential_on_paths([centers[inside, i] for i in range(n)], spec)
    volume = vol * float(np.sum(np.exp(-t * kap * V)))
    mean = pref * frac * volume
    stderr = pref * volume * math.sqrt(frac * (1 - frac) / params.paths)
    return FKEstimate(mean=mean, stderr=max(stderr, 1e-300), paths_kept=frac, t=t,
                      paths=params.paths, steps=params.steps, seed=params.seed)


def exit_probability(t: float, band: float, samples: int, seed: int,
                     eps: float = 0.1) -> tuple[float, float]:
    """Empirical bridge sup-excursion probability and its analytic envelope.

    Returns (empirical fraction of bridges with sup |b(s)| > band over
    [0, 2t], envelope (2/eps)*exp(-(1-eps)*band**2/(4t))).  The envelope's
    constant is generous; only the exponential rate is meaningful.
    """
    if band <= 0:
        raise ValueError("band must be positive")
    bridges = _bridge_increments(samples, 64, 1, 2.0 * t, seed)
    sup = np.max(np.abs(bridges[:, :, 0]), axis=1)
    rho = float(np.mean(sup > band))
    bound = (2.0 / eps) * math.exp(-(1.0 - eps) * band**2 / (4.0 * t))
    return rho, bound


def log_volume_rhs(f, a: float, n: int) -> float:
    """Weighted 1D form of the volume of {all |x_i| >= a} under f(prod |x_i|).

    Computes 2**n / (n-1)! * Integral_{a**n}^inf f(p) * ln(p/a**n)**(n-1) dp.
    """
    if a <= 0 or n < 1:
        raise ValueError("need a > 0 and n >= 1")
    lo = a**n
    val, err = quad(lambda p: f(p) * math.log(p / lo) ** (n - 1), lo, np.inf, limit=400)
    if not math.isfinite(val) or (abs(val) > 0 and err > 1e-6 * abs(val) + 1e-12):
        raise SamplingError(f"quadrature did not converge (value {val}, error {err})")
    return 2.0**n / math.factorial(n - 1) * val


def log_volume_lhs(f, a: float, n: int, method: str = "quadrature",
                   seed: int = 0, samples: int = 400_000) -> tuple[float, float]:
    """Direct integral of f(prod |x_i|) over {every |x_i| >= a}."""
    if a <= 0 or n < 1:
        raise ValueError("need a > 0 and n >= 1")
    if method == "quadrature":
        if n == 1:
            val, err = quad(f, a, np.inf, limit=400)
            return 2.0 * val, 2.0 * err
        if n == 2:
            val, err = dblquad(lambda y, x: f(x * y), a, np.inf, a, np.inf)
            return 4.0 * val, 4.0 * err
        raise ValueError("quadrature supported for n <= 2; use method='MC'")
    if method != "MC":
        raise ValueError("method must be 'quadrature' or 'MC'")
    # importance sampling: x_i = a*y_i with y_i - 1 ~ Exp(1); the weight
    # f(a**n * prod y)*exp(sum (y_i - 1)) stays bounded for integrands decaying
    # at least exponentially because prod y >= sum y - (n-1) on y_i >= 1
    rng = np.random.Generator(np.random.Philox(seed))
    y = 1.0 + rng.exponential(1.0, size=(samples, n))
    p = a**n * np.prod(y, axis=1)
    w = np.exp(np.sum(y - 1.0, axis=1))
    fv = np.vectorize(f)(p) * w
    scale = (2.0 * a) ** n
    mean = scale * float(fv.mean())
    stderr = scale * float(fv.std(ddof=1) / math.sqrt(samples))
    if abs(mean) > 0 and stderr > 0.25 * abs(mean):
        raise SamplingError("Monte Carlo stderr exceeds 25% of the estimate")
    return mean, stderr
