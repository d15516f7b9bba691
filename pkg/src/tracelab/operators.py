"""Finite-difference discretizations and eigensolvers.

Operators covered:

* 1D: -d^2/dx^2 + g*|x|**gamma on a Dirichlet box [-L, L],
* nD: -Lap + prod_i |x_i|**alpha_i (non-confining product potential),
* Dirichlet Laplacian on the infinite-volume domain prod |x_j|**(alpha_j/alpha_n) < 1,

all with second-order central differences on a uniform grid.  The nD
potentials and domains are even in every coordinate, so the lowest
eigenvalues are computed sector by parity sector: each sector is a
similarity transform of the full-box matrix restricted to one symmetry
class, which keeps matrices small without changing any eigenvalue.  Grid
points deep inside the classically forbidden region (potential far above
the trusted energy range) are dropped with a Dirichlet condition, which is
what makes the very elongated boxes required by the axis tentacles
affordable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal
from scipy.sparse.linalg import eigsh

from .constants import ExponentVector
from .errors import ConvergenceError, GridError, ReliabilityError
from .spectra import Spectrum

__all__ = [
    "GridSpec",
    "DiscreteOperator",
    "build_operator_1d",
    "build_operator_nd",
    "build_dirichlet_nd",
    "eigenvalues",
    "converge_spectrum",
    "counting_function",
    "homotopy_to_dirichlet",
    "ground_energy_1d",
]

POTENTIAL_CLAMP = 1e12
DEFAULT_MEMORY_CAP = 80_000_000


@dataclass(frozen=True)
class GridSpec:
    """Uniform Dirichlet box: per-axis half width L and interior point count m.

    Interior nodes sit at -L + (i+1)*h, i = 0..m-1, with h = 2L/(m+1); the
    box edges carry the Dirichlet condition.  Multi-dimensional grids use an
    odd m per axis so the node set is symmetric under sign flips (a node at
    the origin included).
    """

    half_widths: tuple
    points: tuple
    memory_cap: int = DEFAULT_MEMORY_CAP

    def __post_init__(self):
        if len(self.half_widths) != len(self.points) or not self.half_widths:
            raise GridError("half_widths and points must be nonempty and matched")
        if any(L <= 0 for L in self.half_widths):
            raise GridError("half widths must be positive")
        if any(m < 3 for m in self.points):
            raise GridError("need at least 3 points per axis")
        total = 1
        for m in self.points:
            total *= m
        if total > self.memory_cap:
            raise GridError(f"grid size {total} exceeds memory cap {self.memory_cap}")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def spacings(self) -> tuple:
        return tuple(2.0 * L / (m + 1) for L, m in zip(self.half_widths, self.points))

    def axis_nodes(self, a: int) -> np.ndarray:
        L, m = self.half_widths[a], self.points[a]
        h = 2.0 * L / (m + 1)
        return -L + h * np.arange(1, m + 1)

    def refined(self) -> "GridSpec":
        """Halve the spacing (m -> 2m+1 keeps the node set nested and odd)."""
        return GridSpec(
            self.half_widths,
            tuple(2 * m + 1 for m in self.points),
            memory_cap=self.memory_cap,
        )

    @classmethod
    def from_spacing(cls, half_widths: Sequence[float], h: float, memory_cap: int = DEFAULT_MEMORY_CAP) -> "GridSpec":
        """Choose odd per-axis counts so the spacing is at most ``h``."""
        points = []
        for L in half_widths:
            m = int(math.ceil(2.0 * L / h)) - 1
            m = max(m, 3)
            if m % 2 == 0:
                m += 1
            points.append(m)
        return cls(tuple(float(L) for L in half_widths), tuple(points), memory_cap=memory_cap)

    def describe(self) -> dict:
        return {
            "half_widths": list(self.half_widths),
            "points": list(self.points),
            "spacings": list(self.spacings),
        }


@dataclass
class DiscreteOperator:
    """Symmetric positive finite-difference operator on a Dirichlet box."""

    kind: str  # "schrodinger1d" | "schrodinger" | "dirichlet"
    grid: GridSpec
    gamma: float | None = None
    g: float | None = None
    alpha: ExponentVector | None = None
    power: float = 1.0  # extra exponent multiplier for homotopy potentials
    reliability_cutoff: float = math.inf
    potential_cap: float | None = None  # forbidden-region Dirichlet threshold
    clamped: bool = False  # set when potential evaluation hit the overflow clamp

    _matrix_cache: sp.spmatrix | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.grid.n

    # -- potential / domain ------------------------------------------------

    def potential_1d_values(self, x: np.ndarray) -> np.ndarray:
        v = self.g * np.abs(x) ** self.gamma
        v = np.nan_to_num(v, posinf=POTENTIAL_CLAMP)
        if np.any(v > POTENTIAL_CLAMP):
            object.__setattr__(self, "clamped", True)
            v = np.minimum(v, POTENTIAL_CLAMP)
        return v

    def potential_nd(self, axis_values: list[np.ndarray]) -> np.ndarray:
        """Product potential on the tensor grid spanned by per-axis node arrays.

        Returns an ndarray of shape (len(axis_values[0]), ..., len(axis_values[n-1])).
        Values above the overflow clamp are capped and flagged.
        """
        out = None
        for a, x in enumerate(axis_values):
            expo = self.alpha.alphas[a] * self.power
            with np.errstate(over="ignore"):
                fac = np.abs(x) ** expo
            shape = [1] * len(axis_values)
            shape[a] = -1
            fac = fac.reshape(shape)
            # inf * 0 at axis nodes is a genuine 0 of the product potential
            with np.errstate(over="ignore", invalid="ignore"):
                out = fac if out is None else out * fac
        out = np.nan_to_num(out, posinf=POTENTIAL_CLAMP)
        if np.any(out > POTENTIAL_CLAMP):
            object.__setattr__(self, "clamped", True)
            out = np.minimum(out, POTENTIAL_CLAMP)
        return out

    def domain_inside(self, axis_values: list[np.ndarray]) -> np.ndarray:
        """Indicator of the domain prod |x_j|**(alpha_j/alpha_n) < 1 on a tensor grid."""
        alphas = self.alpha.alphas
        an = alphas[-1]
        logp = None
        for a, x in enumerate(axis_values):
            with np.errstate(divide="ignore"):
                term = (alphas[a] / an) * np.log(np.abs(x))
            shape = [1] * len(axis_values)
            shape[a] = -1
            term = term.reshape(shape)
            logp = term if logp is None else logp + term
        return logp < 0.0

    # -- full-grid matrix (reference path, small grids) --------------------

    def matrix(self) -> sp.spmatrix:
        """Assemble the operator on the full box grid (small grids only)."""
        if self._matrix_cache is not None:
            return self._matrix_cache
        grid = self.grid
        total = int(np.prod(grid.points))
        if total > 400_000:
            raise GridError("full-grid matrix requested for a grid too large; use eigenvalues()")
        hs = grid.spacings
        lap = None
        for a in range(grid.n):
            m = grid.points[a]
            h2 = hs[a] ** 2
            T = sp.diags([np.full(m, 2.0 / h2), np.full(m - 1, -1.0 / h2), np.full(m - 1, -1.0 / h2)], [0, -1, 1])
            term = T
            for b in range(grid.n):
                if b == a:
                    continue
                eye = sp.identity(grid.points[b])
                term = sp.kron(term, eye) if b > a else sp.kron(eye, term)
            lap = term if lap is None else lap + term
        axis_values = [grid.axis_nodes(a) for a in range(grid.n)]
        if self.kind == "schrodinger1d":
            V = self.potential_1d_values(axis_values[0])
            A = lap + sp.diags(V)
        elif self.kind == "schrodinger":
            V = self.potential_nd(axis_values).ravel()
            A = lap + sp.diags(V)
        elif self.kind == "dirichlet":
            inside = self.domain_inside(axis_values).ravel()
            if not inside.any():
                raise GridError("empty domain mask")
            keep = np.flatnonzero(inside)
            A = lap.tocsr()[keep][:, keep]
        else:
            raise ValueError(self.kind)
        A = A.tocsr()
        self._matrix_cache = A
        return A

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix() @ v


# -- builders --------------------------------------------------------------


def build_operator_1d(gamma: float, g: float, grid: GridSpec) -> DiscreteOperator:
    """-d^2/dx^2 + g|x|**gamma with Dirichlet endpoints; symmetric tridiagonal."""
    if gamma <= 0 or g <= 0:
        raise ValueError("gamma and g must be positive")
    if grid.n != 1:
        raise GridError("1D operator needs a 1D grid")
    log_cutoff = math.log(0.5 * g) + gamma * math.log(grid.half_widths[0])
    cutoff = math.exp(min(log_cutoff, 700.0))
    return DiscreteOperator(kind="schrodinger1d", grid=grid, gamma=gamma, g=g, reliability_cutoff=cutoff)


def _schrodinger_cutoff(alpha: ExponentVector, grid: GridSpec, power: float = 1.0) -> float:
    """Box-channel threshold heuristic for the non-confining product potential.

    Along the tentacle of axis j the transverse operator at the box edge has
    ground energy about lam0 * (L_j**alpha_j)**(2/(2+p)) with p the sum of
    the other exponents; the returned cutoff is half the smallest threshold.
    """
    alphas = [a * power for a in alpha.alphas]
    thresholds = []
    for j in range(len(alphas)):
        others = [a for i, a in enumerate(alphas) if i != j]
        p = sum(others)
        if len(others) == 1:
            lam0 = ground_energy_1d(others[0])
        else:
            lam0 = 0.5  # conservative stand-in for the reduced nD ground energy
        # work in logs: steep homotopy powers overflow L**alpha
        log_thresh = math.log(lam0) + alphas[j] * math.log(grid.half_widths[j]) * 2.0 / (2.0 + p)
        thresholds.append(math.exp(min(log_thresh, 700.0)))
    return min(thresholds) / 2.0


def build_operator_nd(alpha: ExponentVector, grid: GridSpec, power: float = 1.0,
                      potential_cap: float | None = None) -> DiscreteOperator:
    """-Lap + prod |x_i|**alpha_i on a Dirichlet box (n = 2 or 3 at desk scale)."""
    if alpha.n != grid.n:
        raise GridError("exponent vector and grid dimensions differ")
    if grid.n not in (2, 3):
        raise GridError("nD builder supports n in {2, 3}")
    if any(m % 2 == 0 for m in grid.points):
        raise GridError("nD grids need odd per-axis point counts (sign-flip symmetric nodes)")
    cutoff = _schrodinger_cutoff(alpha, grid, power)
    if potential_cap is None:
        potential_cap = max(20.0 * cutoff, 50.0)
    return DiscreteOperator(
        kind="schrodinger",
        grid=grid,
        alpha=alpha,
        power=power,
        reliability_cutoff=cutoff,
        potential_cap=potential_cap,
    )


def _dirichlet_cutoff(alpha: ExponentVector, grid: GridSpec) -> float:
    alphas = alpha.alphas
    an = alphas[-1]
    thresholds = []
    for j in range(len(alphas)):
        L = grid.half_widths[j]
        trans = 0.0
        for i in range(len(alphas)):
            if i == j:
                continue
            # half-width of the tentacle cross-section at |x_j| = L
            w = L ** (-(alphas[j] / an) / (alphas[i] / an))
            trans += (math.pi ** 2 / 4.0) / w**2
        thresholds.append(trans)
    return min(thresholds) / 2.0


def build_dirichlet_nd(alpha: ExponentVector, grid: GridSpec) -> DiscreteOperator:
    """Dirichlet Laplacian restricted to prod |x_j|**(alpha_j/alpha_n) < 1."""
    if alpha.n != grid.n:
        raise GridError("exponent vector and grid dimensions differ")
    if grid.n not in (2, 3):
        raise GridError("Dirichlet builder supports n in {2, 3}")
    if any(m % 2 == 0 for m in grid.points):
        raise GridError("nD grids need odd per-axis point counts")
    return DiscreteOperator(
        kind="dirichlet",
        grid=grid,
        alpha=alpha,
        reliability_cutoff=_dirichlet_cutoff(alpha, grid),
    )


# -- parity-sector eigensolve ---------------------------------------------


def _sector_axis(grid: GridSpec, a: int, parity: int):
    """Nonnegative nodes and consecutive-coupling array for one axis sector.

    parity 0 (even) keeps nodes 0, h, ..., Kh with the symmetrized sqrt(2)
    coupling between the first two; parity 1 (odd) keeps h, ..., Kh with a
    plain Dirichlet condition at the origin.
    """
    h = grid.spacings[a]
    K = (grid.points[a] - 1) // 2
    if parity == 0:
        nodes = h * np.arange(0, K + 1)
        coup = np.full(K, -1.0 / h**2)
        if K >= 1:
            coup[0] = -math.sqrt(2.0) / h**2
    else:
        nodes = h * np.arange(1, K + 1)
        coup = np.full(K - 1, -1.0 / h**2)
    return nodes, coup, 2.0 / h**2


def _assemble_sector(op: DiscreteOperator, parities: tuple) -> tuple[sp.spmatrix | None, int]:
    """Masked sparse matrix for one parity sector; (None, 0) if the sector is empty."""
    grid = op.grid
    axes = [_sector_axis(grid, a, p) for a, p in enumerate(parities)]
    axis_nodes = [ax[0] for ax in axes]
    sizes = [len(nodes) for nodes in axis_nodes]
    if any(s == 0 for s in sizes):
        return None, 0
    total = int(np.prod(sizes))

    if op.kind == "schrodinger":
        V = op.potential_nd(axis_nodes).ravel()
        keep = V <= op.potential_cap
    else:
        inside = op.domain_inside(axis_nodes).ravel()
        keep = inside
        V = None
    if not keep.any():
        return None, 0

    imap = np.full(total, -1, dtype=np.int64)
    kept = np.flatnonzero(keep)
    imap[kept] = np.arange(kept.size)

    diag = np.zeros(kept.size)
    if V is not None:
        diag += V[kept]
    for _, _, d2 in axes:
        diag += d2

    rows = [np.arange(kept.size)]
    cols = [np.arange(kept.size)]
    vals = [diag]

    # couplings along each axis between consecutive kept nodes
    strides = np.ones(len(sizes), dtype=np.int64)
    for a in range(len(sizes) - 2, -1, -1):
        strides[a] = strides[a + 1] * sizes[a + 1]
    idx_grids = np.unravel_index(kept, sizes)
    for a, (_, coup, _) in enumerate(axes):
        if coup.size == 0:
            continue
        has_next = idx_grids[a] < sizes[a] - 1
        src = kept[has_next]
        dst = src + strides[a]
        ok = imap[dst] >= 0
        src = src[ok]
        dst = dst[ok]
        c = coup[idx_grids[a][has_next][ok]]
        i, j = imap[src], imap[dst]
        rows.extend([i, j])
        cols.extend([j, i])
        vals.extend([c, c])

    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(kept.size, kept.size),
    )
    return A, kept.size


def _lowest_eigenvalues(A: sp.spmatrix, k: int) -> np.ndarray:
    size = A.shape[0]
    if size <= max(600, 3 * k):
        return np.linalg.eigvalsh(A.toarray())[: min(k, size)]
    k_eff = min(k, size - 2)
    v0 = np.full(size, 1.0 / math.sqrt(size))
    vals = eigsh(A.tocsc(), k=k_eff, sigma=0.0, which="LM", v0=v0, return_eigenvectors=False)
    return np.sort(vals)


def eigenvalues(op: DiscreteOperator, k: int) -> Spectrum:
    """The k lowest eigenvalues of the discrete operator, ascending.

    Deterministic for fixed inputs; raises when k is too large for the grid.
    """
    if k < 1:
        raise ValueError("k must be positive")
    grid = op.grid
    total = int(np.prod(grid.points))
    if k > total // 4:
        raise ValueError(f"k={k} exceeds a quarter of the grid size {total}")

    if op.kind == "schrodinger1d":
        x = grid.axis_nodes(0)
        h2 = grid.spacings[0] ** 2
        diag = 2.0 / h2 + op.potential_1d_values(x)
        off = np.full(x.size - 1, -1.0 / h2)
        vals = eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, k - 1))
        ev = np.sort(vals)
    else:
        collected = []
        for parities in itertools.product((0, 1), repeat=grid.n):
            A, size = _assemble_sector(op, parities)
            if A is None:
                continue
            k_sector = min(k, max(1, size - 2))
            collected.append(_lowest_eigenvalues(A, k_sector))
        if not collected:
            raise GridError("all sectors empty (mask too restrictive)")
        ev = np.sort(np.concatenate(collected))[:k]
        if ev.size < k:
            raise ConvergenceError(f"only {ev.size} eigenvalues available, requested {k}")
    if np.any(ev <= 0):
        raise ConvergenceError("nonpositive eigenvalue returned; grid too coarse")
    return Spectrum(
        eigenvalues=ev,
        reliability_cutoff=op.reliability_cutoff,
        grid_info=grid.describe(),
    )


def converge_spectrum(
    make_operator: Callable[[GridSpec], DiscreteOperator],
    grid: GridSpec,
    k: int,
    rel_tol: float = 1e-5,
    max_refinements: int = 3,
    richardson: bool = False,
) -> Spectrum:
    """Refine the spacing until each of the k eigenvalues settles to rel_tol.

    With ``richardson`` the h**2 leading error is extrapolated away using the
    last two refinement levels.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    op = make_operator(grid)
    prev = eigenvalues(op, k)
    for _ in range(max_refinements):
        grid = grid.refined()
        op = make_operator(grid)
        cur = eigenvalues(op, k)
        change = np.abs(cur.eigenvalues - prev.eigenvalues) / np.abs(cur.eigenvalues)
        if np.all(change < rel_tol):
            ev = cur.eigenvalues
            if richardson:
                ev = (4.0 * cur.eigenvalues - prev.eigenvalues) / 3.0
            return Spectrum(
                eigenvalues=ev,
                convergence=change,
                reliability_cutoff=op.reliability_cutoff,
                grid_info=grid.describe(),
            )
        prev = cur
    raise ConvergenceError(
        f"refinement budget ({max_refinements}) exhausted before rel_tol={rel_tol}"
    )


def counting_function(spectrum: Spectrum, E: float) -> int:
    """N(E): number of eigenvalues <= E (closed inequality)."""
    if E > spectrum.reliability_cutoff:
        raise ReliabilityError(
            f"E={E} above reliability cutoff {spectrum.reliability_cutoff}"
        )
    return int(np.searchsorted(spectrum.eigenvalues, E, side="right"))


def homotopy_to_dirichlet(
    alpha: ExponentVector,
    j_list: Sequence[float],
    grid: GridSpec,
    k: int,
) -> list[Spectrum]:
    """Spectra of -Lap + (V_alpha)**j for an ascending list of powers j.

    As j grows the potential approaches the hard-wall indicator of the
    complement of prod |x_i|**alpha_i < 1, so the spectra approach the
    masked-domain Dirichlet spectrum.
    """
    js = [float(j) for j in j_list]
    if any(b <= a for a, b in zip(js, js[1:])):
        raise ValueError("j_list must be strictly ascending")
    spectra = []
    for j in js:
        # very steep potentials confine to the unit region: no channel heuristic
        op = build_operator_nd(alpha, grid, power=j)
        spectra.append(eigenvalues(op, k))
    return spectra


@lru_cache(maxsize=64)
def ground_energy_1d(nu: float) -> float:
    """Ground energy of -d^2/dx^2 + |x|**nu, converged with Richardson."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    L = max(6.0, 24.0 ** (1.0 / nu))
    if nu > 8.0:
        # near-box potential: the wall position is only resolved to O(h), so
        # grid refinement cannot certify tight tolerances; callers with such
        # exponents are heuristics that need only a few digits
        op = build_operator_1d(nu, 1.0, GridSpec.from_spacing((max(2.0, L / 3.0),), 0.005))
        return float(eigenvalues(op, 1).eigenvalues[0])
    grid = GridSpec.from_spacing((L,), min(0.05, L / 400.0))

    def make(g: GridSpec) -> DiscreteOperator:
        return build_operator_1d(nu, 1.0, g)

    # h^2 convergence: a 2e-6 step change plus Richardson leaves ~1e-9 error
    spec = converge_spectrum(make, grid, k=1, rel_tol=2e-6, max_refinements=8, richardson=True)
    return float(spec.eigenvalues[0])
