"""Numerical laboratory for spectra, heat traces, and eigenvalue asymptotics
of Schrodinger operators with product potentials and their Dirichlet-domain
counterparts."""

from .constants import (
    AsymptoticLaw,
    ExponentVector,
    PrefactorPair,
    Regime,
    ScalingExponents,
    dim_exponent,
    lemma_exponents,
    q_exponent,
    scale_laplacian_spectrum,
    scale_potential_spectrum,
    theorem_constant,
)
from .errors import (
    ConvergenceError,
    GridError,
    ReliabilityError,
    SamplingError,
    TraceTruncationError,
    TracelabError,
)
from .spectra import Spectrum
from .operators import (
    DiscreteOperator,
    GridSpec,
    build_dirichlet_nd,
    build_operator_1d,
    build_operator_nd,
    converge_spectrum,
    counting_function,
    eigenvalues,
    ground_energy_1d,
    homotopy_to_dirichlet,
)
from .traces import (
    BoundReport,
    ChainArtifacts,
    DivergenceCertificate,
    HeatTraceCurve,
    OneDHeatTrace,
    SliceFunction,
    check_chain,
    heat_trace,
    heat_trace_modeled,
    separable_upper_bound,
    z_classical_1d,
    z_classical_product_divergence,
    z_sliced_bread,
    z_sliced_gt,
)
from .feynman_kac import (
    ConfinementPolicy,
    FKEstimate,
    MCParams,
    exit_probability,
    fk_confined_lower,
    fk_trace,
    log_volume_lhs,
    log_volume_rhs,
    sample_bridges,
)
from .asymptotics import (
    FitResult,
    ZetaValue,
    fit_asymptotic,
    fit_heat_curve,
    karamata_convert,
    laplace_stieltjes,
    spectral_zeta,
)

__version__ = "0.1.0"
