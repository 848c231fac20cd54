"""Unit balls of the classical matrix ensembles: volumes, eigenvalue laws and intersections."""

__version__ = "0.1.0"

from ._validation import DegenerateInputWarning, DomainError, SingularityError
from .config import DEFAULT_QUADRATURE, QuadratureConfig
from .constants import (
    A_pq_classical,
    C_pq,
    EnsembleSpec,
    a_p_beta,
    a_pq,
    asymptotic_volume_radius,
    b_p,
    delta_p_closed_form,
    intersection_threshold,
    log_c_n_beta,
)
from .delta_opt import (
    OptimizerConfig,
    OptimizerResult,
    delta_objective,
    lagrange_residual,
    optimize_delta_n,
)
from .experiments import (
    MonteCarloEstimate,
    empirical_measure,
    estimate_log_I,
    intersection_experiment,
    ks_to_scaled_ullman,
    log_volume_ball,
    wlln_experiment,
    wlln_statistic,
)
from .measures import EmpiricalMeasure
from .sampler import (
    ChainConfig,
    EigenBatch,
    EigenSample,
    loggas_logdensity,
    sample_beta_hermite,
    sample_classical_lp_ball,
    sample_loggas_mcmc,
    sample_unit_ball_eigen,
    schechtman_zinn_transform,
)
from .ullman import (
    PotentialReport,
    UllmanDist,
    energy_functional,
    free_entropy,
    j_functional,
    lambda_p,
    log_potential,
    ullman_abs_moment,
    ullman_cdf,
    ullman_pdf,
    ullman_sample,
    verify_free_entropy,
)
from .vandermonde import (
    NodeSet,
    fekete_points,
    gauss_lobatto_nodes,
    gl_vandermonde_identity_gap,
    k_diameter,
    log_vandermonde,
)
