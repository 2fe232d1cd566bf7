"""Information-complexity minimization for density estimation on finite sample spaces.

MDL selection and Gibbs posteriors over finite model families, the divergence
and complexity functionals that control their risk, and a harness that checks
the corresponding finite-sample bounds exactly or by seeded Monte Carlo.
"""

from .bounds import BoundReport, BoundSpec, verify, verify_risk_lower_bound
from .complexity import (
    FamilyCover,
    bayesian_resolvability,
    c_n_general,
    c_rho_n_alpha,
    cover_complexity_term,
    critical_prior_mass_radius,
    index_of_resolvability,
    localized_entropy_term,
    prior_mass_resolvability_bound,
    upper_bracketing_number,
    upper_bracketing_radius,
)
from .core import (
    ModelFamily,
    RngSpec,
    convex_duality_gap,
    counts_of,
    gibbs_weights,
    kl_entropy,
    log_likelihood,
    log_likelihood_matrix,
    sample_counts,
    sample_dataset,
    validate_family,
)
from .errors import (
    AllInfiniteKL,
    AllModelsZeroLikelihood,
    ConfigInfeasible,
    EmptyBlock,
    ICMError,
    InputFormatError,
    InvalidCover,
    NegativeMass,
    NonConvergenceWarning,
    NotAPartition,
    ParameterDomain,
    PriorNotPositive,
    ProductSpaceTooLarge,
    RhoOutOfRange,
    ShapeMismatch,
    SumOutOfTolerance,
)
from .divergences import divergence, hellinger_sq, kl, renyi_divergence, rho_divergence
from .estimators import (
    empirical_risk,
    gibbs_posterior,
    icm_minimize,
    mdl_select,
    posterior_expected_divergence,
    posterior_mean_density,
    posterior_tail_mass,
    true_risk,
)
from .hull import (
    HullResult,
    block_mixture_product_divergence,
    inf_kl_over_hull,
    inf_renyi_over_hull,
    inf_rho_over_hull,
    max_power_mean_over_hull,
    sup_kl_over_hull,
    sup_renyi_over_hull,
)

__version__ = "0.1.0"
