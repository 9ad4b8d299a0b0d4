"""reclab: a laboratory for Poisson and compound-Poisson approximation of
multiple-recurrence counts on shift spaces."""

from .bounds import (
    BoundInputs,
    bound_inputs,
    compound_poisson_approximation_bound,
    hitting_time_law_bound,
    poisson_approximation_bound,
    polya_aeppli_approximation_bound,
    psi_threshold,
)
from .distributions import (
    Pmf,
    compound_pmf,
    geometric_cluster,
    poisson_pmf,
    polya_aeppli_pmf,
    tv_distance,
    wp,
)
from .engine import (
    EmpiricalDistribution,
    ExperimentReport,
    canonical_json,
    compare_to_target,
    entropy_estimate,
    exact_distribution,
    hitting_time_survival,
    mc_radius,
    nonconvergence_sweep,
    simulate_counts,
    simulate_hitting_times,
)
from .errors import (
    ConditioningError,
    DegenerateParametersError,
    EnumerationCapError,
    HorizonCapError,
    HypothesisError,
    InvalidInputError,
    NoPositiveRateError,
    PreconditionError,
    ReclabError,
    SupportExitWarning,
    WrongModelError,
)
from .measures import (
    BernoulliMeasure,
    MarkovMeasure,
    MixingProfile,
    XorCoupledMeasure,
    cylinder_prob,
    mixing_profile,
    model_config,
    model_from_config,
    sample_path,
)
from .recurrence import (
    CylinderContext,
    GapProfile,
    RecurrenceSpec,
    count_hits,
    cylinder_context,
    gap_profile,
    gap_profile_general,
    hitting_time,
    horizon_N,
    kappa,
    minimal_feasible_lag,
    rho,
)
from .words import (
    Alphabet,
    PeriodProfile,
    Word,
    border_array,
    constant_word,
    overlap_set,
    parse_word,
    periodic_extension,
    prefix_period_profile,
    principal_period,
    thue_morse_prefix,
)

__version__ = "0.1.0"
