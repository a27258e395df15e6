"""Identify anomalous variables from mixed linear observations.

Chernoff-information error exponents, measurement designs, likelihood
detectors and a seeded Monte Carlo harness for the problem of finding the
``k`` variables (out of ``n``) whose law differs from the rest.
"""
from .chernoff import (
    ChernoffResult,
    Ensemble,
    ExponentReport,
    KLBalance,
    chernoff_equal_variance,
    chernoff_gaussian,
    chernoff_zero_mean,
    expected_chernoff,
    holder_lower_bound,
    inner_chernoff,
    kl_gaussian,
    log_affinity,
    min_pairwise_exponent,
    oc_via_kl_balance,
    outer_chernoff,
    sample_complexity,
    tilted_gaussian,
    zero_mean_lambda,
)
from .design import (
    BipartiteDesignSpec,
    Schedule,
    bipartite_design,
    cyclic_ensemble,
    hamming74_design,
    optimal_mean_shift,
    optimal_variance_discrimination,
    optimize_base_vector,
    pairwise_chernoff_sum,
    permutation_ensemble,
    separate_design,
)
from .detect import (
    Decision,
    NPConfig,
    log_likelihood,
    log_likelihoods,
    lrt,
    pairwise_np,
    realize_deterministic_schedule,
    realize_random_schedule,
)
from .exceptions import (
    ChtestError,
    ConfigError,
    DegenerateDistributionError,
    HypothesisSpaceTooLarge,
    IndistinguishableError,
    NumericalError,
    ScopeError,
)
from .gaussmodels import (
    AnomalyModel,
    Gaussian1D,
    GaussianVec,
    Hypothesis,
    enumerate_hypotheses,
    hypothesis_law,
    log_density,
    output_distribution,
    parse_model_config,
    read_model_config,
)
from .montecarlo import (
    BipartiteDesign,
    EnsembleDesign,
    ErrorCurvePoint,
    FixedDesign,
    SeparateDesign,
    TrialPlan,
    empirical_exponent,
    error_curve,
    simulate_trial,
)

__version__ = "0.1.0"
