"""Sequential Bayesian stopping for categorical mode identification.

Thin wrapper over the C++ core; see the project README for the model and the
command line interface.
"""

from seqstop._core import (  # noqa: F401
    AggregatedCountState,
    CountState,
    FrequencyLevel,
    HyperPrior,
    ModelViolationError,
    PosteriorResult,
    Prior,
    RateReport,
    StopOutcome,
    TiePolicy,
    aggregated_posterior,
    asc_confidence,
    asc_stop,
    beta_tail_above_half,
    condense,
    exact_posterior,
    hypothesis_posteriors,
    k2_threshold,
    kl_bernoulli,
    kl_categorical,
    mixture_aggregated_posterior,
    mixture_posterior,
    rate_known,
    rate_prior_free,
    rate_uncertain,
    run_policy,
    run_policy_sampled,
    tail_sum,
    tilde_tail_sum,
)

__all__ = [
    "AggregatedCountState",
    "CountState",
    "FrequencyLevel",
    "HyperPrior",
    "ModelViolationError",
    "PosteriorResult",
    "Prior",
    "RateReport",
    "StopOutcome",
    "TiePolicy",
    "aggregated_posterior",
    "asc_confidence",
    "asc_stop",
    "beta_tail_above_half",
    "condense",
    "exact_posterior",
    "hypothesis_posteriors",
    "k2_threshold",
    "kl_bernoulli",
    "kl_categorical",
    "mixture_aggregated_posterior",
    "mixture_posterior",
    "rate_known",
    "rate_prior_free",
    "rate_uncertain",
    "run_policy",
    "run_policy_sampled",
    "tail_sum",
    "tilde_tail_sum",
]

__version__ = "0.1.0"
