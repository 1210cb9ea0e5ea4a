"""Small-time distribution checks, probability envelopes, and digital pricing.

The heavy lifting lives in the compiled extension; this package re-exports
its functions under a stable name. Models are plain dictionaries with the
same layout the command line tool reads, e.g.::

    {"kind": "GBM", "params": {"sigma": 0.2, "r": 0.05}, "x0": [100.0]}
"""

from ._core import (
    BadInput,
    DegenerateLimit,
    MappingDomain,
    NoArbViolation,
    OutOfScope,
    SchemeUnavailable,
    StatisticalFailure,
    UnsupportedModel,
    __version__,
    atm_digital_check,
    bounds_at,
    bs_call,
    bs_digital,
    canonical_model,
    check_assumptions,
    clt_check,
    drift_bound,
    expansion_error_limit,
    fclt_check,
    girsanov_bounds,
    implied_vol,
    ldp_rate,
    mc_digital,
    normal_cdf,
    normal_quantile,
    simulate_paths,
    simulate_terminal,
    skew_check,
    verify_bracketing,
    wilson_interval,
)

__all__ = [
    "BadInput",
    "DegenerateLimit",
    "MappingDomain",
    "NoArbViolation",
    "OutOfScope",
    "SchemeUnavailable",
    "StatisticalFailure",
    "UnsupportedModel",
    "__version__",
    "atm_digital_check",
    "bounds_at",
    "bs_call",
    "bs_digital",
    "canonical_model",
    "check_assumptions",
    "clt_check",
    "drift_bound",
    "expansion_error_limit",
    "fclt_check",
    "girsanov_bounds",
    "implied_vol",
    "ldp_rate",
    "mc_digital",
    "normal_cdf",
    "normal_quantile",
    "simulate_paths",
    "simulate_terminal",
    "skew_check",
    "verify_bracketing",
    "wilson_interval",
]
