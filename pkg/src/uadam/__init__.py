"""Unified adaptive stochastic momentum optimization with verification tooling.

One driver covers the Adam family: an interpolated momentum direction
(heavy-ball at lam=0, Nesterov at lam=1, raw gradient at lam=1/(1-beta))
combined with any of nine pluggable adaptive learning-rate rules, each
carrying an analytic bound certificate. Diagnostics numerically verify the
variance recursion, bound compliance and convergence conditions that make
the combination work.
"""

from .core import (
    RULES,
    ConfigurationError,
    NumericAbortError,
    NumericDomainError,
    RunTrace,
    UAdamConfig,
    as_vector,
    elementwise,
    norm_sq,
    sgd_lambda,
)
from .diagnostics import (
    ConditionReport,
    ConvergenceConditions,
    ConvergenceSummary,
    RecursionCheckReport,
    check_assumption4,
    check_run_variance_recursion,
    check_variance_recursion_deterministic,
    check_variance_recursion_stochastic,
    convergence_summary,
    validate_convergence_conditions,
)
from .driver import OptimizerRun, run_to_completion, start_run, step
from .lr_rules import (
    BoundCertificate,
    LrRuleState,
    bound_certificate,
    bound_certificate_from_config,
    lr_update,
    softplus,
)
from .momentum import (
    PAIRS,
    AltMomentumState,
    MomentumState,
    check_equivalence,
    nme_step,
    shb_step,
    snag1_step,
    snag2_step,
    sum2_step,
    sum_update,
)
from .oracle import (
    RNG_IDENTIFIER,
    NoiseModel,
    Problem,
    default_start,
    finite_diff_check,
    make_problem,
    sample_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "AltMomentumState",
    "BoundCertificate",
    "ConditionReport",
    "ConfigurationError",
    "ConvergenceConditions",
    "ConvergenceSummary",
    "LrRuleState",
    "MomentumState",
    "NoiseModel",
    "NumericAbortError",
    "NumericDomainError",
    "OptimizerRun",
    "PAIRS",
    "Problem",
    "RNG_IDENTIFIER",
    "RULES",
    "RecursionCheckReport",
    "RunTrace",
    "UAdamConfig",
    "as_vector",
    "bound_certificate",
    "bound_certificate_from_config",
    "check_assumption4",
    "check_equivalence",
    "check_run_variance_recursion",
    "check_variance_recursion_deterministic",
    "check_variance_recursion_stochastic",
    "convergence_summary",
    "default_start",
    "elementwise",
    "finite_diff_check",
    "lr_update",
    "make_problem",
    "nme_step",
    "norm_sq",
    "run_to_completion",
    "sample_gradient",
    "sgd_lambda",
    "shb_step",
    "snag1_step",
    "snag2_step",
    "softplus",
    "start_run",
    "step",
    "sum2_step",
    "sum_update",
    "validate_convergence_conditions",
]
