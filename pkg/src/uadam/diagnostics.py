"""Numerical verification of the analysis machinery behind the optimizer.

Three families of checks:

* the one-step variance recursion for the EMA first moment, verified either
  pointwise on noiseless runs or by Monte Carlo at a frozen state;
* the hyperparameter conditions under which the whole-horizon averaged
  squared gradient norm is guaranteed to shrink, in both the raw
  (eta_l, eta_u) form and the ratio form K = eta_u/eta_l;
* bound-compliance counting and convergence-rate summaries over run traces.

All checks are pure functions of their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, RunTrace, Vector, norm_sq
from .lr_rules import BoundCertificate
from .oracle import NoiseModel, Problem

#: absolute rounding slack used wherever a proven inequality is checked in floats
DETERMINISTIC_TOL = 1e-12


@dataclass(frozen=True)
class RecursionCheckReport:
    """Outcome of one variance-recursion check at one state."""

    step: int
    lhs: float
    rhs: float
    slack: float
    stderr: float
    passed: bool


@dataclass(frozen=True)
class ConvergenceConditions:
    """Inputs to the hyperparameter condition validator."""

    eta_l: float
    eta_u: float
    L: float
    d0: float
    d1: float
    beta: float
    lam: float

    def __post_init__(self):
        if not 0 < self.eta_l <= self.eta_u:
            raise ConfigurationError("requires 0 < eta_l <= eta_u")
        if self.L <= 0:
            raise ConfigurationError("L must be positive")
        if self.d0 < 0 or self.d1 < 0:
            raise ConfigurationError("d0, d1 must be nonnegative")
        if not 0 <= self.beta < 1:
            raise ConfigurationError("beta must lie in [0, 1)")
        if self.lam < 0:
            raise ConfigurationError("lam must be nonnegative")

    @property
    def K(self) -> float:
        return self.eta_u / self.eta_l


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    value: float
    bound: float
    margin: float
    satisfied: bool


@dataclass(frozen=True)
class ConditionReport:
    """Validator output: per-constraint margins plus overall verdicts.

    ``beta_interval`` is the interval of beta values for which the ratio-form
    constraints could all hold at the given (eta_u, K); ``beta_feasible`` is
    False when that set is empty, a valid verdict rather than an error.
    """

    satisfied: bool
    k_form_satisfied: bool
    checks: tuple[ConstraintCheck, ...]
    violated: tuple[str, ...]
    beta_feasible: bool
    beta_interval: tuple[float, float] | None


def _constraint(name: str, value: float, bound: float) -> ConstraintCheck:
    return ConstraintCheck(name, value, bound, bound - value, value <= bound)


def validate_convergence_conditions(tc: ConvergenceConditions) -> ConditionReport:
    """Evaluate every hyperparameter inequality and report margins.

    A zero ``d1`` makes the noise-coupled constraints vacuous (bounds become
    infinite); that is handled, not an error.
    """
    one_minus_beta = 1.0 - tc.beta
    L, d1, lam, K = tc.L, tc.d1, tc.lam, tc.K

    beta_bound = min(tc.eta_l / (2.0 * (2.0 + lam) * d1 * tc.eta_u), 1.0) if d1 > 0 else 1.0
    noise_bound = (tc.eta_l / (8.0 * d1 * L**2)) ** (1.0 / 3.0) if d1 > 0 else math.inf
    checks = [
        _constraint("one_minus_beta", one_minus_beta, beta_bound),
        _constraint("eta_u_vs_noise_curvature", tc.eta_u, noise_bound),
        _constraint(
            "eta_u_vs_momentum", tc.eta_u, (one_minus_beta**2 * tc.eta_l / (4.0 * L**2)) ** (1.0 / 3.0)
        ),
        _constraint("eta_u_vs_curvature", tc.eta_u, math.sqrt(tc.eta_l / (2.0 * L))),
    ]

    k_beta_bound = min(1.0 / (2.0 * (2.0 + lam) * d1 * K), 1.0) if d1 > 0 else 1.0
    k_noise_bound = 1.0 / (2.0 * L * math.sqrt(2.0 * K * d1)) if d1 > 0 else math.inf
    k_checks = [
        _constraint("k_one_minus_beta", one_minus_beta, k_beta_bound),
        _constraint("k_eta_u_vs_noise_curvature", tc.eta_u, k_noise_bound),
        _constraint("k_eta_u_vs_momentum", tc.eta_u, one_minus_beta / (2.0 * L * math.sqrt(K))),
        _constraint("k_eta_u_vs_curvature", tc.eta_u, 1.0 / (2.0 * K * L)),
    ]

    # beta-feasibility in the ratio form: the momentum constraint demands
    # 1-beta >= 2*L*sqrt(K)*eta_u while the noise constraint caps 1-beta.
    lo = 2.0 * L * math.sqrt(K) * tc.eta_u
    hi = k_beta_bound
    others_ok = k_checks[1].satisfied and k_checks[3].satisfied
    feasible = others_ok and lo <= hi and lo <= 1.0
    interval = (max(0.0, 1.0 - hi), 1.0 - lo) if feasible else None

    all_checks = tuple(checks + k_checks)
    violated = tuple(c.name for c in all_checks if not c.satisfied)
    return ConditionReport(
        satisfied=all(c.satisfied for c in checks),
        k_form_satisfied=all(c.satisfied for c in k_checks),
        checks=all_checks,
        violated=violated,
        beta_feasible=feasible,
        beta_interval=interval,
    )


def check_variance_recursion_deterministic(
    x_prev: Vector,
    x: Vector,
    m_prev: Vector,
    m: Vector,
    beta: float,
    L: float,
    problem: Problem,
    *,
    step: int = 0,
) -> RecursionCheckReport:
    """Pointwise recursion check for a noiseless transition (g equals the true gradient).

    lhs is the tracking error at the new state; rhs contracts the previous
    error by beta and pays a curvature term for the movement. The variance
    term is identically zero here.
    """
    if beta >= 1:
        raise ConfigurationError("beta must be < 1 (the movement coefficient divides by 1-beta)")
    lhs = norm_sq(m - problem.grad(x))
    rhs = beta * norm_sq(m_prev - problem.grad(x_prev)) + (beta**2 / (1.0 - beta)) * L**2 * norm_sq(
        x - x_prev
    )
    slack = rhs - lhs
    return RecursionCheckReport(step, lhs, rhs, slack, 0.0, slack >= -DETERMINISTIC_TOL)


def check_run_variance_recursion(
    trace: RunTrace, beta: float, L: float, problem: Problem
) -> list[RecursionCheckReport]:
    """Apply the deterministic check at every step of a noiseless recorded run.

    Requires a trace recorded with vector histories. The first step uses the
    convention x_0 = x_1, m_0 = 0.
    """
    if not trace.x_hist:
        raise ConfigurationError("trace has no recorded vectors; rerun with record_vectors=True")
    reports = []
    zero = np.zeros_like(trace.x_hist[0])
    for i in range(len(trace.x_hist)):
        x_prev = trace.x_hist[i - 1] if i else trace.x_hist[0]
        m_prev = trace.m_hist[i - 1] if i else zero
        reports.append(
            check_variance_recursion_deterministic(
                x_prev, trace.x_hist[i], m_prev, trace.m_hist[i], beta, L, problem,
                step=int(trace.t[i]),
            )
        )
    return reports


def check_variance_recursion_stochastic(
    x_prev: Vector,
    x: Vector,
    m_prev: Vector,
    beta: float,
    L: float,
    problem: Problem,
    noise: NoiseModel,
    n_samples: int,
    *,
    t: int = 1,
    form: str = "standard",
) -> RecursionCheckReport:
    """Monte Carlo recursion check at a frozen state (x_prev, x, m_prev).

    Draws ``n_samples`` fresh gradients at x, forms the one-step moment for
    each, and compares the sample mean of the tracking error against the
    bound, whose variance term uses the same samples. Passing tolerance is
    three standard errors of the slack (plus rounding slack, so the noiseless
    degenerate case reduces to the deterministic check).

    ``form="flipped"`` checks the same bound for the reversed EMA convention
    m = (1-beta)*m_prev + beta*g, with the coefficients swapped accordingly.
    """
    if beta >= 1:
        raise ConfigurationError("beta must be < 1")
    if n_samples < 2:
        raise ConfigurationError("n_samples must be at least 2")
    if form == "standard":
        hist_w, grad_w = beta, 1.0 - beta
        move_coef = beta**2 / (1.0 - beta)
    elif form == "flipped":
        if beta <= 0:
            raise ConfigurationError("flipped form requires beta > 0 (movement term divides by beta)")
        hist_w, grad_w = 1.0 - beta, beta
        move_coef = (1.0 - beta) ** 2 / beta
    else:
        raise ConfigurationError(f"unknown form {form!r}; expected standard or flipped")

    grad_here = problem.grad(x)
    samples = noise.apply_batch(grad_here, t, n_samples)
    moments = hist_w * m_prev + grad_w * samples
    tracking_err = np.sum((moments - grad_here) ** 2, axis=1)
    grad_err = np.sum((samples - grad_here) ** 2, axis=1)

    rhs_const = hist_w * norm_sq(m_prev - problem.grad(x_prev)) + move_coef * L**2 * norm_sq(x - x_prev)
    slack_samples = rhs_const + grad_w**2 * grad_err - tracking_err
    slack = float(slack_samples.mean())
    stderr = float(slack_samples.std(ddof=1) / math.sqrt(n_samples))
    return RecursionCheckReport(
        step=t,
        lhs=float(tracking_err.mean()),
        rhs=rhs_const + grad_w**2 * float(grad_err.mean()),
        slack=slack,
        stderr=stderr,
        passed=slack >= -(3.0 * stderr + DETERMINISTIC_TOL),
    )


@dataclass(frozen=True)
class ConvergenceSummary:
    avg_grad_sq: float
    min_grad_sq: float
    plateau: float


def convergence_summary(trace: RunTrace) -> ConvergenceSummary:
    """Whole-run average and minimum of the squared gradient norm, plus the
    late-run plateau (mean over the final 10% of steps)."""
    if len(trace) == 0:
        raise ConfigurationError("cannot summarize an empty trace")
    gns = trace.grad_norm_sq
    tail = max(1, len(gns) // 10)
    return ConvergenceSummary(
        avg_grad_sq=float(gns.mean()),
        min_grad_sq=float(gns.min()),
        plateau=float(gns[-tail:].mean()),
    )


def check_assumption4(trace: RunTrace, cert: BoundCertificate, slack: float = DETERMINISTIC_TOL) -> int:
    """Count steps whose learning-rate extrema fall outside the certified interval."""
    below = trace.eta_min < cert.eta_l - slack
    above = trace.eta_max > cert.eta_u + slack
    return int(np.count_nonzero(below | above))
