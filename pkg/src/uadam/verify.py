"""Built-in verification suites with fixed grids, used by the command line.

Four suites: momentum-form trajectory equivalences, learning-rate bound
certificates under random compliant streams, the first-moment variance
recursion along noiseless runs, and the hyperparameter condition validator
(including infeasible points, for which "infeasible" is a valid verdict, not
a failure). Every check result carries the parameters needed to reproduce it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import UAdamConfig, sgd_lambda
from .diagnostics import (
    ConvergenceConditions,
    check_run_variance_recursion,
    validate_convergence_conditions,
)
from .driver import run_to_completion
from .lr_rules import LrRuleState, bound_certificate, lr_update
from .momentum import PAIRS, check_equivalence
from .oracle import NoiseModel, make_problem

EQUIVALENCE_TOL = 1e-9
RECURSION_TOL = 1e-12

SUITE_NAMES = ("equivalence", "bounds", "lemma1", "conditions")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def equivalence_suite(steps: int = 200) -> list[CheckResult]:
    """Trajectory agreement of each equivalent-form pair over a (beta, lam) grid."""
    problems = [
        (make_problem("quadratic", 2, diag=(1.0, 10.0)), 0.05),
        (make_problem("rosenbrock", 2), 1e-3),
    ]
    results = []
    for problem, eta in problems:
        for beta in (0.5, 0.9, 0.99):
            for pair in PAIRS:
                lams = (0.0, 1.0) if pair == "sum2_sum1" else (None,)
                for lam in lams:
                    kwargs = {} if lam is None else {"lam": lam}
                    dev = check_equivalence(pair, problem, steps, eta=eta, beta=beta, **kwargs)
                    label = f"{pair}[{problem.name} beta={beta}" + (
                        f" lam={lam}]" if lam is not None else "]"
                    )
                    results.append(
                        CheckResult(
                            "equivalence", label, dev <= EQUIVALENCE_TOL,
                            f"max deviation {dev:.3e} over {steps} steps (eta={eta})",
                        )
                    )
    return results


_BOUND_SUITE_PARAMS = {
    "const": {},
    "adam": {"beta2": 0.9, "epsilon": 1e-8},
    "amsgrad": {"beta2": 0.9, "epsilon": 1e-8},
    "adafom": {"epsilon": 1e-8},
    "adabound": {"beta2": 0.9, "clip_lo": 0.5, "clip_hi": 2.0},
    "yogi": {"beta2": 0.9, "epsilon": 1e-8},
    "adaema": {"epsilon": 1e-8},
    "adan": {"beta2": 0.9, "epsilon": 1e-8, "beta1": 0.9},
    "sadam": {"beta2": 0.9, "theta": 10.0},
}


def bounds_suite(
    n_streams: int = 10_000, length: int = 100, grad_bound: float = 10.0,
    eta: float = 0.01, stream_seed: int = 0,
) -> list[CheckResult]:
    """Zero certified-interval violations over random sup-norm-compliant streams.

    All rules act coordinate-wise, so the streams run as one wide state with
    one independent stream per coordinate. The first steps pin the edge cases:
    an all-zero gradient, then both extremes of the allowed range.
    """
    results = []
    for rule, params in _BOUND_SUITE_PARAMS.items():
        cert_params = {
            k: v for k, v in params.items() if k in ("epsilon", "clip_lo", "clip_hi", "theta")
        }
        cert = bound_certificate(rule, eta, grad_bound=grad_bound, **cert_params)
        limit = min(cert.grad_precondition, grad_bound)
        state = LrRuleState.initial(rule, n_streams, **params)
        rng = np.random.default_rng(stream_seed)
        violations = 0
        for t in range(length):
            if t == 0:
                g = np.zeros(n_streams)
            elif t == 1:
                g = np.full(n_streams, limit)
            elif t == 2:
                g = np.full(n_streams, -limit)
            else:
                g = rng.uniform(-limit, limit, size=n_streams)
            state, eta_t = lr_update(state, g, eta)
            violations += int(
                np.count_nonzero((eta_t < cert.eta_l - 1e-12) | (eta_t > cert.eta_u + 1e-12))
            )
        results.append(
            CheckResult(
                "bounds", rule, violations == 0,
                f"{n_streams} streams x {length} steps, ||g||_inf<={limit:g}, "
                f"interval [{cert.eta_l:.3e}, {cert.eta_u:.3e}], {violations} violations",
            )
        )
    return results


def lemma1_suite(steps: int = 1000) -> list[CheckResult]:
    """Variance-recursion slack at every step of noiseless runs over the config grid."""
    problem = make_problem("quadratic", 2, diag=(1.0, 10.0))
    noiseless = NoiseModel()
    results = []
    for beta in (0.5, 0.9, 0.99):
        for lam in (0.0, 1.0, sgd_lambda(beta)):
            for rule in ("const", "adam"):
                if rule == "const":
                    cfg = UAdamConfig(eta=0.02, beta=beta, lam=lam, rule="const", max_steps=steps)
                else:
                    cfg = UAdamConfig(
                        eta=0.01, beta=beta, lam=lam, rule="adam", beta2=0.999, epsilon=1e-8,
                        max_steps=steps,
                    )
                trace = run_to_completion(
                    cfg, problem, noiseless, x0=np.ones(2), record_vectors=True
                )
                reports = check_run_variance_recursion(trace, beta, problem.lipschitz_L, problem)
                worst = min(r.slack for r in reports)
                results.append(
                    CheckResult(
                        "lemma1",
                        f"{rule}[beta={beta} lam={lam:g}]",
                        worst >= -RECURSION_TOL,
                        f"min slack {worst:.3e} over {steps} noiseless steps",
                    )
                )
    return results


def conditions_suite() -> list[CheckResult]:
    """Self-checks of the condition validator on constructed points.

    Feasible points are built by backing parameters off the analytic caps, so
    the validator must accept them; violated points double one cap, so it must
    flag exactly that constraint; the infeasible point must be reported as
    having an empty momentum range (a valid verdict).
    """
    results = []

    def construct(L, K, d1, lam):
        cap = min(1.0 / (2.0 * (2.0 + lam) * d1 * K), 1.0) if d1 > 0 else 1.0
        beta = 1.0 - 0.9 * cap
        caps = [1.0 / (2.0 * K * L), (1.0 - beta) / (2.0 * L * math.sqrt(K))]
        if d1 > 0:
            caps.append(1.0 / (2.0 * L * math.sqrt(2.0 * K * d1)))
        eta_u = 0.9 * min(caps)
        return ConvergenceConditions(
            eta_l=eta_u / K, eta_u=eta_u, L=L, d0=0.0, d1=d1, beta=beta, lam=lam
        )

    for L, K, d1, lam in [(1.0, 2.0, 1.0, 0.0), (10.0, 1.5, 0.5, 1.0), (2.0, 3.0, 0.0, 0.5)]:
        tc = construct(L, K, d1, lam)
        report = validate_convergence_conditions(tc)
        ok = report.satisfied and report.k_form_satisfied
        results.append(
            CheckResult(
                "conditions", f"feasible[L={L} K={K} d1={d1} lam={lam}]", ok,
                f"satisfied={report.satisfied} ratio-form={report.k_form_satisfied} "
                f"(beta={tc.beta:.4f}, eta_u={tc.eta_u:.3e})",
            )
        )

    # momentum floor doubled: exactly the momentum constraints must trip
    base = construct(1.0, 2.0, 1.0, 0.0)
    bad_beta = ConvergenceConditions(
        eta_l=base.eta_l, eta_u=base.eta_u, L=1.0, d0=0.0, d1=1.0,
        beta=1.0 - min(2.0 * (1.0 - base.beta), 0.999), lam=0.0,
    )
    report = validate_convergence_conditions(bad_beta)
    ok = (not report.satisfied) and "k_one_minus_beta" in report.violated
    results.append(
        CheckResult(
            "conditions", "violated[momentum floor]", ok,
            f"violated={list(report.violated)}",
        )
    )

    # stepsize cap doubled: an eta_u constraint must trip
    bad_eta = ConvergenceConditions(
        eta_l=base.eta_l * 3.0, eta_u=base.eta_u * 3.0, L=1.0, d0=0.0, d1=1.0,
        beta=base.beta, lam=0.0,
    )
    report = validate_convergence_conditions(bad_eta)
    ok = (not report.satisfied) and any("eta_u" in name for name in report.violated)
    results.append(
        CheckResult(
            "conditions", "violated[stepsize cap]", ok,
            f"violated={list(report.violated)}",
        )
    )

    # empty momentum range: no beta can work at this (eta_u, K, d1)
    infeasible = ConvergenceConditions(
        eta_l=0.01 / 50.0, eta_u=0.01, L=1.0, d0=0.0, d1=5.0, beta=0.9, lam=0.0
    )
    report = validate_convergence_conditions(infeasible)
    scan_all_fail = all(
        not validate_convergence_conditions(
            ConvergenceConditions(
                eta_l=infeasible.eta_l, eta_u=infeasible.eta_u, L=1.0, d0=0.0, d1=5.0,
                beta=b, lam=0.0,
            )
        ).k_form_satisfied
        for b in (0.1, 0.5, 0.9, 0.99, 0.9999)
    )
    ok = (not report.beta_feasible) and scan_all_fail
    results.append(
        CheckResult(
            "conditions", "infeasible[K=50 d1=5]", ok,
            "infeasible (valid verdict): empty momentum range confirmed by scan",
        )
    )
    return results


SUITES = {
    "equivalence": equivalence_suite,
    "bounds": bounds_suite,
    "lemma1": lemma1_suite,
    "conditions": conditions_suite,
}


def run_suite(name: str) -> list[CheckResult]:
    if name == "all":
        out = []
        for suite_name in SUITE_NAMES:
            out.extend(SUITES[suite_name]())
        return out
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITE_NAMES)} or all")
    return SUITES[name]()
