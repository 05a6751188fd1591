import math

import numpy as np
import pytest

from uadam.core import ConfigurationError, RunTrace, UAdamConfig, as_vector
from uadam.diagnostics import (
    ConvergenceConditions,
    check_assumption4,
    check_run_variance_recursion,
    check_variance_recursion_deterministic,
    check_variance_recursion_stochastic,
    convergence_summary,
    validate_convergence_conditions,
)
from uadam.driver import run_to_completion
from uadam.lr_rules import BoundCertificate
from uadam.oracle import NoiseModel, Problem, make_problem

QUAD = make_problem("quadratic", 2, diag=(1.0, 10.0))
NOISELESS = NoiseModel()


def trace_of(grad_norm_sq, eta_min=None, eta_max=None):
    n = len(grad_norm_sq)
    g = np.asarray(grad_norm_sq, dtype=np.float64)
    ones = np.ones(n)
    return RunTrace(
        t=np.arange(1, n + 1), f=np.zeros(n), grad_norm_sq=g, delta_t=np.zeros(n),
        eta_min=np.asarray(eta_min if eta_min is not None else ones, dtype=np.float64),
        eta_max=np.asarray(eta_max if eta_max is not None else ones, dtype=np.float64),
        step_norm=np.zeros(n),
    )


class TestDeterministicRecursion:
    def test_beta_zero_slack_zero(self):
        x = as_vector([1.0, 1.0])
        m = QUAD.grad(x)  # with beta=0 the moment is the gradient itself
        report = check_variance_recursion_deterministic(x, x, np.zeros(2), m, 0.0, 10.0, QUAD)
        assert report.lhs == 0.0 and report.rhs == 0.0 and report.passed

    def test_affine_objective_contracts_by_beta_squared(self):
        """Constant gradient: lhs shrinks by beta^2 while rhs allows beta."""
        c = as_vector([2.0, -1.0])
        affine = Problem("affine", 2, f=lambda x: float(c @ x), grad=lambda x: c.copy(),
                         lipschitz_L=1e-9, f_star=-math.inf)
        beta = 0.9
        m_prev = as_vector([1.0, 1.0])
        m = beta * m_prev + (1 - beta) * c
        report = check_variance_recursion_deterministic(
            np.zeros(2), as_vector([0.5, 0.5]), m_prev, m, beta, affine.lipschitz_L, affine
        )
        prev_err = float(np.sum((m_prev - c) ** 2))
        assert report.lhs == pytest.approx(beta**2 * prev_err, rel=1e-12)
        assert report.slack == pytest.approx((beta - beta**2) * prev_err, rel=1e-9)
        assert report.passed

    def test_beta_one_rejected(self):
        with pytest.raises(ConfigurationError):
            check_variance_recursion_deterministic(
                np.zeros(2), np.zeros(2), np.zeros(2), np.zeros(2), 1.0, 1.0, QUAD
            )

    @pytest.mark.parametrize("beta", [0.5, 0.9, 0.99])
    def test_full_noiseless_run_every_step(self, beta):
        cfg = UAdamConfig(eta=0.02, beta=beta, lam=0.0, rule="const", max_steps=1000)
        trace = run_to_completion(cfg, QUAD, NOISELESS, x0=as_vector([1.0, 1.0]),
                                  record_vectors=True)
        reports = check_run_variance_recursion(trace, beta, QUAD.lipschitz_L, QUAD)
        assert len(reports) == 1000
        assert min(r.slack for r in reports) >= -1e-12
        assert all(r.passed for r in reports)

    def test_requires_recorded_vectors(self):
        cfg = UAdamConfig(eta=0.02, beta=0.5, lam=0.0, rule="const", max_steps=5)
        trace = run_to_completion(cfg, QUAD, NOISELESS)
        with pytest.raises(ConfigurationError):
            check_run_variance_recursion(trace, 0.5, QUAD.lipschitz_L, QUAD)


class TestStochasticRecursion:
    STATE = (as_vector([1.1, 0.9]), as_vector([1.0, 1.0]), as_vector([0.5, 2.0]))

    def test_noiseless_degenerates_to_deterministic(self):
        x_prev, x, m_prev = self.STATE
        beta = 0.9
        m = beta * m_prev + (1 - beta) * QUAD.grad(x)
        det = check_variance_recursion_deterministic(
            x_prev, x, m_prev, m, beta, QUAD.lipschitz_L, QUAD
        )
        sto = check_variance_recursion_stochastic(
            x_prev, x, m_prev, beta, QUAD.lipschitz_L, QUAD, NOISELESS, n_samples=100
        )
        assert sto.stderr <= 1e-12  # identical samples, only mean-rounding residue
        assert sto.lhs == pytest.approx(det.lhs, rel=1e-12)
        assert sto.slack == pytest.approx(det.slack, rel=1e-12)
        assert sto.passed == det.passed

    def test_additive_noise_passes(self):
        x_prev, x, m_prev = self.STATE
        noise = NoiseModel(d0=1.0, d1=0.0, seed=3)
        report = check_variance_recursion_stochastic(
            x_prev, x, m_prev, 0.9, QUAD.lipschitz_L, QUAD, noise, n_samples=100_000
        )
        assert report.passed
        assert report.stderr > 0

    def test_flipped_form_also_passes_and_tightness_reported(self):
        x_prev, x, m_prev = self.STATE
        noise = NoiseModel(d0=1.0, d1=0.0, seed=3)
        standard = check_variance_recursion_stochastic(
            x_prev, x, m_prev, 0.9, QUAD.lipschitz_L, QUAD, noise, n_samples=100_000
        )
        flipped = check_variance_recursion_stochastic(
            x_prev, x, m_prev, 0.9, QUAD.lipschitz_L, QUAD, noise, n_samples=100_000,
            form="flipped",
        )
        assert standard.passed and flipped.passed
        # both are valid upper bounds; their relative tightness is data, not a claim
        assert math.isfinite(flipped.rhs - standard.rhs)

    def test_flipped_form_needs_positive_beta(self):
        x_prev, x, m_prev = self.STATE
        with pytest.raises(ConfigurationError):
            check_variance_recursion_stochastic(
                x_prev, x, m_prev, 0.0, 10.0, QUAD, NOISELESS, n_samples=10, form="flipped"
            )

    def test_unknown_form(self):
        x_prev, x, m_prev = self.STATE
        with pytest.raises(ConfigurationError):
            check_variance_recursion_stochastic(
                x_prev, x, m_prev, 0.5, 10.0, QUAD, NOISELESS, n_samples=10, form="wide"
            )


class TestConvergenceConditions:
    def test_d1_zero_makes_noise_constraints_vacuous(self):
        tc = ConvergenceConditions(eta_l=0.001, eta_u=0.001, L=1.0, d0=1.0, d1=0.0,
                                   beta=0.0, lam=0.0)
        report = validate_convergence_conditions(tc)
        by_name = {c.name: c for c in report.checks}
        assert by_name["one_minus_beta"].bound == 1.0
        assert math.isinf(by_name["eta_u_vs_noise_curvature"].bound)

    def test_ratio_form_point_direct_substitution(self):
        """L=1, K=2, D1=1, lam=0: eta_u caps are {1/4, (1-beta)/(2*sqrt(2)), 1/4} and
        the momentum floor is 1-beta <= 1/8."""
        beta = 0.9375  # 1-beta = 1/16 <= 1/8
        eta_u = min(0.25, (1 - beta) / (2 * math.sqrt(2)), 0.25) * 0.9
        tc = ConvergenceConditions(eta_l=eta_u / 2, eta_u=eta_u, L=1.0, d0=0.0, d1=1.0,
                                   beta=beta, lam=0.0)
        report = validate_convergence_conditions(tc)
        by_name = {c.name: c for c in report.checks}
        assert by_name["k_one_minus_beta"].bound == pytest.approx(1.0 / 8.0)
        assert by_name["k_eta_u_vs_noise_curvature"].bound == pytest.approx(0.25)
        assert by_name["k_eta_u_vs_curvature"].bound == pytest.approx(0.25)
        assert by_name["k_eta_u_vs_momentum"].bound == pytest.approx(
            (1 - beta) / (2 * math.sqrt(2))
        )
        assert report.k_form_satisfied and report.satisfied

    def test_low_beta_violates_momentum_floor(self):
        tc = ConvergenceConditions(eta_l=0.01, eta_u=0.02, L=1.0, d0=0.0, d1=1.0,
                                   beta=0.5, lam=0.0)
        report = validate_convergence_conditions(tc)
        assert "k_one_minus_beta" in report.violated
        assert "one_minus_beta" in report.violated
        assert not report.satisfied

    def test_base_and_ratio_forms_agree(self):
        """The two formulations are algebraically the same constraints."""
        rng = np.random.default_rng(8)
        for _ in range(200):
            eta_l = 10.0 ** rng.uniform(-5, -1)
            tc = ConvergenceConditions(
                eta_l=eta_l, eta_u=eta_l * 10.0 ** rng.uniform(0, 2),
                L=10.0 ** rng.uniform(-1, 2), d0=0.0, d1=10.0 ** rng.uniform(-2, 1),
                beta=rng.uniform(0, 1), lam=rng.choice([0.0, 0.5, 1.0]),
            )
            report = validate_convergence_conditions(tc)
            assert report.satisfied == report.k_form_satisfied

    def test_monotone_in_eta_u_and_d1(self):
        """Raising eta_u or d1 never turns a violated constraint satisfied."""
        rng = np.random.default_rng(9)
        for _ in range(200):
            eta_l = 10.0 ** rng.uniform(-5, -2)
            base = dict(
                eta_l=eta_l, eta_u=eta_l * 10.0 ** rng.uniform(0, 2),
                L=10.0 ** rng.uniform(-1, 1), d0=0.0, d1=10.0 ** rng.uniform(-2, 1),
                beta=rng.uniform(0.0, 0.999), lam=rng.choice([0.0, 1.0]),
            )
            before = {
                c.name: c.satisfied
                for c in validate_convergence_conditions(ConvergenceConditions(**base)).checks
            }
            worse = dict(base)
            worse["eta_u"] = base["eta_u"] * rng.uniform(1.0, 4.0)
            worse["d1"] = base["d1"] * rng.uniform(1.0, 4.0)
            after = {
                c.name: c.satisfied
                for c in validate_convergence_conditions(ConvergenceConditions(**worse)).checks
            }
            for name, ok_before in before.items():
                if not ok_before:
                    assert not after[name], f"{name} flipped to satisfied"

    def test_infeasible_beta_interval_reported(self):
        tc = ConvergenceConditions(eta_l=0.01 / 50, eta_u=0.01, L=1.0, d0=0.0, d1=5.0,
                                   beta=0.9, lam=0.0)
        report = validate_convergence_conditions(tc)
        assert not report.beta_feasible
        assert report.beta_interval is None

    def test_feasible_beta_interval_contains_feasible_point(self):
        tc = ConvergenceConditions(eta_l=0.001, eta_u=0.002, L=1.0, d0=0.0, d1=1.0,
                                   beta=0.99, lam=0.0)
        report = validate_convergence_conditions(tc)
        assert report.beta_feasible
        lo, hi = report.beta_interval
        mid = 0.5 * (lo + hi)
        inner = validate_convergence_conditions(
            ConvergenceConditions(eta_l=0.001, eta_u=0.002, L=1.0, d0=0.0, d1=1.0,
                                  beta=mid, lam=0.0)
        )
        assert inner.k_form_satisfied

    def test_invalid_inputs(self):
        with pytest.raises(ConfigurationError):
            ConvergenceConditions(eta_l=0.0, eta_u=1.0, L=1.0, d0=0.0, d1=0.0, beta=0.5, lam=0.0)
        with pytest.raises(ConfigurationError):
            ConvergenceConditions(eta_l=0.1, eta_u=1.0, L=-1.0, d0=0.0, d1=0.0, beta=0.5, lam=0.0)


class TestConvergenceSummary:
    def test_all_zero_gradients(self):
        s = convergence_summary(trace_of(np.zeros(20)))
        assert s.avg_grad_sq == s.min_grad_sq == s.plateau == 0.0

    def test_single_step(self):
        s = convergence_summary(trace_of([4.0]))
        assert s.avg_grad_sq == s.min_grad_sq == s.plateau == 4.0

    def test_plateau_uses_final_tenth(self):
        values = np.concatenate([np.full(90, 5.0), np.full(10, 1.0)])
        s = convergence_summary(trace_of(values))
        assert s.plateau == 1.0
        assert s.avg_grad_sq == pytest.approx(4.6)
        assert s.min_grad_sq == 1.0

    def test_empty_trace_errors(self):
        with pytest.raises(ConfigurationError):
            convergence_summary(RunTrace.empty())


class TestAssumption4Counting:
    def test_const_rule_never_violates(self):
        cert = BoundCertificate(eta_l=1.0, eta_u=1.0)
        assert check_assumption4(trace_of(np.zeros(50)), cert) == 0

    def test_counts_excursions_on_both_sides(self):
        cert = BoundCertificate(eta_l=0.5, eta_u=2.0)
        trace = trace_of(
            np.zeros(4),
            eta_min=[0.6, 0.4, 0.7, 0.9],
            eta_max=[1.0, 1.0, 2.5, 2.0],
        )
        assert check_assumption4(trace, cert) == 2

    def test_rounding_slack(self):
        cert = BoundCertificate(eta_l=1.0, eta_u=1.0)
        trace = trace_of(np.zeros(1), eta_min=[1.0 - 1e-13], eta_max=[1.0 + 1e-13])
        assert check_assumption4(trace, cert) == 0

    def test_stream_exceeding_bound_breaks_certificate(self):
        """A gradient at twice the certified bound drives the rate below eta_l,
        and the run records the precondition breach without aborting."""
        from uadam.core import UAdamConfig
        from uadam.lr_rules import bound_certificate_from_config
        from uadam.oracle import NoiseModel, make_problem

        G = 1.0
        cfg = UAdamConfig(
            eta=0.01, beta=0.0, lam=0.0, rule="adam", beta2=0.5, epsilon=1e-8,
            grad_bound=G, max_steps=30,
        )
        # steep quadratic from x=1: gradients start at 2G and stay above G a while
        steep = make_problem("quadratic", 1, diag=(2.0,))
        trace = run_to_completion(cfg, steep, NoiseModel(), x0=as_vector([1.0]))
        assert trace.completed
        assert trace.grad_bound_violations > 0
        cert = bound_certificate_from_config(cfg)
        assert check_assumption4(trace, cert) > 0
