"""The main optimizer loop: sample gradient, momentum update, adaptive rate, step.

One iteration is exactly: stochastic gradient at the current iterate, EMA
first-moment update with interpolation, rule-specific coordinate-wise learning
rate from the gradient history, then ``x <- x - eta_t * m_bar``. The trace
records, per step, the objective, true squared gradient norm, the first-moment
tracking error ``delta_t`` (a synthetic-problem diagnostic; real training has
no access to the true gradient), the learning-rate extrema and the step norm.

A run is strictly sequential; independent runs share only immutable problems
and configs and may execute concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import NumericAbortError, NumericDomainError, RunTrace, UAdamConfig, Vector, norm_sq
from .lr_rules import LrRuleState, lr_update
from .momentum import MomentumState, sum_update
from .oracle import NoiseModel, Problem, default_start


@dataclass
class OptimizerRun:
    """Mutable run state: current iterate, momentum and rule state, trace buffers."""

    config: UAdamConfig
    x: Vector
    momentum: MomentumState
    lr_state: LrRuleState
    t: int = 0
    grad_bound_violations: int = 0
    record_vectors: bool = False
    _trace: dict = field(default_factory=dict, repr=False)

    def trace(self, completed: bool = True) -> RunTrace:
        """Snapshot the first ``t`` recorded steps as an immutable trace."""
        n = self.t
        buf = self._trace
        return RunTrace(
            t=buf["t"][:n].copy(),
            f=buf["f"][:n].copy(),
            grad_norm_sq=buf["grad_norm_sq"][:n].copy(),
            delta_t=buf["delta_t"][:n].copy(),
            eta_min=buf["eta_min"][:n].copy(),
            eta_max=buf["eta_max"][:n].copy(),
            step_norm=buf["step_norm"][:n].copy(),
            grad_bound_violations=self.grad_bound_violations,
            completed=completed,
            x_hist=buf.get("x_hist", [])[:n],
            m_hist=buf.get("m_hist", [])[:n],
            grad_hist=buf.get("grad_hist", [])[:n],
        )


def start_run(
    config: UAdamConfig,
    problem: Problem,
    x0: Vector | None = None,
    record_vectors: bool = False,
) -> OptimizerRun:
    """Set up a run at ``x0`` (problem default start if omitted) with zero moments."""
    x = default_start(problem) if x0 is None else np.array(x0, dtype=np.float64)
    if x.shape != (problem.dim,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({problem.dim},)")
    T = config.max_steps
    buf = {name: np.empty(T) for name in RunTrace.COLUMNS if name != "t"}
    buf["t"] = np.empty(T, dtype=np.int64)
    if record_vectors:
        buf["x_hist"] = []
        buf["m_hist"] = []
        buf["grad_hist"] = []
    return OptimizerRun(
        config=config,
        x=x,
        momentum=MomentumState.zeros(problem.dim, config.beta, config.lambda_tilde),
        lr_state=LrRuleState.from_config(config, problem.dim),
        record_vectors=record_vectors,
        _trace=buf,
    )


def step(run: OptimizerRun, problem: Problem, noise: NoiseModel) -> OptimizerRun:
    """Advance the run by one iteration; aborts on a non-finite iterate."""
    config = run.config
    if run.t >= config.max_steps:
        raise ValueError(f"run already completed {run.t} of {config.max_steps} steps")
    t = run.t + 1
    x = run.x

    try:
        true_grad = problem.grad(x)
        g = noise.apply(true_grad, t)
        if config.grad_bound is not None:
            limit = config.grad_bound / 3.0 if config.rule == "adan" else config.grad_bound
            if np.abs(g).max() > limit:
                run.grad_bound_violations += 1
        run.momentum, m_bar = sum_update(run.momentum, g)
        run.lr_state, eta_t = lr_update(run.lr_state, g, config.eta)
    except (NumericDomainError, RuntimeError) as err:
        # sub-module numeric failures surface with the step index attached;
        # the partial trace holds the fully recorded steps before this one
        raise NumericAbortError(
            f"step {t}: {err}", step=t, trace=run.trace(completed=False)
        ) from err
    x_new = x - eta_t * m_bar

    buf = run._trace
    i = t - 1
    buf["t"][i] = t
    buf["f"][i] = problem.f(x)
    buf["grad_norm_sq"][i] = norm_sq(true_grad)
    buf["delta_t"][i] = norm_sq(run.momentum.m - true_grad)
    buf["eta_min"][i] = eta_t.min()
    buf["eta_max"][i] = eta_t.max()
    buf["step_norm"][i] = float(np.sqrt(norm_sq(x_new - x)))
    if run.record_vectors:
        buf["x_hist"].append(x.copy())
        buf["m_hist"].append(run.momentum.m.copy())
        buf["grad_hist"].append(true_grad.copy())

    run.t = t
    run.x = x_new
    if not np.all(np.isfinite(x_new)):
        raise NumericAbortError(
            f"non-finite iterate produced at step {t}", step=t, trace=run.trace(completed=False)
        )
    return run


def run_to_completion(
    config: UAdamConfig,
    problem: Problem,
    noise: NoiseModel,
    x0: Vector | None = None,
    record_vectors: bool = False,
) -> RunTrace:
    """Execute all ``config.max_steps`` iterations and return the trace.

    There is no stopping rule other than the horizon: the convergence metric
    is a whole-horizon average and early stopping would bias it. An abort
    mid-run raises with the partial trace attached.
    """
    run = start_run(config, problem, x0, record_vectors=record_vectors)
    for _ in range(config.max_steps):
        step(run, problem, noise)
    return run.trace()
