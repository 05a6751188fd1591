"""First-moment estimation: the unified momentum update and its historical forms.

The driver uses only ``sum_update``: an exponential moving average of
stochastic gradients followed by an interpolation between that average and the
raw gradient. The other recurrences here (two-point heavy ball, the two
Nesterov forms, the gradient-difference estimator, the two-line unified form)
are alternative parameterizations of the same dynamics; ``check_equivalence``
runs a pair side by side on a noiseless problem and reports the worst
trajectory deviation after mapping parameters between them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, Vector
from .oracle import Problem, default_start

PAIRS = ("snag1_snag2", "nme_snag2", "sum2_sum1")


@dataclass
class MomentumState:
    """EMA first moment plus the interpolation weight applied to (m - g)."""

    m: Vector
    beta: float
    lambda_tilde: float

    @classmethod
    def zeros(cls, dim: int, beta: float, lambda_tilde: float) -> "MomentumState":
        if not 0 <= beta < 1:
            raise ConfigurationError(f"beta must lie in [0, 1), got {beta}")
        if not 0 <= lambda_tilde <= 1:
            raise ConfigurationError(f"lambda_tilde must lie in [0, 1], got {lambda_tilde}")
        return cls(m=np.zeros(dim), beta=beta, lambda_tilde=lambda_tilde)


@dataclass
class AltMomentumState:
    """State for the alternative recurrences; ``aux`` holds the previous gradient
    where the variant needs one (zero before the first step, matching m0 = 0)."""

    variant: str
    m_bar: Vector
    aux: Vector | None = None


def sum_update(state: MomentumState, g: Vector) -> tuple[MomentumState, Vector]:
    """One unified-momentum update: new EMA m and the step direction m_bar.

    The endpoints are handled exactly: lambda_tilde 0 returns m itself and
    lambda_tilde 1 returns g itself, bitwise, so endpoint-parity invariants
    hold without rounding slack.
    """
    if g.shape != state.m.shape:
        raise ConfigurationError(f"dimension mismatch: m {state.m.shape} vs g {g.shape}")
    beta, lt = state.beta, state.lambda_tilde
    m_new = beta * state.m + (1.0 - beta) * g
    if lt == 0.0:
        m_bar = m_new
    elif lt == 1.0:
        m_bar = g
    else:
        m_bar = m_new - lt * (m_new - g)
    return MomentumState(m_new, beta, lt), m_bar


def shb_step(x: Vector, x_prev: Vector, g: Vector, alpha: float, beta: float) -> Vector:
    """Two-point heavy-ball recurrence; use x_prev = x before the first step."""
    if x.shape != x_prev.shape or x.shape != g.shape:
        raise ConfigurationError("dimension mismatch in heavy-ball step")
    return x - alpha * g + beta * (x - x_prev)


def snag1_step(
    state: AltMomentumState, x_bar: Vector, grad_fn, alpha: float, beta: float
) -> tuple[AltMomentumState, Vector]:
    """Lookahead-gradient Nesterov step: momentum accumulated at x_bar + beta*m_bar."""
    lookahead = x_bar + beta * state.m_bar
    m_new = beta * state.m_bar - alpha * grad_fn(lookahead)
    return AltMomentumState("snag1", m_new), x_bar + m_new


def snag2_step(m: Vector, x: Vector, g: Vector, eta: float, beta: float) -> tuple[Vector, Vector]:
    """EMA-form Nesterov step: direction beta*m_t + (1-beta)*g_t."""
    m_new = beta * m + (1.0 - beta) * g
    return m_new, x - eta * beta * m_new - eta * (1.0 - beta) * g


def nme_step(
    state: AltMomentumState, x: Vector, g: Vector, eta: float, beta: float
) -> tuple[AltMomentumState, Vector]:
    """Gradient-difference momentum step; state.aux carries the previous gradient."""
    g_prev = state.aux if state.aux is not None else np.zeros_like(g)
    m_new = beta * state.m_bar + (1.0 - beta) * (g + beta * (g - g_prev))
    return AltMomentumState("nme", m_new, aux=g), x - eta * m_new


def sum2_step(
    state: AltMomentumState, x: Vector, g: Vector, eta_t: float, mu: float, lam: float
) -> tuple[AltMomentumState, Vector]:
    """Two-line unified momentum step with raw (stepsize-scaled) momentum."""
    lt = (1.0 - mu) * lam
    if lt < 0 or lt > 1 + 1e-12:
        raise ConfigurationError(f"lambda={lam} with mu={mu} gives lambda_tilde={lt}, outside [0, 1]")
    m_new = mu * state.m_bar - eta_t * g
    return AltMomentumState("sum2", m_new), x - lam * eta_t * g + (1.0 - min(lt, 1.0)) * m_new


def sum1_trajectory(
    problem: Problem, x0: Vector, eta: float, beta: float, lam: float, steps: int
) -> np.ndarray:
    """Noiseless unified-momentum iterates x_1..x_{T+1}, shape (steps+1, dim)."""
    xs = np.empty((steps + 1, problem.dim))
    x = np.array(x0, dtype=np.float64)
    state = MomentumState.zeros(problem.dim, beta, min((1.0 - beta) * lam, 1.0))
    xs[0] = x
    for i in range(steps):
        state, m_bar = sum_update(state, problem.grad(x))
        x = x - eta * m_bar
        xs[i + 1] = x
    return xs


def shb_trajectory(problem: Problem, x0: Vector, alpha: float, beta: float, steps: int) -> np.ndarray:
    """Noiseless two-point heavy-ball iterates, shape (steps+1, dim)."""
    xs = np.empty((steps + 1, problem.dim))
    x_prev = np.array(x0, dtype=np.float64)
    x = x_prev.copy()
    xs[0] = x
    for i in range(steps):
        x, x_prev = shb_step(x, x_prev, problem.grad(x), alpha, beta), x
        xs[i + 1] = x
    return xs


def snag1_trajectory(problem: Problem, x0: Vector, alpha: float, beta: float, steps: int) -> np.ndarray:
    """Lookahead-form Nesterov iterates mapped to the EMA-form coordinates.

    The recorded iterate is x_bar_t + beta*m_bar_{t-1}, the substitution under
    which the two forms coincide; raw x_bar sequences differ by the lookahead
    shift and are not directly comparable.
    """
    xs = np.empty((steps + 1, problem.dim))
    x_bar = np.array(x0, dtype=np.float64)
    state = AltMomentumState("snag1", np.zeros(problem.dim))
    xs[0] = x_bar + beta * state.m_bar
    for i in range(steps):
        state, x_bar = snag1_step(state, x_bar, problem.grad, alpha, beta)
        xs[i + 1] = x_bar + beta * state.m_bar
    return xs


def snag2_trajectory(problem: Problem, x0: Vector, eta: float, beta: float, steps: int) -> np.ndarray:
    xs = np.empty((steps + 1, problem.dim))
    x = np.array(x0, dtype=np.float64)
    m = np.zeros(problem.dim)
    xs[0] = x
    for i in range(steps):
        m, x = snag2_step(m, x, problem.grad(x), eta, beta)
        xs[i + 1] = x
    return xs


def nme_trajectory(problem: Problem, x0: Vector, eta: float, beta: float, steps: int) -> np.ndarray:
    xs = np.empty((steps + 1, problem.dim))
    x = np.array(x0, dtype=np.float64)
    state = AltMomentumState("nme", np.zeros(problem.dim), aux=np.zeros(problem.dim))
    xs[0] = x
    for i in range(steps):
        state, x = nme_step(state, x, problem.grad(x), eta, beta)
        xs[i + 1] = x
    return xs


def sum2_trajectory(
    problem: Problem, x0: Vector, eta_t: float, mu: float, lam: float, steps: int
) -> np.ndarray:
    xs = np.empty((steps + 1, problem.dim))
    x = np.array(x0, dtype=np.float64)
    state = AltMomentumState("sum2", np.zeros(problem.dim))
    xs[0] = x
    for i in range(steps):
        state, x = sum2_step(state, x, problem.grad(x), eta_t, mu, lam)
        xs[i + 1] = x
    return xs


def check_equivalence(
    pair: str,
    problem: Problem,
    steps: int,
    *,
    eta: float,
    beta: float,
    lam: float = 1.0,
    x0: Vector | None = None,
) -> float:
    """Max coordinate deviation between two equivalent recurrences over a run.

    Parameter mappings: the lookahead Nesterov form runs with alpha =
    eta*(1-beta) and is compared through its iterate substitution; the
    two-line unified form runs with stepsize eta*(1-beta) and momentum
    factor beta. ``lam`` only affects the unified-form pair.
    """
    if pair not in PAIRS:
        raise ConfigurationError(f"unknown pair {pair!r}; expected one of {'|'.join(PAIRS)}")
    start = default_start(problem) if x0 is None else np.asarray(x0, dtype=np.float64)
    if start.shape != (problem.dim,):
        raise ConfigurationError(f"x0 has shape {start.shape}, expected ({problem.dim},)")
    if pair == "snag1_snag2":
        a = snag1_trajectory(problem, start, eta * (1.0 - beta), beta, steps)
        b = snag2_trajectory(problem, start, eta, beta, steps)
    elif pair == "nme_snag2":
        a = nme_trajectory(problem, start, eta, beta, steps)
        b = snag2_trajectory(problem, start, eta, beta, steps)
    else:
        a = sum2_trajectory(problem, start, eta * (1.0 - beta), beta, lam, steps)
        b = sum1_trajectory(problem, start, eta, beta, lam, steps)
    return float(np.abs(a - b).max()) if steps else 0.0
