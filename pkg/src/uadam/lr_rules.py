"""Adaptive learning-rate rules and their analytic bound certificates.

Each rule maps the gradient history to a coordinate-wise learning rate via a
one-step recurrence on a second-moment accumulator v (stored as v, with the
square root taken only when the rate is emitted). For a gradient stream with
bounded sup-norm, every rule's rate stays inside an analytic interval
[eta_l, eta_u]; ``bound_certificate`` returns that interval together with the
gradient precondition under which it is certified.

No bias correction anywhere: the recurrences are used raw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RULE_PARAM_SPEC, RULES, ConfigurationError, UAdamConfig, Vector

LOG2 = math.log(2.0)


def softplus(x, theta: float):
    """log(1 + exp(theta*x))/theta, evaluated stably for large theta*x."""
    z = theta * np.asarray(x, dtype=np.float64)
    return (np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))) / theta


def _stable_log1pexp(z: float) -> float:
    # log(1 + exp(z)) without overflow
    return max(z, 0.0) + math.log1p(math.exp(-abs(z)))


def scheme_weight(scheme: str, i: int) -> float:
    """Per-step weight for the weighted-average rule: uniform or poly:p (w_i = i**p)."""
    if scheme == "uniform":
        return 1.0
    if scheme.startswith("poly:"):
        return float(i) ** float(scheme[5:])
    raise ConfigurationError(f"unknown weight scheme {scheme!r}; expected uniform or poly:<p>")


@dataclass(frozen=True)
class BoundCertificate:
    """Analytic bounds eta_l <= eta_t_i <= eta_u, valid while the gradient
    stream keeps ||g||_inf within ``grad_precondition``."""

    eta_l: float
    eta_u: float
    grad_bound: float | None = None
    grad_precondition: float = math.inf

    def __post_init__(self):
        if not 0 < self.eta_l <= self.eta_u:
            raise ConfigurationError(
                f"certificate requires 0 < eta_l <= eta_u, got ({self.eta_l}, {self.eta_u})"
            )


@dataclass
class LrRuleState:
    """Accumulator state for one rule: v, optional pre-max/pre-clip accumulator,
    previous gradient, running weight sum and step counter."""

    rule: str
    v: Vector
    step: int = 0
    v_bar: Vector | None = None
    g_prev: Vector | None = None
    weight_sum: float = 0.0
    beta2: float | None = None
    epsilon: float | None = None
    clip_lo: float | None = None
    clip_hi: float | None = None
    theta: float | None = None
    weights: str = "uniform"
    beta1: float | None = None

    @classmethod
    def initial(cls, rule: str, dim: int, **params) -> "LrRuleState":
        if rule not in RULE_PARAM_SPEC:
            raise ConfigurationError(f"unknown rule {rule!r}; expected one of {'|'.join(RULES)}")
        required, optional = RULE_PARAM_SPEC[rule]
        given = {k for k, v in params.items() if v is not None}
        if rule == "adan" and "beta1" not in given:
            raise ConfigurationError("adan state requires a resolved beta1")
        missing = required - given
        if missing:
            raise ConfigurationError(f"rule {rule!r} requires parameters {sorted(missing)}")
        extra = given - required - optional
        if extra:
            raise ConfigurationError(f"rule {rule!r} does not use parameters {sorted(extra)}")
        state = cls(rule=rule, v=np.zeros(dim), **{k: params[k] for k in given})
        if rule == "amsgrad" or rule == "adabound":
            state.v_bar = np.zeros(dim)
        if rule == "adan":
            state.g_prev = np.zeros(dim)
        if rule == "adaema":
            scheme_weight(state.weights, 1)  # validate the scheme string early
        return state

    @classmethod
    def from_config(cls, config: UAdamConfig, dim: int) -> "LrRuleState":
        params = dict(
            beta2=config.beta2, epsilon=config.epsilon, clip_lo=config.clip_lo,
            clip_hi=config.clip_hi, theta=config.theta,
        )
        if config.rule == "adaema":
            params["weights"] = config.weights or "uniform"
        if config.rule == "adan":
            params["beta1"] = config.resolved_beta1()
        return cls.initial(config.rule, dim, **{k: v for k, v in params.items() if v is not None})


def _evolved(state: "LrRuleState", **changes) -> "LrRuleState":
    # dataclasses.replace is too slow for the per-step hot path
    new = LrRuleState.__new__(LrRuleState)
    new.__dict__.update(state.__dict__)
    new.__dict__.update(changes)
    return new


def _update_const(state, g, eta):
    return _evolved(state, step=state.step + 1), np.full(g.shape, eta)


def _update_adam(state, g, eta):
    v = state.beta2 * state.v + (1.0 - state.beta2) * (g * g)
    return _evolved(state, v=v, step=state.step + 1), eta / (np.sqrt(v) + state.epsilon)


def _update_amsgrad(state, g, eta):
    v_bar = state.beta2 * state.v_bar + (1.0 - state.beta2) * (g * g)
    v = np.maximum(state.v, v_bar)
    return _evolved(state, v=v, v_bar=v_bar, step=state.step + 1), eta / (np.sqrt(v) + state.epsilon)


def _update_adafom(state, g, eta):
    t = state.step + 1
    v = (state.step * state.v + g * g) / t
    return _evolved(state, v=v, step=t), eta / (np.sqrt(v) + state.epsilon)


def _update_adabound(state, g, eta):
    v_bar = state.beta2 * state.v_bar + (1.0 - state.beta2) * (g * g)
    v = np.clip(v_bar, 1.0 / state.clip_hi**2, 1.0 / state.clip_lo**2)
    return _evolved(state, v=v, v_bar=v_bar, step=state.step + 1), eta / np.sqrt(v)


def _update_yogi(state, g, eta):
    g_sq = g * g
    v = state.v - (1.0 - state.beta2) * np.sign(state.v - g_sq) * g_sq
    if np.any(v < 0):
        raise RuntimeError("internal invariant violated: negative second-moment coordinate")
    return _evolved(state, v=v, step=state.step + 1), eta / (np.sqrt(v) + state.epsilon)


def _update_adaema(state, g, eta):
    t = state.step + 1
    w = scheme_weight(state.weights, t)
    new_sum = state.weight_sum + w
    v = (state.weight_sum * state.v + w * (g * g)) / new_sum
    return _evolved(state, v=v, step=t, weight_sum=new_sum), eta / (np.sqrt(v) + state.epsilon)


def _update_adan(state, g, eta):
    inner = g + (1.0 - state.beta1) * (g - state.g_prev)
    v = (1.0 - state.beta2) * state.v + state.beta2 * (inner * inner)
    return _evolved(state, v=v, g_prev=g, step=state.step + 1), eta / (np.sqrt(v) + state.epsilon)


def _update_sadam(state, g, eta):
    v = state.beta2 * state.v + (1.0 - state.beta2) * (g * g)
    return _evolved(state, v=v, step=state.step + 1), eta / softplus(np.sqrt(v), state.theta)


_UPDATES = {
    "const": _update_const,
    "adam": _update_adam,
    "amsgrad": _update_amsgrad,
    "adafom": _update_adafom,
    "adabound": _update_adabound,
    "yogi": _update_yogi,
    "adaema": _update_adaema,
    "adan": _update_adan,
    "sadam": _update_sadam,
}


def lr_update(state: LrRuleState, g: Vector, eta: float) -> tuple[LrRuleState, Vector]:
    """Advance the rule one step and return the coordinate-wise learning rate."""
    if g.shape != state.v.shape:
        raise ConfigurationError(f"dimension mismatch: v {state.v.shape} vs g {g.shape}")
    new_state, eta_t = _UPDATES[state.rule](state, g, eta)
    if not np.all(eta_t > 0):
        raise RuntimeError("internal invariant violated: nonpositive learning-rate coordinate")
    return new_state, eta_t


def bound_certificate(
    rule: str,
    eta: float,
    *,
    epsilon: float | None = None,
    grad_bound: float | None = None,
    clip_lo: float | None = None,
    clip_hi: float | None = None,
    theta: float | None = None,
) -> BoundCertificate:
    """Analytic (eta_l, eta_u) for a rule, plus the sup-norm gradient precondition.

    The adan certificate is the common epsilon-rule interval but only holds
    for streams with ||g||_inf <= G/3, recorded in ``grad_precondition``.
    """
    if eta <= 0:
        raise ConfigurationError(f"eta must be positive, got {eta}")
    if rule == "const":
        return BoundCertificate(eta, eta)
    if rule == "adabound":
        if clip_lo is None or clip_hi is None:
            raise ConfigurationError("adabound certificate requires clip_lo and clip_hi")
        if not 0 < clip_lo < clip_hi:
            raise ConfigurationError("adabound requires 0 < clip_lo < clip_hi")
        return BoundCertificate(eta * clip_lo, eta * clip_hi)
    if rule not in RULE_PARAM_SPEC:
        raise ConfigurationError(f"unknown rule {rule!r}; expected one of {'|'.join(RULES)}")
    if grad_bound is None or grad_bound <= 0:
        raise ConfigurationError(f"{rule} certificate requires a positive grad_bound")
    G = grad_bound
    if rule == "sadam":
        if theta is None or theta <= 0:
            raise ConfigurationError("sadam certificate requires a positive theta")
        return BoundCertificate(
            eta * theta / _stable_log1pexp(theta * G),
            eta * theta / LOG2,
            grad_bound=G,
            grad_precondition=G,
        )
    if epsilon is None or epsilon <= 0:
        raise ConfigurationError(f"{rule} certificate requires a positive epsilon")
    if rule == "yogi":
        return BoundCertificate(
            eta / (math.sqrt(2.0) * G + epsilon), eta / epsilon,
            grad_bound=G, grad_precondition=G,
        )
    precondition = G / 3.0 if rule == "adan" else G
    return BoundCertificate(
        eta / (G + epsilon), eta / epsilon, grad_bound=G, grad_precondition=precondition
    )


def bound_certificate_from_config(config: UAdamConfig) -> BoundCertificate:
    """Certificate for a full optimizer config (uses its grad_bound where needed)."""
    return bound_certificate(
        config.rule,
        config.eta,
        epsilon=config.epsilon,
        grad_bound=config.grad_bound,
        clip_lo=config.clip_lo,
        clip_hi=config.clip_hi,
        theta=config.theta,
    )
