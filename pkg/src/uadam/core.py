"""Shared numeric types: dense float64 vectors, optimizer configuration, run traces.

All vector math is coordinate-wise on 1-D float64 arrays. Everything here is
a plain value: safe to share across threads, never mutated after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

Vector = np.ndarray

#: learning-rate rule identifiers accepted in configs
RULES = (
    "const",
    "adam",
    "amsgrad",
    "adafom",
    "adabound",
    "yogi",
    "adaema",
    "adan",
    "sadam",
)

# per rule: (required parameter names, optional parameter names).
# grad_bound is certificate metadata and is accepted for every rule.
RULE_PARAM_SPEC: dict[str, tuple[frozenset[str], frozenset[str]]] = {
    "const": (frozenset(), frozenset()),
    "adam": (frozenset({"beta2", "epsilon"}), frozenset()),
    "amsgrad": (frozenset({"beta2", "epsilon"}), frozenset()),
    "adafom": (frozenset({"epsilon"}), frozenset()),
    "adabound": (frozenset({"beta2", "clip_lo", "clip_hi"}), frozenset()),
    "yogi": (frozenset({"beta2", "epsilon"}), frozenset()),
    "adaema": (frozenset({"epsilon"}), frozenset({"weights"})),
    "adan": (frozenset({"beta2", "epsilon"}), frozenset({"beta1"})),
    "sadam": (frozenset({"beta2", "theta"}), frozenset()),
}


class ConfigurationError(ValueError):
    """Invalid configuration: bad parameters, mismatched dimensions, unknown names."""


class NumericDomainError(ArithmeticError):
    """Input outside an operation's numeric domain (zero divisor, negative sqrt)."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class NumericAbortError(ArithmeticError):
    """Non-finite value produced mid-run; carries the offending step and partial trace."""

    def __init__(self, message: str, step: int, trace: "RunTrace | None" = None):
        super().__init__(message)
        self.step = step
        self.trace = trace


def as_vector(values: Sequence[float] | np.ndarray) -> Vector:
    """Coerce to a 1-D float64 array and reject non-finite coordinates."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ConfigurationError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        bad = int(np.flatnonzero(~np.isfinite(v))[0])
        raise NumericDomainError(f"non-finite coordinate at index {bad}", index=bad)
    return v


def _check_dims(a: Vector, b) -> None:
    if isinstance(b, np.ndarray) and a.shape != b.shape:
        raise ConfigurationError(f"dimension mismatch: {a.shape} vs {b.shape}")


def elementwise(op: str, a: Vector, b=None, *, lo: float | None = None, hi: float | None = None) -> Vector:
    """Coordinate-wise vector operation; inputs are never modified.

    ``op`` is one of add, sub, mul, div, pow, sqrt, max, clip, sign. Binary ops
    accept a vector or scalar ``b``; clip takes ``lo``/``hi`` instead.
    """
    a = np.asarray(a, dtype=np.float64)
    if op == "sqrt":
        if np.any(a < 0):
            bad = int(np.flatnonzero(a < 0)[0])
            raise NumericDomainError(f"sqrt of negative coordinate at index {bad}", index=bad)
        return np.sqrt(a)
    if op == "sign":
        return np.sign(a)
    if op == "clip":
        if lo is None or hi is None:
            raise ConfigurationError("clip requires lo and hi")
        if lo > hi:
            raise ConfigurationError(f"clip bounds reversed: lo={lo} > hi={hi}")
        return np.clip(a, lo, hi)

    if b is None:
        raise ConfigurationError(f"operation {op!r} requires a second operand")
    _check_dims(a, b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        b_arr = np.asarray(b, dtype=np.float64)
        if b_arr.ndim == 0:
            if b_arr == 0.0:
                raise NumericDomainError("division by zero scalar divisor")
            return a / b_arr
        zeros = np.flatnonzero(b_arr == 0.0)
        if len(zeros):
            bad = int(zeros[0])
            raise NumericDomainError(f"division by zero coordinate at index {bad}", index=bad)
        return a / b_arr
    if op == "pow":
        b_arr = np.asarray(b, dtype=np.float64)
        # fractional exponents require a nonnegative base
        frac = b_arr != np.floor(b_arr)
        if np.any((a < 0) & frac):
            bad = int(np.flatnonzero((a < 0) & frac)[0])
            raise NumericDomainError(
                f"fractional power of negative coordinate at index {bad}", index=bad
            )
        return np.power(a, b_arr)
    if op == "max":
        return np.maximum(a, b)
    raise ConfigurationError(f"unknown elementwise operation {op!r}")


def norm_sq(a: Vector) -> float:
    """Squared Euclidean norm."""
    a = np.asarray(a, dtype=np.float64)
    return float(np.dot(a, a))


def sgd_lambda(beta: float) -> float:
    """The interpolation factor 1/(1-beta) at which the direction collapses to the raw gradient."""
    return 1.0 / (1.0 - beta)


@dataclass(frozen=True)
class UAdamConfig:
    """Full optimizer configuration: base stepsize, momentum, interpolation, rule.

    ``lam`` is the interpolation factor in [0, 1/(1-beta)]: 0 gives the
    heavy-ball direction, 1 the Nesterov direction, 1/(1-beta) the raw
    gradient. Rule parameters must be present exactly when the selected rule
    uses them; ``grad_bound`` is optional certificate metadata for any rule.
    """

    eta: float
    beta: float
    lam: float
    rule: str
    seed: int = 0
    max_steps: int = 1000
    beta2: float | None = None
    epsilon: float | None = None
    grad_bound: float | None = None
    clip_lo: float | None = None
    clip_hi: float | None = None
    theta: float | None = None
    weights: str | None = None
    beta1: float | None = None

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigurationError(f"eta must be positive, got {self.eta}")
        if not 0 <= self.beta < 1:
            raise ConfigurationError(f"beta must lie in [0, 1), got {self.beta}")
        lt = (1.0 - self.beta) * self.lam
        if lt < 0 or lt > 1 + 1e-12:
            raise ConfigurationError(
                f"lambda={self.lam} with beta={self.beta} gives lambda_tilde={lt}, outside [0, 1]"
            )
        if self.seed < 0:
            raise ConfigurationError("seed must be nonnegative")
        if self.max_steps < 0:
            raise ConfigurationError("max_steps must be nonnegative")
        self._validate_rule_params()

    def _validate_rule_params(self):
        if self.rule not in RULE_PARAM_SPEC:
            raise ConfigurationError(f"unknown rule {self.rule!r}; expected one of {'|'.join(RULES)}")
        required, optional = RULE_PARAM_SPEC[self.rule]
        tunable = {"beta2", "epsilon", "clip_lo", "clip_hi", "theta", "weights", "beta1"}
        given = {name for name in tunable if getattr(self, name) is not None}
        missing = required - given
        if missing:
            raise ConfigurationError(f"rule {self.rule!r} requires parameters {sorted(missing)}")
        extra = given - required - optional
        if extra:
            raise ConfigurationError(f"rule {self.rule!r} does not use parameters {sorted(extra)}")
        if self.beta2 is not None and not 0 <= self.beta2 < 1:
            raise ConfigurationError(f"beta2 must lie in [0, 1), got {self.beta2}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")
        if self.theta is not None and not self.theta > 0:
            raise ConfigurationError(f"theta must be positive, got {self.theta}")
        if self.grad_bound is not None and not self.grad_bound > 0:
            raise ConfigurationError(f"grad_bound must be positive, got {self.grad_bound}")
        if self.clip_lo is not None and self.clip_hi is not None and not self.clip_lo < self.clip_hi:
            raise ConfigurationError(
                f"clip bounds must satisfy clip_lo < clip_hi, got {self.clip_lo} >= {self.clip_hi}"
            )
        if self.beta1 is not None and not 0 <= self.beta1 < 1:
            raise ConfigurationError(f"beta1 must lie in [0, 1), got {self.beta1}")

    @property
    def lambda_tilde(self) -> float:
        """Normalized interpolation weight (1-beta)*lam, clamped into [0, 1]."""
        return min((1.0 - self.beta) * self.lam, 1.0)

    def resolved_beta1(self) -> float:
        """First-moment factor used inside the adan rule; defaults to the driver's beta."""
        return self.beta if self.beta1 is None else self.beta1


@dataclass
class RunTrace:
    """Per-step record of a run: step index, objective, gradient and step statistics.

    ``delta_t`` is the squared distance between the first moment and the true
    gradient at each iterate, a diagnostic only available with analytic
    oracles. Vector histories (``x_hist``/``m_hist``/``grad_hist``) are kept
    only when the run was asked to record them.
    """

    t: np.ndarray
    f: np.ndarray
    grad_norm_sq: np.ndarray
    delta_t: np.ndarray
    eta_min: np.ndarray
    eta_max: np.ndarray
    step_norm: np.ndarray
    grad_bound_violations: int = 0
    completed: bool = True
    x_hist: list[Vector] = field(default_factory=list, repr=False)
    m_hist: list[Vector] = field(default_factory=list, repr=False)
    grad_hist: list[Vector] = field(default_factory=list, repr=False)

    COLUMNS = ("t", "f", "grad_norm_sq", "delta_t", "eta_min", "eta_max", "step_norm")

    def __len__(self) -> int:
        return len(self.t)

    @classmethod
    def empty(cls) -> "RunTrace":
        z = np.empty(0, dtype=np.float64)
        return cls(
            t=np.empty(0, dtype=np.int64), f=z, grad_norm_sq=z.copy(), delta_t=z.copy(),
            eta_min=z.copy(), eta_max=z.copy(), step_norm=z.copy(),
        )

    def column(self, name: str) -> np.ndarray:
        if name not in self.COLUMNS:
            raise ConfigurationError(f"unknown trace column {name!r}")
        return getattr(self, name)

    def validate(self) -> None:
        """Enforce the trace invariants: strictly increasing t from 1, equal lengths."""
        n = len(self.t)
        for name in self.COLUMNS[1:]:
            if len(getattr(self, name)) != n:
                raise ConfigurationError(f"trace column {name!r} length differs from t")
        if n and (self.t[0] != 1 or np.any(np.diff(self.t) != 1)):
            raise ConfigurationError("trace step indices must run 1..T without gaps")
