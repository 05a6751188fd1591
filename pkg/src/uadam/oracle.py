"""Differentiable test problems and a reproducible stochastic gradient oracle.

Problems carry an analytic gradient, a gradient Lipschitz constant and a lower
bound on the objective. The noise injector is Gaussian and isotropic with a
state-dependent scale chosen so that the expected squared perturbation equals
``d0 + d1 * ||grad||^2`` exactly; with ``d0 = d1 = 0`` the oracle is noiseless.

Randomness is counter-based (Philox, keyed by the seed, counter laid out as
``(step << 128) | (lane << 64)``), so every draw is a pure function of
``(seed, step, lane)``: re-runs and parallel runs are bit-reproducible and
sweeps sharing a seed share the exact noise stream.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import ConfigurationError, Vector, as_vector, norm_sq

#: identifier recorded in run metadata for the exact generator in use
RNG_IDENTIFIER = "philox4x64 key=seed counter=(step<<128)|(lane<<64)"

_MASK64 = (1 << 64) - 1
_local = threading.local()


def _philox_generator(seed: int, t: int, lane: int) -> np.random.Generator:
    """Generator positioned at the (seed, t, lane) counter block.

    One bit generator is cached per (thread, seed) and fully re-keyed per
    call, which is bit-identical to fresh construction but skips its entropy
    setup; the thread-local cache keeps draws contention-free across threads.
    """
    cache = getattr(_local, "philox", None)
    if cache is None:
        cache = _local.philox = {}
    pair = cache.get(seed)
    if pair is None:
        bg = np.random.Philox(key=seed)
        pair = cache[seed] = (bg, np.random.Generator(bg))
    bg, gen = pair
    state = bg.state
    state["state"]["counter"][:] = (0, lane, t & _MASK64, t >> 64)
    state["buffer_pos"] = 4
    state["has_uint32"] = 0
    state["uinteger"] = 0
    bg.state = state
    return gen


@dataclass(frozen=True)
class Problem:
    """A smooth objective with analytic gradient and known constants."""

    name: str
    dim: int
    f: Callable[[Vector], float]
    grad: Callable[[Vector], Vector]
    lipschitz_L: float
    f_star: float


@dataclass(frozen=True)
class NoiseModel:
    """Gradient-noise model satisfying the weak growth condition by construction.

    The conditional noise mean is zero and its expected squared norm is
    ``d0 + d1 * ||grad||^2`` at every point.
    """

    d0: float = 0.0
    d1: float = 0.0
    seed: int = 0
    kind: str = "gaussian_isotropic"

    def __post_init__(self):
        if self.d0 < 0 or self.d1 < 0:
            raise ConfigurationError("noise constants d0, d1 must be nonnegative")
        if self.seed < 0:
            raise ConfigurationError("seed must be nonnegative")
        if self.kind != "gaussian_isotropic":
            raise ConfigurationError(f"unknown noise kind {self.kind!r}")

    def draws(self, t: int, shape, lane: int = 0) -> np.ndarray:
        """Standard-normal draws for step ``t``; lane 0 is the driver's stream."""
        return _philox_generator(self.seed, int(t), int(lane)).standard_normal(shape)

    def scale(self, grad: Vector) -> float:
        """Per-coordinate noise scale at a point with the given true gradient."""
        dim = grad.shape[-1]
        return float(np.sqrt((self.d0 + self.d1 * norm_sq(grad)) / dim))

    def apply(self, grad: Vector, t: int) -> Vector:
        """Perturb a true gradient into the stochastic gradient for step ``t``."""
        if self.d0 == 0.0 and self.d1 == 0.0:
            return grad
        return grad + self.scale(grad) * self.draws(t, grad.shape[0], lane=0)

    def apply_batch(self, grad: Vector, t: int, n: int, lane: int = 1) -> np.ndarray:
        """``n`` independent stochastic-gradient realizations at a frozen state.

        Uses a separate counter lane so batches never collide with the
        driver's per-step stream.
        """
        if self.d0 == 0.0 and self.d1 == 0.0:
            return np.broadcast_to(grad, (n, grad.shape[0])).copy()
        z = self.draws(t, (n, grad.shape[0]), lane=lane)
        return grad + self.scale(grad) * z


def sample_gradient(problem: Problem, noise: NoiseModel, x: Vector, t: int) -> Vector:
    """Unbiased stochastic gradient at ``x`` for step ``t``; deterministic in (seed, t, x)."""
    return noise.apply(problem.grad(x), t)


def _quadratic(dim: int, diag: Sequence[float] | None) -> Problem:
    a = as_vector(diag if diag is not None else np.ones(dim))
    if a.shape[0] != dim:
        raise ConfigurationError(f"diag has length {a.shape[0]}, expected dim={dim}")
    if np.any(a <= 0):
        raise ConfigurationError("quadratic diagonal must be positive")

    def f(x: Vector) -> float:
        return 0.5 * float(np.dot(a * x, x))

    def grad(x: Vector) -> Vector:
        return a * x

    return Problem("quadratic", dim, f, grad, lipschitz_L=float(a.max()), f_star=0.0)


def _rosenbrock(dim: int, region_halfwidth: float) -> Problem:
    if dim < 2:
        raise ConfigurationError("rosenbrock requires dim >= 2")
    if region_halfwidth <= 0:
        raise ConfigurationError("region_halfwidth must be positive")

    def f(x: Vector) -> float:
        return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))

    def grad(x: Vector) -> Vector:
        g = np.zeros_like(x)
        diff = x[1:] - x[:-1] ** 2
        g[:-1] = -400.0 * x[:-1] * diff - 2.0 * (1.0 - x[:-1])
        g[1:] += 200.0 * diff
        return g

    # Hessian spectral-norm bound on the box |x_i| <= b via Gershgorin circles
    b = region_halfwidth
    lipschitz = 1200.0 * b**2 + 1200.0 * b + 202.0
    return Problem("rosenbrock", dim, f, grad, lipschitz_L=lipschitz, f_star=0.0)


def _logistic(dim: int, n_samples: int, data_seed: int, reg: float) -> Problem:
    if n_samples < 1:
        raise ConfigurationError("n_samples must be positive")
    if reg < 0:
        raise ConfigurationError("reg must be nonnegative")
    rng = np.random.default_rng(data_seed)
    features = rng.standard_normal((n_samples, dim))
    planted = rng.standard_normal(dim)
    labels = np.where(features @ planted + 0.5 * rng.standard_normal(n_samples) >= 0, 1.0, -1.0)

    def f(w: Vector) -> float:
        margins = labels * (features @ w)
        # log(1 + exp(-m)) evaluated stably for both signs of m
        losses = np.logaddexp(0.0, -margins)
        return float(losses.mean() + 0.5 * reg * np.dot(w, w))

    def grad(w: Vector) -> Vector:
        margins = labels * (features @ w)
        sig = 1.0 / (1.0 + np.exp(np.clip(margins, -500, 500)))
        return -(features.T @ (labels * sig)) / n_samples + reg * w

    gram_top = float(np.linalg.eigvalsh(features.T @ features)[-1])
    lipschitz = 0.25 * gram_top / n_samples + reg
    return Problem("logistic", dim, f, grad, lipschitz_L=lipschitz, f_star=0.0)


def make_problem(name: str, dim: int, **params) -> Problem:
    """Build a named test problem.

    quadratic:  0.5 * x' diag(a) x; params: diag (positive, default ones).
    rosenbrock: chained valley, minimum at the all-ones point; params:
                region_halfwidth (default 2.0) fixing the box on which the
                Lipschitz constant is certified.
    logistic:   mean logistic loss on synthetic labeled Gaussians plus an
                optional ridge term; params: n_samples (default 50),
                data_seed (default 0), reg (default 0.0).
    """
    if dim < 1:
        raise ConfigurationError("dim must be >= 1")
    if name == "quadratic":
        problem = _quadratic(dim, params.pop("diag", None))
    elif name == "rosenbrock":
        problem = _rosenbrock(dim, params.pop("region_halfwidth", 2.0))
    elif name == "logistic":
        problem = _logistic(
            dim,
            params.pop("n_samples", 50),
            params.pop("data_seed", 0),
            params.pop("reg", 0.0),
        )
    else:
        raise ConfigurationError(f"unknown problem {name!r}; expected quadratic|rosenbrock|logistic")
    if params:
        raise ConfigurationError(f"unknown parameters for {name}: {sorted(params)}")
    return problem


def default_start(problem: Problem) -> Vector:
    """Conventional initial iterate for each problem family."""
    if problem.name == "rosenbrock":
        x0 = np.ones(problem.dim)
        x0[0] = -1.2
        return x0
    if problem.name == "logistic":
        return np.zeros(problem.dim)
    return np.ones(problem.dim)


def finite_diff_check(problem: Problem, points: Sequence[Vector], h: float = 1e-5) -> float:
    """Max relative error of the analytic gradient against central differences.

    The error at each coordinate is normalized by the larger of 1 and the
    gradient magnitude at the point, so flat regions do not blow up the ratio.
    """
    if h <= 0:
        raise ConfigurationError("step h must be positive")
    worst = 0.0
    for point in points:
        x = as_vector(point)
        g = problem.grad(x)
        num = np.empty_like(x)
        for i in range(x.shape[0]):
            e = np.zeros_like(x)
            e[i] = h
            num[i] = (problem.f(x + e) - problem.f(x - e)) / (2.0 * h)
        denom = max(1.0, float(np.abs(g).max()))
        worst = max(worst, float(np.abs(num - g).max()) / denom)
    return worst
