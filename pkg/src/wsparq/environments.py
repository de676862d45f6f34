"""Ground-truth response maps, noisy observations and the dynamic-regret oracle.

Environments are immutable descriptions. Anything random about a run (the
opponent's type path) lives in the object returned by ``realize``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .acquisition import DecisionGrid, RewardSpec, benchmark_reward

TWO_PI = 2.0 * math.pi
REGIMES = ("stationary", "moderate", "fast")


class ConvergenceError(RuntimeError):
    """Lower-level solver hit its iteration cap."""


def regime_response(regime: str, X: np.ndarray, t: float) -> np.ndarray:
    """Benchmark response maps for a batch of scalar actions ``X`` of shape (p, 1)."""
    x = np.asarray(X, dtype=float)[:, 0]
    if regime == "stationary":
        return np.stack([np.sin(TWO_PI * x), np.cos(TWO_PI * x)], axis=-1)
    if regime == "moderate":
        return np.stack([np.sin(TWO_PI * x + 0.5 * t), np.cos(TWO_PI * x - 0.03 * t)], axis=-1)
    if regime == "fast":
        a = 0.2 * math.sqrt(t)
        b = 0.1 * t
        left = x < 0.5
        y0 = np.where(left, 2 * x + a, -2 * x + 2 + a)
        y1 = np.where(left, -2 * x + b, 2 * x - 2 + b)
        return np.stack([y0, y1], axis=-1)
    raise ValueError(f"unknown regime {regime!r}")


class Environment:
    """Common interface; subclasses implement ``response_many``."""

    d: int = 1
    m: int = 1
    sigma2: float = 0.01
    alpha: float = 0.0
    reward: RewardSpec

    def response_many(self, X, t: int) -> np.ndarray:
        raise NotImplementedError

    def response(self, x, t: int) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self.response_many(x[None, :], t)[0]

    def observe(self, x, t: int, rng: np.random.Generator) -> np.ndarray:
        """Noisy response with independent N(0, sigma2) noise per coordinate."""
        noise = rng.normal(0.0, math.sqrt(self.sigma2), size=self.m)
        return self.response(x, t) + noise

    def realize(self, rng: np.random.Generator) -> "Environment":
        return self

    def state(self, t: int):
        """Extra per-step information revealed after acting (opponent type)."""
        return None


@dataclass(frozen=True)
class ResponseEnvironment(Environment):
    """Environment defined by an arbitrary response callable ``fn(X, t) -> (p, m)``."""

    fn: Callable[[np.ndarray, int], np.ndarray]
    d: int = 1
    m: int = 1
    sigma2: float = 0.01
    alpha: float = 0.0
    reward: RewardSpec = field(default_factory=benchmark_reward)

    def response_many(self, X, t):
        return np.asarray(self.fn(np.atleast_2d(np.asarray(X, dtype=float)), t), dtype=float)


@dataclass(frozen=True)
class SyntheticBilevel(Environment):
    """The three benchmark regimes on ``[0, 1]`` with a two-dimensional response."""

    regime: str = "stationary"
    sigma2: float = 0.01
    reward: RewardSpec = field(default_factory=benchmark_reward)
    d: int = field(default=1, init=False)
    m: int = field(default=2, init=False)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")

    @property
    def alpha(self) -> float:
        return 0.0 if self.regime == "stationary" else 1.0

    def response_many(self, X, t):
        return regime_response(self.regime, np.atleast_2d(np.asarray(X, dtype=float)), t)


def project_box(y: np.ndarray, low: float, high: float) -> np.ndarray:
    return np.clip(y, low, high)


def solve_lower_level(grad_y: Callable[[np.ndarray, np.ndarray], np.ndarray], x, y0,
                      mu: float, tol: float = 1e-10, L: float | None = None,
                      box: tuple[float, float] = (-3.0, 3.0), max_iter: int = 10_000,
                      full_output: bool = False):
    """Minimize a mu-strongly convex ``g(x, .)`` over a box by projected gradient.

    Iterates ``y <- P(y - grad_y(x, y) / L)`` until the gradient-mapping norm
    ``L * ||y - P(y - grad / L)||`` is at most ``tol``; the result is then
    within ``tol / mu`` of the minimizer.

    Parameters
    ----------
    grad_y : callable
        ``grad_y(x, y)`` returning the gradient of ``g`` in ``y``.
    mu : float
        Strong convexity modulus.
    L : float, optional
        Smoothness constant used as inverse step size; defaults to ``mu``.
    full_output : bool
        Also return the number of gradient evaluations.

    Raises
    ------
    ConvergenceError
        If ``max_iter`` gradient steps do not reach ``tol``.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    L = mu if L is None else L
    if L < mu:
        raise ValueError("smoothness constant L must be >= mu")
    low, high = box
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = project_box(np.array(y0, dtype=float), low, high)
    for it in range(1, max_iter + 1):
        y_next = project_box(y - grad_y(x, y) / L, low, high)
        if L * np.linalg.norm(y_next - y) <= tol:
            return (y, it) if full_output else y
        y = y_next
    raise ConvergenceError(f"projected gradient did not converge in {max_iter} iterations")


TARGET_MAPS: dict[str, Callable[[np.ndarray, int], np.ndarray]] = {
    "linear": lambda X, t: np.stack([X[:, 0], 1.0 - X[:, 0]], axis=-1),
    "stationary": lambda X, t: regime_response("stationary", X, t),
    "moderate": lambda X, t: regime_response("moderate", X, t),
    "fast": lambda X, t: regime_response("fast", X, t),
}


@dataclass(frozen=True)
class QuadraticLowerLevel(Environment):
    """Response is ``argmin_y mu/2 ||y - h_t(x)||^2`` over ``[y_low, y_high]^m``.

    The minimizer is computed numerically with ``solve_lower_level``.
    """

    mu: float = 2.0
    target: str = "linear"
    sigma2: float = 0.01
    alpha: float = 0.0
    y_low: float = -3.0
    y_high: float = 3.0
    tol: float = 1e-10
    reward: RewardSpec = field(default_factory=benchmark_reward)
    d: int = field(default=1, init=False)
    m: int = field(default=2, init=False)

    def __post_init__(self):
        if self.target not in TARGET_MAPS:
            raise ValueError(f"unknown target map {self.target!r}")
        if not self.mu > 0:
            raise ValueError("mu must be positive")

    def target_many(self, X, t):
        return TARGET_MAPS[self.target](np.atleast_2d(np.asarray(X, dtype=float)), t)

    def response_many(self, X, t):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        H = self.target_many(X, t)
        out = np.empty_like(H)
        for i in range(X.shape[0]):
            h = H[i]
            out[i] = solve_lower_level(lambda x, y, h=h: self.mu * (y - h), X[i],
                                       np.zeros(self.m), self.mu, tol=self.tol,
                                       box=(self.y_low, self.y_high))
        return out


def drift_opponent(theta_prev, dt: int, alpha: float, sigma: float, L_g: float,
                   rng: np.random.Generator) -> np.ndarray:
    """One Gaussian increment of the opponent's type with variance (sigma/L_g)^2 dt^alpha."""
    theta_prev = np.atleast_1d(np.asarray(theta_prev, dtype=float))
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0 or sigma == 0:
        return theta_prev.copy()
    scale = (sigma / L_g) * math.sqrt(dt**alpha)
    return theta_prev + rng.normal(0.0, scale, size=theta_prev.shape)


def sine_congestion(X: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Synthetic stand-in response ``sin(2 pi x) (1 + 0.1 ||theta||)``."""
    scale = 1.0 + 0.1 * float(np.linalg.norm(theta))
    return (np.sin(TWO_PI * X[:, 0]) * scale)[:, None]


BASE_RESPONSES = {"sine_congestion": sine_congestion}


@dataclass(frozen=True)
class OpponentDrift(Environment):
    """Sequential game whose opponent type follows a Gaussian random walk.

    ``drift_sigma`` and ``L_g`` set the per-step type increment variance
    ``(drift_sigma / L_g)^2``; with ``drift_sigma == 0`` the opponent is frozen
    at ``theta0``. This is a synthetic scalar response, not a traffic model.
    """

    alpha: float = 1.0
    drift_sigma: float = 0.1
    L_g: float = 0.1
    theta0: tuple = (1.0, 0.0)
    base: str = "sine_congestion"
    sigma2: float = 0.01
    reward: RewardSpec = field(default_factory=benchmark_reward)
    d: int = field(default=1, init=False)
    m: int = field(default=1, init=False)

    def __post_init__(self):
        if self.base not in BASE_RESPONSES:
            raise ValueError(f"unknown base response {self.base!r}")
        if self.drift_sigma < 0 or not self.L_g > 0:
            raise ValueError("drift_sigma must be >= 0 and L_g > 0")

    def realize(self, rng):
        return _RealizedOpponent(self, rng)

    def response_many(self, X, t):
        # unrealized: the opponent sits at theta0
        return BASE_RESPONSES[self.base](np.atleast_2d(np.asarray(X, dtype=float)),
                                         np.asarray(self.theta0, dtype=float))

    def frozen_equivalent(self) -> ResponseEnvironment:
        """Plain response environment matching this game with the opponent held at theta0."""
        theta = np.asarray(self.theta0, dtype=float)
        base = BASE_RESPONSES[self.base]
        return ResponseEnvironment(lambda X, t: base(X, theta), d=1, m=1,
                                   sigma2=self.sigma2, alpha=self.alpha, reward=self.reward)


class _RealizedOpponent(Environment):
    def __init__(self, spec: OpponentDrift, rng: np.random.Generator):
        self.spec = spec
        self.d, self.m = spec.d, spec.m
        self.sigma2, self.alpha, self.reward = spec.sigma2, spec.alpha, spec.reward
        self._rng = rng
        self._thetas = [np.asarray(spec.theta0, dtype=float)]

    def theta(self, t: int) -> np.ndarray:
        while len(self._thetas) <= t:
            self._thetas.append(drift_opponent(self._thetas[-1], 1, self.spec.alpha,
                                               self.spec.drift_sigma, self.spec.L_g, self._rng))
        return self._thetas[t]

    def state(self, t):
        return self.theta(t)

    def response_many(self, X, t):
        return BASE_RESPONSES[self.spec.base](np.atleast_2d(np.asarray(X, dtype=float)),
                                              self.theta(t))


def oracle_optimum(env: Environment, t: int, grid: DecisionGrid) -> tuple[np.ndarray, float]:
    """Best grid action for the true response at time ``t``."""
    values = true_values(env, t, grid)
    i = int(np.argmax(values))
    return grid.points[i].copy(), float(values[i])


def true_values(env: Environment, t: int, grid: DecisionGrid) -> np.ndarray:
    return env.reward.evaluator(grid.points, env.response_many(grid.points, t))
