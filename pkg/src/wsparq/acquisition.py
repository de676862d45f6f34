"""Optimistic acquisition over a discretized action domain.

The learner picks the grid point whose best-case reward over the confidence
box of the predicted response is largest.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .gp import ConfidenceBox, PosteriorModel, predict, predict_many


class RewardStructure(str, Enum):
    SEPARABLE_CONCAVE = "separable_concave"
    GENERAL = "general"


@dataclass(frozen=True)
class DecisionGrid:
    """Uniform grid on ``[low, high]^d`` with ``resolution`` points per axis."""

    low: float = 0.0
    high: float = 1.0
    resolution: int = 256
    d: int = 1
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("grid resolution must be >= 2")
        if not self.high > self.low:
            raise ValueError("grid needs high > low")
        axis = np.linspace(self.low, self.high, self.resolution)
        mesh = np.meshgrid(*([axis] * self.d), indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=-1)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def spacing(self) -> float:
        return (self.high - self.low) / (self.resolution - 1)


@dataclass(frozen=True)
class RewardSpec:
    """Known upper-level reward.

    ``evaluator`` maps arrays ``X`` of shape (p, d) and ``Y`` of shape (p, m)
    to ``p`` rewards. For ``SEPARABLE_CONCAVE`` rewards, ``peak(X, m)`` returns the
    unconstrained per-coordinate maximizer in ``y`` for each row of ``X``.
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    structure: RewardStructure = RewardStructure.GENERAL
    lipschitz: float = float("nan")
    peak: Callable[[np.ndarray, int], np.ndarray] | None = None
    inner_resolution: int = 64

    def __post_init__(self):
        object.__setattr__(self, "structure", RewardStructure(self.structure))
        if self.structure is RewardStructure.SEPARABLE_CONCAVE and self.peak is None:
            raise ValueError("separable concave rewards need a peak function")
        if self.inner_resolution < 2:
            raise ValueError("inner_resolution must be >= 2")

    def __call__(self, x, y) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return float(self.evaluator(x[None, :], y[None, :])[0])


def benchmark_reward(y_bound: float = 3.0, inner_resolution: int = 64, m: int = 2) -> RewardSpec:
    """``f(x, y) = -||x - 0.5||^2 - ||y||^2 / 2`` on ``[0, 1]^d x [-y_bound, y_bound]^m``.

    The Lipschitz constant covers both arguments for scalar ``x``: slope at
    most 1 in ``x`` on [0, 1] and ``max ||y|| = y_bound * sqrt(m)`` in ``y``.
    """

    def evaluator(X, Y):
        return -np.sum((X - 0.5) ** 2, axis=-1) - 0.5 * np.sum(Y * Y, axis=-1)

    def peak(X, m):
        return np.zeros((X.shape[0], m))

    return RewardSpec(evaluator, RewardStructure.SEPARABLE_CONCAVE,
                      lipschitz=max(1.0, y_bound * math.sqrt(m)), peak=peak,
                      inner_resolution=inner_resolution)


def _check_general(reward: RewardSpec, m: int) -> None:
    if m > 2:
        raise ValueError("grid-based inner optimization supports m <= 2 only")


def _inner_grid(reward: RewardSpec, lcb: np.ndarray, ucb: np.ndarray) -> np.ndarray:
    # (p, q, m) candidate responses spanning each box
    m = lcb.shape[1]
    u = np.linspace(0.0, 1.0, reward.inner_resolution)
    frac = np.array(list(itertools.product(u, repeat=m)))
    return lcb[:, None, :] + frac[None, :, :] * (ucb - lcb)[:, None, :]


def _corners(lcb: np.ndarray, ucb: np.ndarray) -> np.ndarray:
    m = lcb.shape[1]
    pick = np.array(list(itertools.product((0, 1), repeat=m)), dtype=bool)
    return np.where(pick[None, :, :], ucb[:, None, :], lcb[:, None, :])


def _evaluate_candidates(reward: RewardSpec, X: np.ndarray, C: np.ndarray) -> np.ndarray:
    p, q, m = C.shape
    Xr = np.repeat(X, q, axis=0)
    return reward.evaluator(Xr, C.reshape(p * q, m)).reshape(p, q)


def inner_max_many(reward: RewardSpec, X, lcb, ucb) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise ``max_{lcb <= y <= ucb} f(x, y)``; returns (argmax y, value)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    lcb = np.atleast_2d(np.asarray(lcb, dtype=float))
    ucb = np.atleast_2d(np.asarray(ucb, dtype=float))
    if reward.structure is RewardStructure.SEPARABLE_CONCAVE:
        y = np.clip(reward.peak(X, lcb.shape[1]), lcb, ucb)
        return y, reward.evaluator(X, y)
    _check_general(reward, lcb.shape[1])
    C = _inner_grid(reward, lcb, ucb)
    vals = _evaluate_candidates(reward, X, C)
    idx = np.argmax(vals, axis=1)
    rows = np.arange(len(idx))
    return C[rows, idx], vals[rows, idx]


def inner_min_many(reward: RewardSpec, X, lcb, ucb) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise ``min_{lcb <= y <= ucb} f(x, y)``.

    A concave reward attains its minimum over a box at a corner; corners are
    scanned in lexicographic (lower bound first) order.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    lcb = np.atleast_2d(np.asarray(lcb, dtype=float))
    ucb = np.atleast_2d(np.asarray(ucb, dtype=float))
    if reward.structure is RewardStructure.SEPARABLE_CONCAVE:
        C = _corners(lcb, ucb)
    else:
        _check_general(reward, lcb.shape[1])
        C = _inner_grid(reward, lcb, ucb)
    vals = _evaluate_candidates(reward, X, C)
    idx = np.argmin(vals, axis=1)
    rows = np.arange(len(idx))
    return C[rows, idx], vals[rows, idx]


def inner_max_over_box(reward: RewardSpec, x, box: ConfidenceBox) -> tuple[np.ndarray, float]:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y, v = inner_max_many(reward, x[None, :], box.lcb[None, :], box.ucb[None, :])
    return y[0], float(v[0])


def inner_min_over_box(reward: RewardSpec, x, box: ConfidenceBox) -> tuple[np.ndarray, float]:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y, v = inner_min_many(reward, x[None, :], box.lcb[None, :], box.ucb[None, :])
    return y[0], float(v[0])


def acquisition_values(model: PosteriorModel, beta: float, reward: RewardSpec,
                       grid: DecisionGrid) -> np.ndarray:
    """Optimistic value of every grid point."""
    mean, std = predict_many(model, grid.points)
    _, vals = inner_max_many(reward, grid.points, mean - beta * std, mean + beta * std)
    return vals


def select_action(model: PosteriorModel, beta: float, reward: RewardSpec,
                  grid: DecisionGrid) -> tuple[np.ndarray, float]:
    """Grid point maximizing the optimistic reward; lowest index wins ties."""
    vals = acquisition_values(model, beta, reward, grid)
    i = int(np.argmax(vals))
    return grid.points[i].copy(), float(vals[i])


def regret_width_diagnostic(model: PosteriorModel, beta: float, reward: RewardSpec, x) -> float:
    """Gap between the best and worst reward over the confidence box at ``x``."""
    mean, std = predict(model, x)
    box = ConfidenceBox(mean - beta * std, mean + beta * std)
    _, hi = inner_max_over_box(reward, x, box)
    _, lo = inner_min_over_box(reward, x, box)
    return max(hi - lo, 0.0)
