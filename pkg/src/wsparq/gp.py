"""Heteroscedastic multi-output GP regression.

Each output coordinate is modelled by an independent GP sharing the kernel,
the training inputs and the per-observation noise variances, so a single
Cholesky factor of ``K + Sigma`` serves all outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import linalg

from .kernels import JITTER, KernelSpec, cross_matrix, gram


class NumericalDegeneracyError(ArithmeticError):
    """Raised when a factorization or log-determinant is not finite."""


class BetaDenominator(str, Enum):
    K = "k"
    SIGMA = "sigma"


@dataclass
class ObservationSet:
    """Time-stamped observations with their current noise variance proxies."""

    d: int
    m: int
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    acquired_at: list = field(default_factory=list)
    variance_proxies: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.inputs)

    def append(self, x, y, t: int, proxy: float) -> None:
        x = np.atleast_1d(np.asarray(x, dtype=float)).copy()
        y = np.atleast_1d(np.asarray(y, dtype=float)).copy()
        if x.shape != (self.d,) or y.shape != (self.m,):
            raise ValueError(f"expected x of shape ({self.d},) and y of shape ({self.m},)")
        if not proxy > 0:
            raise ValueError("variance proxy must be positive")
        self.inputs.append(x)
        self.outputs.append(y)
        self.acquired_at.append(int(t))
        self.variance_proxies.append(float(proxy))

    def clear(self) -> None:
        self.inputs.clear()
        self.outputs.clear()
        self.acquired_at.clear()
        self.variance_proxies.clear()

    @property
    def X(self) -> np.ndarray:
        return np.array(self.inputs, dtype=float).reshape(len(self), self.d)

    @property
    def Y(self) -> np.ndarray:
        return np.array(self.outputs, dtype=float).reshape(len(self), self.m)

    @property
    def noise(self) -> np.ndarray:
        return np.array(self.variance_proxies, dtype=float)


@dataclass(frozen=True)
class ConfidenceBox:
    lcb: np.ndarray
    ucb: np.ndarray


@dataclass(frozen=True)
class PosteriorModel:
    kernel: KernelSpec
    X: np.ndarray
    chol: np.ndarray | None
    weights: np.ndarray
    m: int
    offset: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]


def fit(kernel: KernelSpec, obs: ObservationSet, prior_mean=None) -> PosteriorModel:
    """Condition the GP prior on ``obs``.

    ``prior_mean`` is an optional constant m-vector prior mean (zero when
    None). An empty observation set yields the prior model.
    """
    offset = None if prior_mean is None else np.broadcast_to(
        np.asarray(prior_mean, dtype=float), (obs.m,)).copy()
    if len(obs) == 0:
        return PosteriorModel(kernel, np.empty((0, obs.d)), None, np.empty((0, obs.m)), obs.m,
                              offset)
    X = obs.X
    Y = obs.Y if offset is None else obs.Y - offset
    A = gram(kernel, X)
    A[np.diag_indices_from(A)] += obs.noise + JITTER
    try:
        L = linalg.cholesky(A, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalDegeneracyError("K + Sigma is not positive definite") from exc
    W = linalg.cho_solve((L, True), Y)
    return PosteriorModel(kernel, X, L, W, obs.m, offset)


def predict_many(model: PosteriorModel, Z) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and std at the rows of ``Z``; both of shape ``(p, m)``."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    s2 = model.kernel.output_scale
    p = Z.shape[0]
    offset = np.zeros(model.m) if model.offset is None else model.offset
    if model.chol is None:
        return np.tile(offset, (p, 1)), np.full((p, model.m), math.sqrt(s2))
    Kq = cross_matrix(model.kernel, model.X, Z)
    mean = Kq.T @ model.weights + offset
    V = linalg.solve_triangular(model.chol, Kq, lower=True)
    var = np.maximum(s2 - np.sum(V * V, axis=0), 0.0)
    std = np.repeat(np.sqrt(var)[:, None], model.m, axis=1)
    return mean, std


def predict(model: PosteriorModel, x) -> tuple[np.ndarray, np.ndarray]:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mean, std = predict_many(model, x[None, :])
    return mean[0], std[0]


def _logdet_chol(A: np.ndarray) -> float:
    try:
        L = linalg.cholesky(A, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalDegeneracyError("matrix is not positive definite") from exc
    value = 2.0 * float(np.sum(np.log(np.diag(L))))
    if not math.isfinite(value):
        raise NumericalDegeneracyError("non-finite log-determinant")
    return value


def beta(kernel: KernelSpec, obs: ObservationSet, delta: float, B: float, m: int,
         denominator: BetaDenominator | str = BetaDenominator.SIGMA) -> float:
    """Confidence-width multiplier.

    ``sqrt(2 log((m / delta) * |Sigma + K|^(1/2) / |D|^(1/2))) + B`` where ``D``
    is ``Sigma`` (information-gain form) or ``K + jitter I``.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if B < 0:
        raise ValueError("B must be non-negative")
    denominator = BetaDenominator(denominator)
    log_ratio = 0.0
    if len(obs):
        K = gram(kernel, obs.X)
        noise = obs.noise
        A = K.copy()
        A[np.diag_indices_from(A)] += noise + JITTER
        if denominator is BetaDenominator.SIGMA:
            log_den = float(np.sum(np.log(noise)))
        else:
            K[np.diag_indices_from(K)] += JITTER
            log_den = _logdet_chol(K)
        log_ratio = _logdet_chol(A) - log_den
    arg = 2.0 * math.log(m / delta) + log_ratio
    if not math.isfinite(arg):
        raise NumericalDegeneracyError("non-finite beta argument")
    return math.sqrt(max(arg, 0.0)) + B


def confidence_box(model: PosteriorModel, x, beta_t: float) -> ConfidenceBox:
    if beta_t < 0:
        raise ValueError("beta must be non-negative")
    mean, std = predict(model, x)
    return ConfidenceBox(mean - beta_t * std, mean + beta_t * std)


def information_gain(kernel: KernelSpec, X, noise_var: float) -> float:
    """Half the log-determinant of ``I + K / noise_var``."""
    if not noise_var > 0:
        raise ValueError("noise_var must be positive")
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return 0.0
    X = np.atleast_2d(X)
    A = gram(kernel, X) / noise_var
    A[np.diag_indices_from(A)] += 1.0
    return 0.5 * _logdet_chol(A)
