"""Stationary covariance functions: squared exponential and half-integer Matern.

All evaluators work on numpy arrays of points with shape ``(n, d)``; a single
point may be passed as a 1-D array of length ``d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

JITTER = 1e-10

_SQRT3 = math.sqrt(3.0)
_SQRT5 = math.sqrt(5.0)


class KernelFamily(str, Enum):
    SQUARED_EXPONENTIAL = "se"
    MATERN = "matern"


SUPPORTED_NU = (0.5, 1.5, 2.5)


@dataclass(frozen=True)
class KernelSpec:
    """Covariance family plus hyperparameters.

    Parameters
    ----------
    family : KernelFamily
        ``"se"`` or ``"matern"``.
    nu : float
        Matern smoothness, one of 1/2, 3/2, 5/2. Ignored for SE.
    lengthscale : float
        Positive lengthscale ``l``.
    output_scale : float
        Prior variance ``k(x, x)``; also the kernel bound used in drift bounds.
    """

    family: KernelFamily = KernelFamily.MATERN
    nu: float = 1.5
    lengthscale: float = 0.2
    output_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not self.lengthscale > 0:
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")
        if not self.output_scale > 0:
            raise ValueError(f"output_scale must be positive, got {self.output_scale}")
        if self.family is KernelFamily.MATERN and float(self.nu) not in SUPPORTED_NU:
            raise ValueError(f"Matern nu must be one of {SUPPORTED_NU}, got {self.nu}")

    @classmethod
    def se(cls, lengthscale: float = 0.2, output_scale: float = 1.0) -> "KernelSpec":
        return cls(KernelFamily.SQUARED_EXPONENTIAL, 0.0, lengthscale, output_scale)

    @classmethod
    def matern(cls, nu: float = 1.5, lengthscale: float = 0.2,
               output_scale: float = 1.0) -> "KernelSpec":
        return cls(KernelFamily.MATERN, nu, lengthscale, output_scale)

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "nu": self.nu,
            "lengthscale": self.lengthscale,
            "output_scale": self.output_scale,
        }

    def from_distance(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        s = r / self.lengthscale
        if self.family is KernelFamily.SQUARED_EXPONENTIAL:
            k = np.exp(-0.5 * s**2)
        elif self.nu == 0.5:
            k = np.exp(-s)
        elif self.nu == 1.5:
            k = (1.0 + _SQRT3 * s) * np.exp(-_SQRT3 * s)
        else:
            k = (1.0 + _SQRT5 * s + 5.0 / 3.0 * s**2) * np.exp(-_SQRT5 * s)
        return self.output_scale * k


def as_points(X, d: int | None = None) -> np.ndarray:
    """Coerce a list of points to an ``(n, d)`` float array.

    A 1-D input is read as ``n`` scalar points when ``d == 1`` and as a single
    point otherwise.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        return X.reshape(1, 1)
    if X.ndim == 1:
        if d == 1:
            return X.reshape(-1, 1)
        return X.reshape(1, -1)
    return X


def distances(X, Z) -> np.ndarray:
    """Euclidean distance matrix between rows of ``X`` (n, d) and ``Z`` (p, d)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    diff = X[:, None, :] - Z[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def evaluate(spec: KernelSpec, x, x2) -> float:
    """k(x, x2) for two single points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    r = float(np.linalg.norm(x - x2))
    return float(spec.from_distance(r))


def gram(spec: KernelSpec, X) -> np.ndarray:
    """Kernel matrix of the rows of ``X``; exactly symmetric with diagonal s2."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    K = spec.from_distance(distances(X, X))
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, spec.output_scale)
    return K


def cross(spec: KernelSpec, X, x) -> np.ndarray:
    """Vector of ``k(X[i], x)`` for a single point ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return cross_matrix(spec, X, x[None, :])[:, 0]


def cross_matrix(spec: KernelSpec, X, Z) -> np.ndarray:
    """Matrix of ``k(X[i], Z[j])``."""
    return spec.from_distance(distances(X, Z))
