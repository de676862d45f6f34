"""Greedy determinant maximization for choosing re-query points, and query budgets."""

from __future__ import annotations

import math

import numpy as np

from .kernels import KernelFamily, KernelSpec, gram

GAIN_FLOOR = 1e-12


def greedy_dpp_select(kernel: KernelSpec, candidates, budget: int,
                      return_gains: bool = False):
    """Greedy MAP subset of ``candidates`` under the kernel DPP.

    Each step adds the candidate with the largest residual variance given the
    points already chosen, which is the multiplicative gain in the Gram
    determinant. Selection stops at ``budget`` points or when the best gain
    drops below ``GAIN_FLOOR``. Ties go to the lowest index.

    Returns the selected indices, plus the gain sequence if ``return_gains``.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    X = np.asarray(candidates, dtype=float)
    if X.size == 0:
        return ([], []) if return_gains else []
    X = np.atleast_2d(X)
    n = X.shape[0]
    K = gram(kernel, X)
    residual = np.diag(K).copy()
    # rows of the incremental Cholesky factor, one per selected point
    factors = np.zeros((min(budget, n), n))
    selected: list[int] = []
    gains: list[float] = []
    available = np.ones(n, dtype=bool)
    while len(selected) < budget:
        scores = np.where(available, residual, -np.inf)
        j = int(np.argmax(scores))
        gain = float(scores[j])
        if gain < GAIN_FLOOR:
            break
        k = len(selected)
        e = (K[j] - factors[:k, j] @ factors[:k]) / math.sqrt(gain)
        factors[k] = e
        residual = residual - e * e
        available[j] = False
        selected.append(j)
        gains.append(gain)
    if return_gains:
        return selected, gains
    return selected


def _snap_ceil(value: float) -> int:
    nearest = round(value)
    if abs(value - nearest) <= 1e-9 * max(1.0, abs(value)):
        return int(nearest)
    return int(math.ceil(value))


def query_budget(t: int, kernel: KernelSpec, d: int, c_q: float = 1.0) -> int:
    """Number of additional queries allowed at a window starting at ``t``.

    ``c_q * log(t)**d`` for SE and ``c_q * t**(2d / (2 nu - d))`` for Matern,
    rounded up and floored at one.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if not c_q > 0:
        raise ValueError("c_q must be positive")
    if kernel.family is KernelFamily.SQUARED_EXPONENTIAL:
        raw = c_q * math.log(t) ** d
    else:
        if not 2 * kernel.nu > d:
            raise ValueError(f"Matern query budget needs 2*nu > d (nu={kernel.nu}, d={d})")
        raw = c_q * t ** (2 * d / (2 * kernel.nu - d))
    return max(1, _snap_ceil(raw))
