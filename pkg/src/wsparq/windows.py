"""Window partition of time and the lag-dependent noise schedule."""

from __future__ import annotations

import bisect
import math

from .kernels import KernelFamily, KernelSpec

_SNAP = 1e-9


def _snap(value: float) -> float:
    # t**r is often an integer in exact arithmetic but not in floating point
    nearest = round(value)
    if abs(value - nearest) <= _SNAP * max(1.0, abs(value)):
        return float(nearest)
    return value


def next_window_length(t_j: int, alpha: float, alpha_tilde: float) -> int:
    """Length ``floor(t_j ** (alpha_tilde / alpha)) + 1`` of the window opening at ``t_j``."""
    if t_j < 1:
        raise ValueError("window start must be >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be positive for windowing; stationary runs bypass it")
    if not alpha_tilde > 0:
        raise ValueError("alpha_tilde must be positive")
    return int(math.floor(_snap(t_j ** (alpha_tilde / alpha)))) + 1


def variance_proxy(t_obs: int, t_now: int, sigma2: float, alpha: float) -> float:
    """Noise variance of an observation made at ``t_obs`` viewed at ``t_now``."""
    lag = t_now - t_obs
    if lag < 0:
        raise ValueError("observation lies in the future")
    if lag == 0:
        return sigma2
    return sigma2 * (1.0 + lag**alpha)


def admissible_alpha_tilde(kernel: KernelSpec, d: int) -> float:
    """Upper bound on ``alpha_tilde`` for sublinear regret with this kernel."""
    if kernel.family is KernelFamily.SQUARED_EXPONENTIAL:
        return 1.0 / 3.0
    nu = kernel.nu
    dd = d * (d + 1)
    return (2 * nu - dd) / (4 * nu + 2 * dd)


class WindowSchedule:
    """Lazily extended list of window start times, beginning at 1.

    With ``alpha == 0`` the environment is treated as stationary and the
    whole horizon is one window.
    """

    def __init__(self, alpha: float, alpha_tilde: float):
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        if not alpha_tilde > 0:
            raise ValueError("alpha_tilde must be positive")
        self.alpha = alpha
        self.alpha_tilde = alpha_tilde
        self.window_starts = [1]

    def _extend_to(self, t: int) -> None:
        if self.alpha == 0:
            return
        while self.window_starts[-1] <= t:
            last = self.window_starts[-1]
            self.window_starts.append(last + next_window_length(last, self.alpha, self.alpha_tilde))

    def is_window_start(self, t: int) -> bool:
        if t < 1:
            raise ValueError("t must be >= 1")
        self._extend_to(t)
        i = bisect.bisect_left(self.window_starts, t)
        return i < len(self.window_starts) and self.window_starts[i] == t

    def window_id(self, t: int) -> int:
        """Zero-based index of the window containing ``t``."""
        if t < 1:
            raise ValueError("t must be >= 1")
        self._extend_to(t)
        return bisect.bisect_right(self.window_starts, t) - 1

    def starts_up_to(self, t: int) -> list[int]:
        self._extend_to(t)
        return [s for s in self.window_starts if s <= t]
