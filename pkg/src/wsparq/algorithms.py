"""Learners as step-wise state machines, and the episode driver.

Every learner exposes ``step(t) -> StepRecord``: it chooses an action, plays
it against the environment, and records what it observed. ``run_episode``
turns a sequence of steps into a ``RegretTrace``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from . import gp
from .acquisition import DecisionGrid, select_action
from .dpp import greedy_dpp_select, query_budget
from .environments import Environment, oracle_optimum, true_values
from .kernels import KernelSpec
from .trace import RegretTrace
from .windows import WindowSchedule, variance_proxy


class AlgorithmKind(str, Enum):
    GP_UCB = "gp_ucb"
    GP_UCBL = "gp_ucbl"
    WSPARQ_BL = "wsparq_bl"
    WSPARQ_SEQGAME = "wsparq_seqgame"
    HEDGE = "hedge"
    EXP3 = "exp3"


@dataclass(frozen=True)
class LearnerConfig:
    """Hyperparameters for any learner; fields a learner does not use are ignored.

    ``alpha`` and ``sigma2`` default to the environment's values when None.
    """

    kind: AlgorithmKind
    B: float = 2.0
    delta: float = 0.1
    beta_denominator: gp.BetaDenominator = gp.BetaDenominator.SIGMA
    alpha: float | None = None
    alpha_tilde: float = 0.09
    sigma2: float | None = None
    query_budget_scale: float = 1.0
    dpp_ground_set: str = "window"
    eta: float = 0.1
    gamma: float = 0.05
    prior_mean: str = "zero"

    def __post_init__(self):
        object.__setattr__(self, "kind", AlgorithmKind(self.kind))
        object.__setattr__(self, "beta_denominator", gp.BetaDenominator(self.beta_denominator))
        if self.dpp_ground_set not in ("window", "full_history"):
            raise ValueError("dpp_ground_set must be 'window' or 'full_history'")
        if self.prior_mean not in ("zero", "data_mean"):
            raise ValueError("prior_mean must be 'zero' or 'data_mean'")


@dataclass
class StepRecord:
    x: np.ndarray
    y: np.ndarray
    beta: float
    N: int
    window_id: int
    state: object = None


class GPUCBL:
    """Optimistic bilevel GP learner on the full history with constant noise."""

    def __init__(self, config: LearnerConfig, env: Environment, kernel: KernelSpec,
                 grid: DecisionGrid, rng: np.random.Generator):
        self.config = config
        self.env = env
        self.kernel = kernel
        self.grid = grid
        self.rng = rng
        self.sigma2 = env.sigma2 if config.sigma2 is None else config.sigma2
        self.obs = gp.ObservationSet(env.d, env.m)
        self.N = 0

    def posterior(self, t: int) -> tuple[gp.PosteriorModel, float]:
        offset = None
        if self.config.prior_mean == "data_mean" and len(self.obs):
            offset = self.obs.Y.mean(axis=0)
        model = gp.fit(self.kernel, self.obs, offset)
        b = gp.beta(self.kernel, self.obs, self.config.delta, self.config.B, self.env.m,
                    self.config.beta_denominator)
        return model, b

    def step(self, t: int) -> StepRecord:
        model, b = self.posterior(t)
        x, _ = select_action(model, b, self.env.reward, self.grid)
        y = self.env.observe(x, t, self.rng)
        self.obs.append(x, y, t, self.sigma2)
        return StepRecord(x, y, b, self.N, 0, self.env.state(t))


class GPUCB(GPUCBL):
    """Classic GP-UCB. With the optimistic box rule it coincides with GP-UCBL."""


class WSparQBL(GPUCBL):
    """Windowed learner with sparse re-queries at each window start.

    At a window start the learner picks a diverse subset of the current
    window's inputs by greedy DPP, re-observes them at the current time, and
    restarts the window dataset from those fresh values. Noise proxies grow
    with the lag since acquisition.
    """

    def __init__(self, config, env, kernel, grid, rng):
        super().__init__(config, env, kernel, grid, rng)
        self.alpha = env.alpha if config.alpha is None else config.alpha
        self.schedule = WindowSchedule(self.alpha, config.alpha_tilde)
        self.history: list[np.ndarray] = []
        # (t, budget, n_candidates, n_selected) per window start, for audits
        self.refreshes: list[tuple[int, int, int, int]] = []

    def _candidates(self) -> np.ndarray:
        if self.config.dpp_ground_set == "full_history":
            return np.array(self.history).reshape(len(self.history), self.env.d)
        return self.obs.X

    def refresh(self, t: int) -> None:
        cands = self._candidates()
        budget = query_budget(t, self.kernel, self.env.d, self.config.query_budget_scale)
        chosen = greedy_dpp_select(self.kernel, cands, budget) if len(cands) else []
        self.refreshes.append((t, budget, len(cands), len(chosen)))
        self.obs.clear()
        for i in chosen:
            x = cands[i]
            self.obs.append(x, self.env.observe(x, t, self.rng), t, self.sigma2)
        self.N += len(chosen)

    def posterior(self, t):
        self.obs.variance_proxies[:] = [variance_proxy(a, t, self.sigma2, self.alpha)
                                        for a in self.obs.acquired_at]
        return super().posterior(t)

    def step(self, t: int) -> StepRecord:
        if self.schedule.is_window_start(t):
            self.refresh(t)
        model, b = self.posterior(t)
        x, _ = select_action(model, b, self.env.reward, self.grid)
        y = self.env.observe(x, t, self.rng)
        self.obs.append(x, y, t, self.sigma2)
        self.history.append(x)
        return StepRecord(x, y, b, self.N, self.schedule.window_id(t), self.env.state(t))


class WSparQSeqGame(WSparQBL):
    """Windowed learner for a sequential game with a scalar response.

    The opponent's drift is folded into the lag-dependent noise, so the GP
    input is the action alone; the opponent type is recorded after acting.
    """

    def __init__(self, config, env, kernel, grid, rng):
        if env.m != 1:
            raise ValueError("sequential-game learner expects a scalar response")
        super().__init__(config, env, kernel, grid, rng)


class Hedge:
    """Exponential weights over grid arms with full-information losses."""

    full_information = True

    def __init__(self, config: LearnerConfig, env: Environment, kernel, grid: DecisionGrid,
                 rng: np.random.Generator, algo_rng: np.random.Generator | None = None):
        self.config = config
        self.env = env
        self.grid = grid
        self.rng = rng
        self.algo_rng = algo_rng if algo_rng is not None else rng
        self.log_w = np.zeros(len(grid))
        self.N = 0

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_w)

    def probabilities(self) -> np.ndarray:
        return np.exp(self.log_w - logsumexp(self.log_w))

    def _update(self, t, i, x, y, p) -> None:
        losses = -true_values(self.env, t, self.grid)
        self.log_w -= self.config.eta * losses
        self.log_w -= logsumexp(self.log_w)

    def step(self, t: int) -> StepRecord:
        p = self.probabilities()
        i = int(self.algo_rng.choice(len(p), p=p))
        x = self.grid.points[i].copy()
        y = self.env.observe(x, t, self.rng)
        self._update(t, i, x, y, p)
        return StepRecord(x, y, math.nan, 0, 0, self.env.state(t))


class Exp3(Hedge):
    """Bandit exponential weights with importance-weighted loss of the played arm.

    Plays from ``(1 - gamma) * w / sum(w) + gamma / K``.
    """

    full_information = False

    def probabilities(self) -> np.ndarray:
        K = len(self.log_w)
        return (1.0 - self.config.gamma) * super().probabilities() + self.config.gamma / K

    def _update(self, t, i, x, y, p) -> None:
        loss = -self.env.reward(x, y)
        self.log_w[i] -= self.config.eta * loss / p[i]
        self.log_w -= logsumexp(self.log_w)


LEARNERS = {
    AlgorithmKind.GP_UCB: GPUCB,
    AlgorithmKind.GP_UCBL: GPUCBL,
    AlgorithmKind.WSPARQ_BL: WSparQBL,
    AlgorithmKind.WSPARQ_SEQGAME: WSparQSeqGame,
    AlgorithmKind.HEDGE: Hedge,
    AlgorithmKind.EXP3: Exp3,
}


def make_learner(config: LearnerConfig, env: Environment, kernel: KernelSpec,
                 grid: DecisionGrid, obs_rng: np.random.Generator,
                 algo_rng: np.random.Generator | None = None):
    cls = LEARNERS[config.kind]
    if issubclass(cls, Hedge):
        return cls(config, env, kernel, grid, obs_rng, algo_rng)
    return cls(config, env, kernel, grid, obs_rng)


def run_episode(config: LearnerConfig, env: Environment, T: int, seed,
                kernel: KernelSpec | None = None, grid: DecisionGrid | None = None,
                learner_out: list | None = None) -> RegretTrace:
    """Play ``T`` steps and account dynamic regret on noiseless responses.

    ``seed`` is an int or a ``numpy.random.SeedSequence``; it is split into
    independent streams for observation noise, the environment and the
    learner's own randomness. If ``learner_out`` is a list, the learner is
    appended to it for inspection.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    kernel = KernelSpec() if kernel is None else kernel
    grid = DecisionGrid(d=env.d) if grid is None else grid
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    obs_ss, env_ss, algo_ss = ss.spawn(3)
    world = env.realize(np.random.default_rng(env_ss))
    learner = make_learner(config, world, kernel, grid, np.random.default_rng(obs_ss),
                           np.random.default_rng(algo_ss))
    if learner_out is not None:
        learner_out.append(learner)

    xs = np.empty((T, env.d))
    ys = np.empty((T, env.m))
    r = np.empty(T)
    N = np.empty(T, dtype=int)
    betas = np.empty(T)
    wid = np.empty(T, dtype=int)
    states = []
    for k in range(T):
        t = k + 1
        rec = learner.step(t)
        _, f_star = oracle_optimum(world, t, grid)
        f_played = world.reward(rec.x, world.response(rec.x, t))
        xs[k], ys[k] = rec.x, rec.y
        r[k] = f_star - f_played
        N[k], betas[k], wid[k] = rec.N, rec.beta, rec.window_id
        states.append(rec.state)
    return RegretTrace(t=np.arange(1, T + 1), window_id=wid, x=xs, y=ys, r=r,
                       R=np.cumsum(r), N=N, beta=betas, states=states)


def run_policy(policy, env: Environment, T: int, grid: DecisionGrid | None = None,
               seed=0) -> RegretTrace:
    """Regret of a fixed policy ``policy(t) -> action``; used for sanity baselines."""
    grid = DecisionGrid(d=env.d) if grid is None else grid
    world = env.realize(np.random.default_rng(seed))
    rng = np.random.default_rng(seed)
    rows = []
    for t in range(1, T + 1):
        x = np.atleast_1d(np.asarray(policy(t), dtype=float))
        _, f_star = oracle_optimum(world, t, grid)
        y = world.observe(x, t, rng)
        rows.append((x, y, f_star - world.reward(x, world.response(x, t))))
    r = np.array([row[2] for row in rows])
    return RegretTrace(t=np.arange(1, T + 1), window_id=np.zeros(T, dtype=int),
                       x=np.array([row[0] for row in rows]), y=np.array([row[1] for row in rows]),
                       r=r, R=np.cumsum(r), N=np.zeros(T, dtype=int), beta=np.full(T, math.nan))


def simulate_query_counts(T: int, kernel: KernelSpec, d: int, alpha: float,
                          alpha_tilde: float, c_q: float = 1.0) -> np.ndarray:
    """Cumulative additional-query counts ``N_t`` without fitting any model.

    Assumes every candidate is distinct, so each window start queries
    ``min(budget, candidates)`` where the candidates are the previous refresh
    plus the actions played in the previous window.
    """
    schedule = WindowSchedule(alpha, alpha_tilde)
    N = np.zeros(T, dtype=np.int64)
    total = 0
    window_size = 0
    for t in range(1, T + 1):
        if schedule.is_window_start(t):
            chosen = min(query_budget(t, kernel, d, c_q), window_size)
            total += chosen
            window_size = chosen
        window_size += 1
        N[t - 1] = total
    return N


def with_overrides(config: LearnerConfig, **kw) -> LearnerConfig:
    return replace(config, **kw)
