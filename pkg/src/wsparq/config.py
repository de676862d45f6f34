"""Experiment configuration: JSON schema, validation and object construction."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .acquisition import DecisionGrid, benchmark_reward
from .algorithms import AlgorithmKind, LearnerConfig
from .environments import REGIMES, TARGET_MAPS, OpponentDrift, QuadraticLowerLevel, SyntheticBilevel
from .kernels import SUPPORTED_NU, KernelFamily, KernelSpec
from .windows import admissible_alpha_tilde


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists ``(field path, message)`` pairs."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("; ".join(f"{loc}: {msg}" for loc, msg in errors))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class KernelConfig(_Strict):
    family: KernelFamily = KernelFamily.MATERN
    nu: float = 1.5
    lengthscale: float = Field(0.2, gt=0)
    output_scale: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def _nu_supported(self):
        if self.family is KernelFamily.MATERN and self.nu not in SUPPORTED_NU:
            raise ValueError(f"nu must be one of {SUPPORTED_NU}")
        return self

    def build(self) -> KernelSpec:
        if self.family is KernelFamily.SQUARED_EXPONENTIAL:
            return KernelSpec.se(self.lengthscale, self.output_scale)
        return KernelSpec.matern(self.nu, self.lengthscale, self.output_scale)


class GridConfig(_Strict):
    low: float = 0.0
    high: float = 1.0
    resolution: int = Field(256, ge=2)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.high > self.low:
            raise ValueError("high must exceed low")
        return self


class SyntheticEnvConfig(_Strict):
    type: Literal["synthetic_bilevel"] = "synthetic_bilevel"
    regime: Literal[REGIMES] = "stationary"  # type: ignore[valid-type]
    sigma2: float = Field(0.01, gt=0)
    y_bound: float = Field(3.0, gt=0)

    def build(self):
        return SyntheticBilevel(self.regime, self.sigma2, benchmark_reward(self.y_bound))


class QuadraticEnvConfig(_Strict):
    type: Literal["quadratic_lower_level"]
    target: str = "linear"
    mu: float = Field(2.0, gt=0)
    sigma2: float = Field(0.01, gt=0)
    alpha: float = Field(0.0, ge=0)
    y_bound: float = Field(3.0, gt=0)

    @field_validator("target")
    @classmethod
    def _known_target(cls, v):
        if v not in TARGET_MAPS:
            raise ValueError(f"target must be one of {sorted(TARGET_MAPS)}")
        return v

    def build(self):
        return QuadraticLowerLevel(mu=self.mu, target=self.target, sigma2=self.sigma2,
                                   alpha=self.alpha, y_low=-self.y_bound, y_high=self.y_bound,
                                   reward=benchmark_reward(self.y_bound))


class OpponentEnvConfig(_Strict):
    type: Literal["opponent_drift"]
    alpha: float = Field(1.0, ge=0)
    drift_sigma: float = Field(0.1, ge=0)
    L_g: float = Field(0.1, gt=0)
    theta0: tuple[float, ...] = (1.0, 0.0)
    sigma2: float = Field(0.01, gt=0)
    y_bound: float = Field(3.0, gt=0)

    def build(self):
        return OpponentDrift(alpha=self.alpha, drift_sigma=self.drift_sigma, L_g=self.L_g,
                             theta0=tuple(self.theta0), sigma2=self.sigma2,
                             reward=benchmark_reward(self.y_bound, m=1))


EnvConfig = Annotated[Union[SyntheticEnvConfig, QuadraticEnvConfig, OpponentEnvConfig],
                      Field(discriminator="type")]


class AlgorithmConfig(_Strict):
    """One learner entry. ``name`` labels output files and seeds the run streams."""

    name: str = Field(min_length=1, pattern=r"^[A-Za-z0-9_.-]+$")
    kind: AlgorithmKind
    B: float = Field(2.0, ge=0)
    delta: float = Field(0.1, gt=0, lt=1)
    beta_denominator: Literal["k", "sigma"] = "sigma"
    alpha: float | None = Field(None, ge=0)
    alpha_tilde: float = Field(0.09, gt=0)
    sigma2: float | None = Field(None, gt=0)
    query_budget_scale: float = Field(1.0, gt=0)
    dpp_ground_set: Literal["window", "full_history"] = "window"
    eta: float = Field(0.1, gt=0)
    gamma: float = Field(0.05, ge=0, le=1)
    prior_mean: Literal["zero", "data_mean"] = "zero"

    def learner_config(self) -> LearnerConfig:
        return LearnerConfig(**self.model_dump(exclude={"name"}))


class ExperimentConfig(_Strict):
    name: str = "experiment"
    description: str = ""
    environment: EnvConfig = Field(default_factory=SyntheticEnvConfig)
    kernel: KernelConfig = Field(default_factory=KernelConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    algorithms: list[AlgorithmConfig] = Field(min_length=1)
    T: int = Field(ge=1)
    seeds: list[int] = Field(min_length=1)
    master_seed: int = Field(0, ge=0)
    output_dir: str = "results"

    @field_validator("seeds")
    @classmethod
    def _seeds_valid(cls, v):
        if len(set(v)) != len(v):
            raise ValueError("seeds must be distinct")
        if any(s < 0 for s in v):
            raise ValueError("seeds must be non-negative")
        return v

    @field_validator("algorithms")
    @classmethod
    def _names_unique(cls, v):
        names = [a.name for a in v]
        if len(set(names)) != len(names):
            raise ValueError("algorithm names must be unique")
        return v

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def admissibility_warnings(self) -> list[str]:
        """Windowed learners whose alpha_tilde is at or above the kernel's threshold."""
        kernel = self.kernel.build()
        bound = admissible_alpha_tilde(kernel, 1)
        out = []
        for a in self.algorithms:
            if a.kind not in (AlgorithmKind.WSPARQ_BL, AlgorithmKind.WSPARQ_SEQGAME):
                continue
            if not a.alpha_tilde < bound:
                out.append(f"{a.name}: alpha_tilde={a.alpha_tilde} is not below {bound:.6g} "
                           f"for this kernel; sublinear regret is not guaranteed")
        return out

    def build_environment(self):
        return self.environment.build()

    def build_grid(self) -> DecisionGrid:
        return DecisionGrid(self.grid.low, self.grid.high, self.grid.resolution, d=1)


def _location(loc: tuple) -> str:
    return ".".join(str(p) for p in loc) or "<root>"


def parse_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError([(_location(e["loc"]), e["msg"]) for e in exc.errors()]) from None


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError([("<file>", str(exc))]) from None
    if not isinstance(data, dict):
        raise ConfigError([("<root>", "config must be a JSON object")])
    return parse_config(data)
