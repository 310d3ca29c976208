"""
JSON run-config schema.

A run config names the model and carries one optional section per analysis:

    {
      "model": {"model": "wright_fisher", "alpha": 0, "beta": 0, "k": 0.5, "phases": 4},
      "simulation": {"step": 0.001, "horizon": 1.0, "paths": 1, "seed": 7},
      "density": {"t": 1.0, "x": 0.5, "interval": [0.75, 1.0]},
      "bvp": {"c": 0.25, "d": 0.75, "grid": 400, "refine": false}
    }

Validation errors name the offending field.
"""

import json
from pathlib import Path
from typing import Annotated, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.errors import ParameterError
from src.models.base import SwitchingDiffusionModel
from src.models.ornstein_uhlenbeck import ornstein_uhlenbeck_model
from src.models.wright_fisher import WrightFisherParams, wright_fisher_model
from src.montecarlo.engine import BoundaryPolicy, SimConfig


class WrightFisherConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: Literal["wright_fisher"] = "wright_fisher"
    alpha: float = Field(gt=-1.0)
    beta: float = Field(gt=-1.0)
    k: float
    phases: int = Field(ge=1)

    @model_validator(mode="after")
    def _check_k(self) -> "WrightFisherConfig":
        if not 0.0 < self.k < self.beta + 1.0:
            raise ValueError(
                f"k: constraint 0 < k < beta + 1 violated (k={self.k}, beta={self.beta})"
            )
        return self

    def params(self) -> WrightFisherParams:
        return WrightFisherParams(self.alpha, self.beta, self.k, self.phases)


class OrnsteinUhlenbeckConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: Literal["ornstein_uhlenbeck"] = "ornstein_uhlenbeck"


ModelConfig = Annotated[
    WrightFisherConfig | OrnsteinUhlenbeckConfig, Field(discriminator="model")
]


class SimulationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    step: float = Field(default=1e-3, gt=0.0)
    horizon: float = Field(default=1.0, gt=0.0)
    paths: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    boundary_policy: BoundaryPolicy = BoundaryPolicy.AUTO
    x0: float = 0.5
    phase0: int = Field(default=1, ge=1)
    burn_in: float = Field(default=0.0, ge=0.0)
    bins: int = Field(default=20, ge=1)

    def sim_config(self) -> SimConfig:
        return SimConfig(
            step=self.step,
            horizon=self.horizon,
            n_paths=self.paths,
            seed=self.seed,
            boundary_policy=self.boundary_policy,
        )


class DensityConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t: float = Field(default=1.0, gt=0.0)
    x: float = Field(default=0.5, gt=0.0, lt=1.0)
    interval: tuple[float, float] | None = None
    # y points of density.csv
    grid: int = Field(default=200, ge=2)


class BvpConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    c: float = 0.25
    d: float = 0.75
    grid: int | None = Field(default=None, ge=16)
    refine: bool = False

    @model_validator(mode="after")
    def _check_order(self) -> "BvpConfig":
        if not self.c < self.d:
            raise ValueError(f"c: must be below d (c={self.c}, d={self.d})")
        return self


class RecurrenceConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    epsilons: list[float] = Field(default_factory=lambda: [0.04, 0.02, 0.01, 0.005], min_length=3)
    target: float | None = None
    grid: int = Field(default=800, ge=16)


class InvariantConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid: int = Field(default=4001, ge=3)


class ThresholdConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # empty means the model's own k
    k_values: list[float] = Field(default_factory=list)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: ModelConfig
    truncation: int | None = Field(default=None, ge=1)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    density: DensityConfig = Field(default_factory=DensityConfig)
    bvp: BvpConfig = Field(default_factory=BvpConfig)
    recurrence: RecurrenceConfig = Field(default_factory=RecurrenceConfig)
    invariant: InvariantConfig = Field(default_factory=InvariantConfig)
    thresholds: ThresholdConfig = Field(default_factory=ThresholdConfig)


def load_run_config(path: str | Path) -> RunConfig:
    """Read a run config, or the config recorded in a run manifest."""
    data: Any = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict) and "command" in data and "config" in data:
        data = data["config"]
    return RunConfig.model_validate(data)


def build_model(cfg: RunConfig) -> SwitchingDiffusionModel:
    if isinstance(cfg.model, WrightFisherConfig):
        return wright_fisher_model(cfg.model.params())
    return ornstein_uhlenbeck_model()


def wright_fisher_params(cfg: RunConfig, command: str) -> WrightFisherParams:
    """Parameters for commands that only exist for the Wright-Fisher model."""
    if not isinstance(cfg.model, WrightFisherConfig):
        raise ParameterError("model", f"{command} needs model 'wright_fisher', got '{cfg.model.model}'")
    return cfg.model.params()
