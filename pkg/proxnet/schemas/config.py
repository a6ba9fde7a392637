"""
Pydantic schemas for experiment configuration files.
"""

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from proxnet.core.config import settings
from proxnet.schemas.schedule import PerturbationSchedule, RelaxationSchedule, StopCriteria

# A matrix or vector is given inline or as a path relative to the config file.
MatrixSource = list[float] | list[list[float]] | str
VectorSource = list[float] | str


class LayerConfig(BaseModel):
    """One layer: weights, bias and activation descriptor."""

    model_config = ConfigDict(extra="forbid")

    rows: int = Field(..., ge=1, description="Output dimension")
    cols: int = Field(..., ge=1, description="Input dimension")
    weights: MatrixSource = Field(..., description="Row-major entries or a matrix file path")
    bias: VectorSource | None = Field(default=None, description="Bias, zeros when omitted")
    activation: Any = Field(default="identity", description="Activation descriptor")

    @field_validator("weights")
    @classmethod
    def validate_weights(cls, v: MatrixSource) -> MatrixSource:
        """Reject empty inline matrices."""
        if isinstance(v, list) and not v:
            raise ValueError("weights must not be empty")
        return v


class NetworkConfig(BaseModel):
    """Ordered layers of the network."""

    model_config = ConfigDict(extra="forbid")

    layers: list[LayerConfig] = Field(..., min_length=1)


class StartConfig(BaseModel):
    """Starting point x0 of the iteration."""

    model_config = ConfigDict(extra="forbid")

    x0: VectorSource | Literal["zeros", "random"] = "zeros"


class CertifyConfig(BaseModel):
    """Grid parameters of the certifier."""

    model_config = ConfigDict(extra="forbid")

    alpha_step: float = Field(default_factory=lambda: settings.ALPHA_GRID_STEP, gt=0, le=0.5)
    eta_grid: int = Field(default_factory=lambda: settings.ETA_GRID_POINTS, ge=2)


class OutputConfig(BaseModel):
    """Optional output files."""

    model_config = ConfigDict(extra="forbid")

    trace: str | None = None
    certificate: str | None = None
    bounds: str | None = None


class ExperimentConfig(BaseModel):
    """A complete experiment: network, schedule, stopping rule, perturbation and outputs."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED)
    network: NetworkConfig
    schedule: RelaxationSchedule = Field(default_factory=RelaxationSchedule)
    stop: StopCriteria = Field(default_factory=StopCriteria)
    start: StartConfig = Field(default_factory=StartConfig)
    reference: VectorSource | None = None
    perturbation: PerturbationSchedule | None = None
    certify: CertifyConfig = Field(default_factory=CertifyConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def seed_perturbation(self) -> "ExperimentConfig":
        """Random perturbation directions follow the experiment seed."""
        if self.perturbation is not None and "seed" not in self.perturbation.model_fields_set:
            self.perturbation = self.perturbation.model_copy(update={"seed": self.seed})
        return self
