"""
Certificate schemas.
"""

from enum import Enum

from pydantic import BaseModel, Field, field_validator


class ConditionUsed(str, Enum):
    """Which sufficient condition established the certificate."""

    ZERO_FACTOR = "zero_factor"
    NORM_BOUND = "norm_bound"
    ETA_CONDITION = "eta_condition"
    NONE = "none"


class Certificate(BaseModel):
    """Averagedness certificate of a network."""

    alpha: float | None = Field(None, description="Averagedness constant in [1/2, 1]")
    condition_used: ConditionUsed = Field(..., description="Condition that certified alpha")
    theta: list[float] = Field(..., description="theta_0 ... theta_m of the weight chain")
    eta: float | None = Field(None, description="eta found by the eta condition")
    mu: float | None = Field(None, description="Smallest eigenvalue of the symmetric part of W")

    @field_validator("alpha")
    @classmethod
    def validate_alpha(cls, v: float | None) -> float | None:
        """alpha must lie in [1/2, 1]."""
        if v is not None and not 0.5 <= v <= 1.0:
            raise ValueError("alpha must lie in [1/2, 1]")
        return v

    @field_validator("theta")
    @classmethod
    def validate_theta(cls, v: list[float]) -> list[float]:
        """theta starts at 1 and is nonnegative."""
        if not v or v[0] != 1.0:
            raise ValueError("theta_0 must equal 1")
        if any(t < 0 for t in v):
            raise ValueError("theta must be nonnegative")
        return v

    @property
    def certified(self) -> bool:
        return self.alpha is not None

    def to_text(self) -> str:
        """Single-line structured text: alpha, condition, theta list."""
        alpha = "none" if self.alpha is None else f"{self.alpha:.12g}"
        theta = "[" + ", ".join(f"{t:.12g}" for t in self.theta) + "]"
        parts = [f"alpha={alpha}", f"condition={self.condition_used.value}", f"theta={theta}"]
        if self.eta is not None:
            parts.append(f"eta={self.eta:.12g}")
        if self.mu is not None:
            parts.append(f"mu={self.mu:.12g}")
        return " ".join(parts)


class LayerwiseCertificate(BaseModel):
    """Per-layer averagedness constants beta_i of a square network."""

    betas: list[float] | None = Field(None, description="Smallest grid beta per layer")
    failed_layer: int | None = Field(None, description="First layer without a beta (1-indexed)")
    composite_alpha: float | None = Field(
        None, description="Averagedness constant of the composition of the layers"
    )

    @property
    def certified(self) -> bool:
        return self.betas is not None
