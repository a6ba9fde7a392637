"""
Relaxation, stopping and perturbation schemas for the iteration engine.
"""

import math
from enum import Enum
from typing import Literal

from pydantic import BaseModel, Field, model_validator

from proxnet.core.config import settings


class ScheduleMode(str, Enum):
    """Families of relaxation sequences."""

    CONSTANT = "constant"
    AVERAGED = "averaged"
    MARGIN = "margin"


class RelaxationSchedule(BaseModel):
    """
    Relaxation parameters λ_n.

    - constant: λ_n = value
    - averaged: λ_n = value ∈ (0, 1/α), or, when d is given,
      λ_n = 1/α − d/(n+1) clipped to [ε, 1/α − ε]; declared interval (0, 1/α)
    - margin: λ_n = value ∈ [ε, (1−ε)(ε + 1/α)]
    """

    mode: ScheduleMode = ScheduleMode.CONSTANT
    value: float | None = Field(1.0, description="Constant relaxation parameter")
    alpha: float | None = Field(None, description="Averagedness constant of the network")
    d: float | None = Field(None, gt=0, description="Decay coefficient of the 1/(n+1) family")
    epsilon: float | None = Field(None, gt=0, description="Margin from the interval ends")

    @model_validator(mode="after")
    def validate_mode(self) -> "RelaxationSchedule":
        """Check the parameters each mode needs."""
        if self.mode is ScheduleMode.CONSTANT:
            if self.value is None or self.value <= 0:
                raise ValueError("constant schedule needs value > 0")
            return self

        if self.alpha is None or not 0.5 <= self.alpha <= 1.0:
            raise ValueError(f"{self.mode.value} schedule needs alpha in [1/2, 1]")
        inv = 1.0 / self.alpha

        if self.mode is ScheduleMode.AVERAGED:
            if self.d is None:
                if self.value is None or not 0.0 < self.value < inv:
                    raise ValueError("averaged schedule needs value in (0, 1/alpha)")
            elif self.epsilon is None or not self.epsilon < inv / 2.0:
                raise ValueError("averaged decay schedule needs epsilon in (0, 1/(2 alpha))")
            return self

        eps = self.epsilon
        if eps is None or not eps < 0.5:
            raise ValueError("margin schedule needs epsilon in (0, 1/2)")
        if self.value is None or not eps <= self.value <= (1.0 - eps) * (eps + inv):
            raise ValueError("margin schedule needs value in [eps, (1-eps)(eps + 1/alpha)]")
        return self

    def interval(self) -> tuple[float, float, bool, bool]:
        """Declared interval as (lower, upper, lower_closed, upper_closed)."""
        if self.mode is ScheduleMode.CONSTANT:
            assert self.value is not None
            return self.value, self.value, True, True
        assert self.alpha is not None
        inv = 1.0 / self.alpha
        if self.mode is ScheduleMode.AVERAGED:
            return 0.0, inv, False, False
        assert self.epsilon is not None
        eps = self.epsilon
        return eps, (1.0 - eps) * (eps + inv), True, True

    def contains(self, lam: float) -> bool:
        lo, hi, lo_closed, hi_closed = self.interval()
        above = lam >= lo if lo_closed else lam > lo
        below = lam <= hi if hi_closed else lam < hi
        return math.isfinite(lam) and above and below

    def lambda_at(self, n: int) -> float:
        """λ_n for iteration index n ≥ 0."""
        if self.mode is ScheduleMode.AVERAGED and self.d is not None:
            assert self.alpha is not None and self.epsilon is not None
            inv = 1.0 / self.alpha
            raw = inv - self.d / (n + 1)
            return min(max(raw, self.epsilon), inv - self.epsilon)
        assert self.value is not None
        return self.value


class StopCriteria(BaseModel):
    """When an iteration stops."""

    tol: float = Field(default_factory=lambda: settings.DEFAULT_TOL, gt=0)
    max_iter: int = Field(default_factory=lambda: settings.DEFAULT_MAX_ITER, ge=0)
    divergence_norm: float = Field(default_factory=lambda: settings.DIVERGENCE_NORM, gt=0)


class PerturbationSchedule(BaseModel):
    """
    Summable layer perturbations with decay 1/(n+1)².

    W_{i,n} = W_i + ω_n D_i, b_{i,n} = b_i + ν_n e_i and
    R_{i,n}x = (1 − ρ_n) R_i x + η_n u_i, so that ‖R_{i,n}x − R_i x‖ ≤ ρ_n‖x‖ + η_n.
    """

    c_omega: float = Field(0.0, ge=0, description="Weight perturbation constant")
    c_rho: float = Field(0.0, ge=0, description="Activation shrink constant")
    c_eta: float = Field(0.0, ge=0, description="Activation shift constant")
    c_nu: float = Field(0.0, ge=0, description="Bias perturbation constant")
    directions: Literal["ones", "random"] = "ones"
    seed: int = 0

    @staticmethod
    def _decay(c: float, n: int) -> float:
        return c / float(n + 1) ** 2

    def omega(self, n: int) -> float:
        return self._decay(self.c_omega, n)

    def rho(self, n: int) -> float:
        return self._decay(self.c_rho, n)

    def eta(self, n: int) -> float:
        return self._decay(self.c_eta, n)

    def nu(self, n: int) -> float:
        return self._decay(self.c_nu, n)

    @property
    def is_zero(self) -> bool:
        return self.c_omega == self.c_rho == self.c_eta == self.c_nu == 0.0
