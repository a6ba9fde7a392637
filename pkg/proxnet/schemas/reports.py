"""
Report schemas of the variational-inequality checks.
"""

from pydantic import BaseModel, Field


class VIResidualReport(BaseModel):
    """Per-layer residuals r_i = ‖x_i − T_i x_{i-1}‖ of a block point."""

    residuals: list[float] = Field(..., description="r_1 ... r_m")
    max_residual: float = Field(..., ge=0)

    def within(self, tol: float) -> bool:
        return self.max_residual <= tol


class MonotonicityReport(BaseModel):
    """Spectrum test of WS + (WS)ᵀ against 2."""

    monotone: bool
    max_eigenvalue: float
    min_eigenvalue: float
    margin: float = Field(..., description="2 minus the largest eigenvalue")


class ExistenceReport(BaseModel):
    """Finite-dimensional sufficient conditions for a nonempty solution set."""

    range_bounded: bool = Field(..., description="ran T is bounded")
    range_radius: float | None = Field(None, description="Radius of a ball containing ran T")
    some_domain_bounded: bool = Field(..., description="Some layer potential has bounded domain")
    weights_nonexpansive: bool = Field(..., description="Every ‖W_i‖ ≤ 1")
    kernel_min_singular_value: float = Field(..., description="σ_min(S − Wblkᵀ)")
    trivial_kernel: bool = Field(..., description="‖W_i‖ ≤ 1 and ker(S − Wblkᵀ) = {0}")
    conjugate_full_domain: bool = Field(
        ..., description="‖W_i‖ ≤ 1 and every conjugate potential is finite everywhere"
    )
    all_domains_bounded: bool = Field(..., description="Every layer potential has bounded domain")
    monotone: bool
    averagedness_certified: bool = Field(..., description="A certificate alpha exists")

    @property
    def existence_certified(self) -> bool:
        """Bounded range or domain with a certificate, or a kernel, conjugate or domain flag
        together with monotonicity.
        """
        bounded_family = self.averagedness_certified and (
            self.range_bounded or self.some_domain_bounded
        )
        monotone_family = self.monotone and (
            self.trivial_kernel or self.conjugate_full_domain or self.all_domains_bounded
        )
        return bounded_family or monotone_family

    def flags(self) -> dict[str, bool]:
        return {
            "range_bounded": self.range_bounded,
            "some_domain_bounded": self.some_domain_bounded,
            "trivial_kernel": self.trivial_kernel,
            "conjugate_full_domain": self.conjugate_full_domain,
            "all_domains_bounded": self.all_domains_bounded,
            "monotone": self.monotone,
            "averagedness_certified": self.averagedness_certified,
            "existence_certified": self.existence_certified,
        }


class BlockSolveReport(BaseModel):
    """Outcome of the block fixed-point iteration."""

    iterations: int
    converged: bool
    last_step: float
