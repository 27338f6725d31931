"""
Gaussian ground-state densities for a smeared field
"""

import math

from pydantic import BaseModel, Field, field_validator

from models.propagators import PairingContext


class GaussianDensityP(BaseModel):
    """Outcome density of phi(f) in the vacuum: centred Gaussian of variance W(f,f)"""
    width_sq: float = Field(..., gt=0.0, description="W(f, f)")

    model_config = {"frozen": True}


class ComplexDensityQ(BaseModel):
    """
    Complex density q with <zeta(phi(f)) exp(i t phi(g))> = integral of zeta q

    A Gaussian in lambda whose centre i t W(f,g) is shifted into the
    complex plane.
    """
    w_ff: float = Field(..., ge=0.0, description="W(f, f); zero is rejected by the services")
    w_gg: float = Field(..., ge=0.0, description="W(g, g)")
    w_fg: complex = Field(..., description="W(f, g)")
    t: float = Field(0.0, description="Strength of Bob's observable exp(i t phi(g))")

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator('w_fg', mode='before')
    @classmethod
    def as_complex(cls, v):
        return complex(v)

    @classmethod
    def from_context(cls, ctx: PairingContext, t: float) -> "ComplexDensityQ":
        return cls(w_ff=ctx.w_ff, w_gg=ctx.w_gg, w_fg=ctx.w_fg, t=t)

    @property
    def centre(self) -> complex:
        """i t W(f, g)"""
        return 1j * self.t * self.w_fg

    @property
    def damping(self) -> float:
        """exp(-t^2 W(g,g) / 2)"""
        return math.exp(-0.5 * self.t * self.t * self.w_gg)
