"""
Plans and results of the Monte Carlo recovery of <exp(i t phi(g))> from
L2-Kraus measurement outcomes
"""

import math
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from models.kraus import L2KernelSpec


def chebyshev_bound(variance: float, epsilon: float, delta: float) -> int:
    """ceil(variance / (epsilon^2 delta)), at least 1"""
    if epsilon <= 0 or delta <= 0:
        raise ValueError("epsilon and delta must be positive")
    # rounding keeps exact quotients such as 1000.0000000000001 at 1000
    return max(1, math.ceil(round(variance / (epsilon * epsilon * delta), 9)))


class EstimatorPlan(BaseModel):
    """
    Sample size and inputs of one estimate

    kernel None stands for a point-mass |k|^2, i.e. an exact measurement of
    phi(g) with no added noise.
    """
    t: float
    kernel: Optional[L2KernelSpec] = None
    w_gg: float = Field(..., ge=0.0, description="W(g, g)")
    epsilon: float = Field(..., gt=0.0)
    delta: float = Field(..., gt=0.0, lt=1.0)
    variance: float = Field(..., ge=0.0, description="E|eta - mu|^2")
    n_samples: int = Field(..., ge=1)
    seed: int = Field(0, ge=0)

    @model_validator(mode='after')
    def enough_samples(self):
        needed = chebyshev_bound(self.variance, self.epsilon, self.delta)
        if self.n_samples < needed:
            raise ValueError(f"{self.n_samples} samples are fewer than the Chebyshev bound {needed}")
        return self


class EstimateResult(BaseModel):
    mean: complex
    target: complex
    error: float = Field(..., ge=0.0)
    passed: bool

    model_config = {"arbitrary_types_allowed": True}

    @field_validator('mean', 'target', mode='before')
    @classmethod
    def as_complex(cls, v):
        return complex(v)


class ReplicationRow(BaseModel):
    replication: int
    estimate: EstimateResult


class ReplicationTable(BaseModel):
    """Seeded replications of one plan"""
    plan: EstimatorPlan
    rows: List[ReplicationRow]
    pass_rate: float = Field(..., ge=0.0, le=1.0)
    grand_mean: complex
    standard_error: float = Field(..., ge=0.0)

    model_config = {"arbitrary_types_allowed": True}

    @field_validator('grand_mean', mode='before')
    @classmethod
    def as_complex(cls, v):
        return complex(v)
