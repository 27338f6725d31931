"""
Sorkin scenario models: Alice at h, Charlie's lab K with mode f, Bob at g
"""

from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from models.propagators import PairingContext
from models.spacetime import BumpFunction, CausalSet, Event2D, Grid2D, Region


# Delta(g, h) of spacelike supports is zero up to rounding
_SPACELIKE_ATOL = 1e-12


class SpacetimeKind(str, Enum):
    CAUSET = "causet"
    CONTINUUM = "continuum"


class SorkinScenario(BaseModel):
    """
    Test functions f (Charlie), h (Alice) and g (Bob) with their pairings

    On causal sets f, g, h are vectors over the points; on continuum grids
    g and h are bumps and f is a bump or a grid array.
    """
    kind: SpacetimeKind
    causet: Optional[CausalSet] = None
    grid: Optional[Grid2D] = None
    mass: float = Field(0.0, ge=0.0)
    density: Optional[float] = Field(None, gt=0.0)
    lab: Region
    f: Union[BumpFunction, np.ndarray]
    g: Union[BumpFunction, np.ndarray]
    h: Union[BumpFunction, np.ndarray]
    x_plus: Union[int, Event2D] = Field(..., description="Bob's point in the out-region")
    x_minus: Union[int, Event2D] = Field(..., description="Alice's point in the in-region")
    d_fg: float
    d_fh: float
    d_gh: float
    ctx: Optional[PairingContext] = Field(None, description="None for massless continuum fields")
    validated: Tuple[str, ...] = Field(default=(), description="Checks passed during construction")

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @model_validator(mode='after')
    def check_scenario(self):
        if self.kind == SpacetimeKind.CAUSET and self.causet is None:
            raise ValueError("causal-set scenarios carry their causal set")
        if self.kind == SpacetimeKind.CONTINUUM and self.grid is None:
            raise ValueError("continuum scenarios carry their grid")
        if abs(self.d_gh) > _SPACELIKE_ATOL:
            raise ValueError(f"Alice and Bob are not spacelike: Delta(g,h) = {self.d_gh:.3g}")
        if self.d_fg == 0.0 or self.d_fh == 0.0:
            raise ValueError("Charlie's mode must couple to both Alice and Bob")
        return self


class ScenarioSearchResult(BaseModel):
    """A scenario, or the reason none exists (a legitimate outcome)"""
    found: bool
    scenario: Optional[SorkinScenario] = None
    reason: str = ""
    candidates_examined: int = 0


class SignalScan(BaseModel):
    s_grid: np.ndarray
    t: float
    chi: np.ndarray = Field(..., description="Complex chi(s) per s")
    chi_zero: complex
    max_gap: float = Field(..., ge=0.0)

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator('chi_zero', mode='before')
    @classmethod
    def as_complex(cls, v):
        return complex(v)


class AcausalityResult(BaseModel):
    """Strongest signal found over a t grid"""
    t_best: float
    max_gap: float = Field(..., ge=0.0)
    profile: List[Tuple[float, float]] = Field(default_factory=list, description="(t, max gap) per scanned t")


class Phi2ClosedForm(BaseModel):
    """Bob's expectation with and without Alice's kick, for a phi(f)^2 kick by Charlie"""
    lhs: complex
    rhs: complex
    phase: float = Field(..., description="2 s t Delta(f,g) Delta(f,h)")

    model_config = {"arbitrary_types_allowed": True}

    @field_validator('lhs', 'rhs', mode='before')
    @classmethod
    def as_complex(cls, v):
        return complex(v)


class MasslessDecomposition(BaseModel):
    """phi(u, v) = U(u) + V(v) on the lattice, gauge V(v_0) = 0"""
    u_axis: np.ndarray
    U: np.ndarray
    v_axis: np.ndarray
    V: np.ndarray
    residual: float = Field(..., ge=0.0)
    wave_residual: float = Field(..., ge=0.0)

    model_config = {"arbitrary_types_allowed": True, "frozen": True}


class SpacelikeStrips(BaseModel):
    """The two nonzero strips of a massless mode on either side of the source"""
    s_plus: np.ndarray = Field(..., description="Grid mask of the strip toward Bob")
    s_minus: np.ndarray = Field(..., description="Grid mask of the strip toward Alice")
    u_bounds: Tuple[float, float]
    v_bounds: Tuple[float, float]
    found: bool
    mutually_spacelike: bool

    model_config = {"arbitrary_types_allowed": True, "frozen": True}
