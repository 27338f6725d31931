"""
Experiment configuration driving the command-line runs
Every field has a flat key=value text form; see services.persistence
"""

from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class SpacetimeSource(str, Enum):
    FOUR_POINT = "four_point"
    SPRINKLE = "sprinkle"
    FILE = "file"
    CONTINUUM = "continuum"


class OracleChoice(str, Enum):
    NONE = "none"
    FOCK = "fock"


# Fields whose text form "none" means unset
_NULLABLE = ("causet_file", "lab_rect", "rt_t")


def _split_floats(v) -> Tuple[float, ...]:
    """'a,b,c' or 'start:stop:count' (inclusive linspace) as a float tuple"""
    if isinstance(v, str):
        text = v.strip()
        if not text:
            return ()
        if ":" in text:
            start, stop, count = text.split(":")
            return tuple(float(x) for x in np.linspace(float(start), float(stop), int(count)))
        return tuple(float(x) for x in text.split(","))
    return tuple(float(x) for x in v)


def _split_ints(v) -> Tuple[int, ...]:
    if isinstance(v, str):
        return tuple(int(x) for x in v.split(",") if x.strip())
    return tuple(int(x) for x in v)


class ExperimentConfig(BaseModel):
    """
    One experiment: the spacetime, Charlie's mode and lab, the operation
    families and the scan grids

    Unknown keys are rejected, so typos in config files fail loudly.
    """
    # Spacetime
    spacetime: SpacetimeSource = Field(SpacetimeSource.FOUR_POINT, description="Where the spacetime comes from")
    t_range: Tuple[float, float] = Field((0.0, 4.0), description="Sprinkling time interval")
    x_range: Tuple[float, float] = Field((-2.0, 2.0), description="Sprinkling space interval")
    density: float = Field(4.0, gt=0.0, description="Sprinkling density, also the Green-function density")
    causet_file: Optional[str] = Field(None, description="Causal set text file for spacetime=file")
    grid: Tuple[float, float, float, float] = Field(
        (-3.0, 3.0, -3.0, 3.0),
        description="Continuum lattice extent (t_min, t_max, x_min, x_max)"
    )
    grid_spacing: float = Field(0.05, gt=0.0)

    # Field
    mass: float = Field(0.0, ge=0.0)

    # Charlie's mode and lab
    f_points: Tuple[int, ...] = Field((1, 2), description="f is the sum of unit vectors at these points")
    lab_points: Tuple[int, ...] = Field((1, 2), description="Causal-set lab K")
    f_bump: Tuple[float, float, float] = Field((0.0, 0.0, 0.5), description="Continuum f as (t0, x0, radius)")
    lab_rect: Optional[Tuple[float, float, float, float]] = Field(None, description="Continuum lab (t0, t1, x0, x1)")

    # Operations
    kraus: str = Field("kick:square", description="Charlie's Kraus family literal")
    resolution: str = Field("uniform:w=1", description="Resolution literal for rt and the oscillator")
    shift: float = Field(0.3, description="Shift tested by the causality verdict")

    # Scan grids
    s_grid: Tuple[float, ...] = Field(tuple(np.linspace(0.0, 3.0, 13).tolist()), description="Alice's kick strengths")
    t: float = Field(1.0, description="Bob's parameter")

    # Resolution geometry
    rt_window: Tuple[float, float] = Field((-5.0, 5.0))
    rt_t: Optional[float] = Field(None, description="Shift for R_t, the nontriviality witness when unset")

    # Sampling
    sample_kernel: str = Field("l2:gaussian:sigma=1", description="L2 kernel literal, or 'point' for no noise")
    w_gg: float = Field(1.0, ge=0.0)
    epsilon: float = Field(0.05, gt=0.0)
    delta: float = Field(0.1, gt=0.0, lt=1.0)
    replications: int = Field(200, ge=1)

    # Fock oracle and binned path integral
    n_max: int = Field(40, ge=1)
    cell_width: float = Field(0.5, gt=0.0)
    cells_per_axis: int = Field(8, ge=1)
    export_cells: bool = Field(False, description="Write the nonzero D(c, c_bar) entries")
    export_tol: float = Field(1e-10, gt=0.0, description="|D| at or below this is not exported")

    # Oscillator
    pure_point_eps: Tuple[float, ...] = Field((0.5, 0.25))

    # Run
    seed: int = 0
    out: str = "./workspace/output"
    oracle: OracleChoice = OracleChoice.NONE
    tolerance: float = Field(1e-4, gt=0.0)

    model_config = {
        "extra": "forbid",
        "json_schema_extra": {
            "examples": [
                {"spacetime": "four_point", "kraus": "ideal:uniform:w=1", "t": 0.5},
                {"spacetime": "sprinkle", "density": 8.0, "seed": 3},
            ]
        }
    }

    @model_validator(mode='before')
    @classmethod
    def nullable_text(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            for key in _NULLABLE:
                if isinstance(data.get(key), str) and data[key].strip().lower() in ("", "none"):
                    data[key] = None
        return data

    @field_validator('t_range', 'x_range', 'grid', 'f_bump', 'lab_rect', 's_grid', 'rt_window', 'pure_point_eps', mode='before')
    @classmethod
    def float_tuple(cls, v):
        return None if v is None else _split_floats(v)

    @field_validator('f_points', 'lab_points', mode='before')
    @classmethod
    def int_tuple(cls, v):
        return _split_ints(v)

    @model_validator(mode='after')
    def check_ranges(self):
        for name in ("t_range", "x_range", "rt_window"):
            lo, hi = getattr(self, name)
            if hi < lo:
                raise ValueError(f"{name} is reversed: {(lo, hi)}")
        if self.spacetime == SpacetimeSource.FILE and not self.causet_file:
            raise ValueError("spacetime=file needs causet_file")
        if any(e <= 0 for e in self.pure_point_eps):
            raise ValueError("pure_point_eps must be positive")
        return self
