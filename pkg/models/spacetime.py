"""
Spacetime models: causal sets, regions, 1+1 events and continuum grids
"""

from typing import FrozenSet, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class CausalSet(BaseModel):
    """
    Finite partially ordered set

    relation[x][y] is True iff x precedes y strictly. Reflexivity of the
    causal order is handled by the operations, not stored.
    """
    relation: np.ndarray = Field(..., description="n x n boolean strict order matrix")
    coords: Optional[np.ndarray] = Field(
        None,
        description="Optional n x 2 array of (t, x) positions, natural units"
    )

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator('relation', mode='before')
    @classmethod
    def as_bool_matrix(cls, v):
        m = np.array(v, dtype=bool, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"relation must be square, got shape {m.shape}")
        m.setflags(write=False)
        return m

    @field_validator('coords', mode='before')
    @classmethod
    def as_coords(cls, v):
        if v is None:
            return None
        c = np.array(v, dtype=float, copy=True).reshape(-1, 2)
        c.setflags(write=False)
        return c

    @model_validator(mode='after')
    def check_order(self):
        """Irreflexive, antisymmetric and transitively closed"""
        r = self.relation
        if r.shape[0] == 0:
            return self
        if np.any(np.diag(r)):
            raise ValueError("relation must be irreflexive")
        if np.any(r & r.T):
            raise ValueError("relation has a cycle")
        composed = (r.astype(np.int64) @ r.astype(np.int64)) > 0
        if np.any(composed & ~r):
            raise ValueError("relation is not transitively closed")
        if self.coords is not None and self.coords.shape[0] != r.shape[0]:
            raise ValueError("coords and relation disagree on the number of points")
        return self

    @property
    def n_points(self) -> int:
        return int(self.relation.shape[0])

    def precedes_or_equal(self, x: int, y: int) -> bool:
        return x == y or bool(self.relation[x, y])

    def related(self, x: int, y: int) -> bool:
        """True if x and y are causally related (either order or equal)"""
        return x == y or bool(self.relation[x, y] or self.relation[y, x])


class Region(BaseModel):
    """Point subset of a causal set, or a coordinate rectangle in 1+1 Minkowski"""
    points: Optional[FrozenSet[int]] = Field(None, description="Causal-set point indices")
    rectangle: Optional[Tuple[float, float, float, float]] = Field(
        None,
        description="(t0, t1, x0, x1) with t0 <= t1 and x0 <= x1"
    )

    model_config = {"frozen": True}

    @model_validator(mode='after')
    def exactly_one(self):
        if (self.points is None) == (self.rectangle is None):
            raise ValueError("a region is either a point set or a rectangle")
        if self.rectangle is not None:
            t0, t1, x0, x1 = self.rectangle
            if t1 < t0 or x1 < x0:
                raise ValueError(f"degenerate rectangle {self.rectangle}")
        return self


class Event2D(BaseModel):
    """Point of 1+1 Minkowski spacetime"""
    t: float
    x: float

    model_config = {"frozen": True}

    @property
    def u(self) -> float:
        return self.t - self.x

    @property
    def v(self) -> float:
        return self.t + self.x


class Grid2D(BaseModel):
    """
    Uniform lattice over [t_min, t_max] x [x_min, x_max] with equal spacing

    Equal spacing in t and x keeps null lines on lattice diagonals.
    """
    t_min: float
    t_max: float
    x_min: float
    x_max: float
    spacing: float = Field(..., gt=0)

    model_config = {"frozen": True}

    @model_validator(mode='after')
    def check_extent(self):
        if self.t_max <= self.t_min or self.x_max <= self.x_min:
            raise ValueError("grid extent must be non-degenerate")
        return self

    @property
    def n_t(self) -> int:
        return int(round((self.t_max - self.t_min) / self.spacing)) + 1

    @property
    def n_x(self) -> int:
        return int(round((self.x_max - self.x_min) / self.spacing)) + 1

    @property
    def t_axis(self) -> np.ndarray:
        return self.t_min + self.spacing * np.arange(self.n_t)

    @property
    def x_axis(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.n_x)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """(T, X) arrays of shape (n_t, n_x)"""
        return np.meshgrid(self.t_axis, self.x_axis, indexing="ij")

    def weights(self) -> np.ndarray:
        """Trapezoidal weights, shape (n_t, n_x)"""
        wt = np.full(self.n_t, self.spacing)
        wt[[0, -1]] *= 0.5
        wx = np.full(self.n_x, self.spacing)
        wx[[0, -1]] *= 0.5
        return np.outer(wt, wx)

    def refined(self) -> "Grid2D":
        """Same extent at half the spacing"""
        return self.model_copy(update={"spacing": self.spacing / 2.0})


class BumpFunction(BaseModel):
    """
    Smooth compactly supported test function on 1+1 Minkowski

    amplitude * exp(-1 / (1 - r^2)) / norm with r the Euclidean distance to
    the center in units of radius; normalized to unit integral when
    amplitude is 1.
    """
    t0: float = 0.0
    x0: float = 0.0
    radius: float = Field(0.5, gt=0)
    amplitude: float = 1.0

    model_config = {"frozen": True}
