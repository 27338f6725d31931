"""
Binned decoherence functional of the four-point causet
"""

from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class BinnedDecoherence(BaseModel):
    """
    D(c, c_bar) = <u(c_bar), u(c)> with u(c) = Pi_B Pi_2 Pi_1 Pi_A |Omega>

    Pi_x is the spectral projector of the point field phi_x onto cell c_x.
    The path vectors u(c) are stored one per row, cells in row-major order
    over (A, 1, 2, B); D itself is formed only on request.
    """
    edges: Tuple[np.ndarray, ...] = Field(..., description="Cell edges per axis in causal order")
    order: Tuple[int, ...] = Field(..., description="Point index of each axis")
    vectors: np.ndarray = Field(..., description="n_cells x dim path vectors")
    vacuum: np.ndarray
    open_ends: bool = Field(True, description="Outer cells extend to infinity")

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator('edges', mode='before')
    @classmethod
    def as_edge_arrays(cls, v):
        arrays = tuple(np.asarray(e, dtype=float).reshape(-1) for e in v)
        for e in arrays:
            if e.size < 2 or np.any(np.diff(e) <= 0):
                raise ValueError("cell edges must be strictly increasing with at least one cell")
        return arrays

    @model_validator(mode='after')
    def check_shapes(self):
        if len(self.edges) != len(self.order):
            raise ValueError("one edge array per axis is required")
        if self.vectors.shape[0] != int(np.prod(self.shape)):
            raise ValueError("one path vector per cell is required")
        return self

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(e.size - 1 for e in self.edges)

    @property
    def n_cells(self) -> int:
        return int(self.vectors.shape[0])

    def centres(self) -> Tuple[np.ndarray, ...]:
        """Cell-centre value of each axis, broadcast over the cell grid and flattened"""
        mids = [0.5 * (e[:-1] + e[1:]) for e in self.edges]
        return tuple(m.reshape(-1) for m in np.meshgrid(*mids, indexing="ij"))

    def widths(self) -> np.ndarray:
        return np.array([float(np.max(np.diff(e))) for e in self.edges])

    def normalisation(self) -> complex:
        """Sum of D over all cell pairs, |sum_c u(c)|^2"""
        total = self.vectors.sum(axis=0)
        return complex(np.vdot(total, total))
