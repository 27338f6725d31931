"""
Truncated bosonic Fock space over the Sorkin-Johnston modes of a causal set
"""

from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from models.propagators import ModeBasis


class FockSpace(BaseModel):
    """
    Tensor product of n_modes oscillators cut at n_max quanta each

    Basis states are ordered like np.ndindex over the occupations, mode 0
    most significant, which matches kron(a, I, ...) for the ladders.
    """
    modes: ModeBasis
    n_max: int = Field(..., ge=1, description="Per-mode occupation cutoff")
    annihilators: Tuple[object, ...] = Field(..., description="Sparse a_k, one per mode")
    occupations: np.ndarray = Field(..., description="dim x n_modes occupation numbers")
    vacuum: np.ndarray

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator('vacuum', mode='before')
    @classmethod
    def as_unit_vector(cls, v):
        v = np.array(v, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError("vacuum must be a unit vector")
        v.setflags(write=False)
        return v

    @model_validator(mode='after')
    def check_dimensions(self):
        if len(self.annihilators) != self.modes.n_modes:
            raise ValueError("one annihilator per mode is required")
        if self.occupations.shape != (self.dim, self.modes.n_modes):
            raise ValueError("occupation table does not match the dimension")
        if self.vacuum.shape[0] != self.dim:
            raise ValueError("vacuum has the wrong dimension")
        return self

    @property
    def n_modes(self) -> int:
        return self.modes.n_modes

    @property
    def dim(self) -> int:
        return (self.n_max + 1) ** self.n_modes

    @property
    def n_points(self) -> int:
        return self.modes.n_points

    def interior(self, headroom: int = 1) -> np.ndarray:
        """Indices of basis states at least headroom quanta below the cutoff in every mode"""
        return np.nonzero(np.all(self.occupations <= self.n_max - headroom, axis=1))[0]


class FieldSpectrum(BaseModel):
    """Eigendecomposition of a smeared field operator phi(f)"""
    values: np.ndarray
    vectors: np.ndarray

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    def function(self, fn) -> np.ndarray:
        """fn(phi(f)) as a dense matrix for a vectorised fn"""
        return (self.vectors * fn(self.values)) @ self.vectors.conj().T

    def apply(self, fn, psi: np.ndarray) -> np.ndarray:
        """fn(phi(f)) psi without forming the matrix"""
        return self.vectors @ (fn(self.values) * (self.vectors.conj().T @ psi))


class TwoPointRow(BaseModel):
    x: int
    y: int
    oracle: complex
    sj: complex
    difference: float = Field(..., ge=0.0)

    model_config = {"arbitrary_types_allowed": True}

    @field_validator('oracle', 'sj', mode='before')
    @classmethod
    def as_complex(cls, v):
        return complex(v)


class TruncationRow(BaseModel):
    """chi at one cutoff and its change to the next cutoff studied"""
    n_max: int
    chi: complex
    change: Optional[float] = Field(None, ge=0.0)

    model_config = {"arbitrary_types_allowed": True}

    @field_validator('chi', mode='before')
    @classmethod
    def as_complex(cls, v):
        return complex(v)


class TruncationStudy(BaseModel):
    rows: List[TruncationRow]
    monotone: bool = Field(..., description="Changes shrink as the cutoff grows")
