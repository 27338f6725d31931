"""
Propagator models: Green data on causal sets, Sorkin-Johnston modes and the
scalar pairings every signal formula is built from
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from config import settings


def _readonly(v, dtype) -> np.ndarray:
    m = np.array(v, dtype=dtype, copy=True)
    m.setflags(write=False)
    return m


class PropagatorSet(BaseModel):
    """
    Retarded and advanced Green matrices with the Pauli-Jordan matrix

    g_ret[x][y] is nonzero only when y precedes or equals x.
    """
    g_ret: np.ndarray = Field(..., description="Retarded Green matrix G+")
    g_adv: np.ndarray = Field(..., description="Advanced Green matrix G- (transpose of G+)")
    delta: np.ndarray = Field(..., description="Pauli-Jordan matrix G- - G+")
    mass: float = Field(..., ge=0.0)
    density: float = Field(..., gt=0.0)
    coefficient_a: float = Field(0.5, description="Chain prefactor a")
    coefficient_b: float = Field(0.0, description="Mass coupling b = -m^2/rho")

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator('g_ret', 'g_adv', 'delta', mode='before')
    @classmethod
    def as_real_matrix(cls, v):
        m = _readonly(v, float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"propagator matrices must be square, got {m.shape}")
        return m

    @model_validator(mode='after')
    def check_antisymmetry(self):
        if not np.array_equal(self.delta, -self.delta.T):
            raise ValueError("Pauli-Jordan matrix must be antisymmetric")
        return self

    @property
    def n_points(self) -> int:
        return int(self.delta.shape[0])


class ModeBasis(BaseModel):
    """
    Positive spectral part of i*Delta

    eigenvectors holds one orthonormal column per retained eigenvalue and
    w_matrix = sum_k lambda_k v_k v_k^dagger is the Sorkin-Johnston two-point
    matrix.
    """
    eigenvalues: np.ndarray = Field(..., description="Positive eigenvalues, descending")
    eigenvectors: np.ndarray = Field(..., description="n x k complex columns")
    w_matrix: np.ndarray = Field(..., description="n x n Hermitian PSD two-point matrix")
    rank: int = Field(..., ge=0, description="Number of nonzero eigenvalues of i*Delta")
    pairing_defect: float = Field(
        0.0,
        ge=0.0,
        description="Largest relative mismatch between paired +lambda and -lambda"
    )

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator('eigenvalues', mode='before')
    @classmethod
    def as_eigenvalues(cls, v):
        return _readonly(v, float).reshape(-1)

    @field_validator('eigenvectors', 'w_matrix', mode='before')
    @classmethod
    def as_complex(cls, v):
        return _readonly(v, complex)

    @property
    def n_modes(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def n_points(self) -> int:
        return int(self.w_matrix.shape[0])


class PairingContext(BaseModel):
    """
    Every bilinear the signal formulas need, for test functions f, g, h

    The commutator identity W(f,g) - W(g,f) = i Delta(f,g) is checked on
    construction against consistency_tol, scaled by the pairing magnitudes.
    """
    d_fg: float = Field(..., description="Delta(f, g)")
    d_fh: float = Field(..., description="Delta(f, h)")
    d_gh: float = Field(0.0, description="Delta(g, h)")
    w_ff: float = Field(..., ge=0.0, description="W(f, f)")
    w_gg: float = Field(..., ge=0.0, description="W(g, g)")
    w_fg: complex = Field(..., description="W(f, g)")
    w_gf: complex = Field(..., description="W(g, f)")
    consistency_tol: float = Field(default_factory=lambda: settings.PAIRING_TOL, gt=0.0)

    model_config = {
        "arbitrary_types_allowed": True,
        "frozen": True,
        "json_schema_extra": {
            "examples": [
                {"d_fg": 0.5, "d_fh": -0.5, "d_gh": 0.0, "w_ff": 0.5, "w_gg": 0.25,
                 "w_fg": "0.25j", "w_gf": "-0.25j"}
            ]
        }
    }

    @field_validator('w_fg', 'w_gf', mode='before')
    @classmethod
    def as_complex(cls, v):
        return complex(v)

    @field_validator('d_fg', 'd_fh', 'd_gh', 'w_ff', 'w_gg', mode='before')
    @classmethod
    def as_real(cls, v):
        if isinstance(v, (complex, np.complexfloating)):
            v = complex(v)
            if abs(v.imag) > 1e-9 * max(1.0, abs(v.real)):
                raise ValueError(f"expected a real pairing, got {v}")
            v = v.real
        return float(v)

    @model_validator(mode='after')
    def check_commutator(self):
        scale = max(1.0, abs(self.w_fg), abs(self.w_gf), abs(self.d_fg))
        gap = abs(self.w_fg - self.w_gf - 1j * self.d_fg)
        if gap > self.consistency_tol * scale:
            raise ValueError(
                f"W(f,g) - W(g,f) differs from i*Delta(f,g) by {gap:.3g}"
            )
        return self

    def w_tilde_gg(self, t: float) -> float:
        """W(g~, g~) for g~ = t*(g - 2 Delta(f,g) f)"""
        d = self.d_fg
        value = self.w_gg + 4.0 * d * d * self.w_ff - 2.0 * d * (self.w_fg + self.w_gf).real
        return float(t * t * value)


class RichardsonEstimate(BaseModel):
    """Pairing at spacing h and h/2 with the extrapolated value"""
    coarse: float
    fine: float
    extrapolated: float
    difference: float = Field(..., ge=0.0)
    order: int = Field(2, ge=1)


class ContinuumPairings(BaseModel):
    """Delta pairings of a continuum scenario and, for massive fields, the W context"""
    d_fg: float
    d_fh: float
    d_gh: float
    context: Optional[PairingContext] = None
