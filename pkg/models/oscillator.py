"""
Two-dimensional oscillator ground state and its quadrature grid
"""

import math

import numpy as np
from pydantic import BaseModel, Field


class QuadratureGrid(BaseModel):
    """
    Gauss-Legendre panels for integrals against the ground state

    Panels are split at every discontinuity of the integrand, then
    subdivided to at most panel_width.
    """
    half_width: float = Field(12.0, gt=0.0, description="Half-width of each axis around its Gaussian centre")
    panel_width: float = Field(0.5, gt=0.0)
    nodes: int = Field(20, ge=2, description="Gauss-Legendre nodes per panel")
    min_feature: float = Field(1e-3, gt=0.0, description="Smallest bin width the grid resolves")


class PurePointBound(BaseModel):
    """||(A_eps - A) psi|| against its bound c * eps * ||psi||"""
    operator: str = Field(..., description="x for x_eps, O for x_eps + y_eps")
    epsilon: float = Field(..., gt=0.0)
    deviation: float = Field(..., ge=0.0)
    bound: float = Field(..., ge=0.0)
    holds: bool


def ground_state(x, y) -> np.ndarray:
    """pi^(-1/2) exp(-(x^2 + y^2) / 2)"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.exp(-0.5 * (x * x + y * y)) / math.sqrt(math.pi)
