"""
Kraus update maps acting on one smeared field, and causality verdicts
"""

import math
from enum import Enum
from typing import Callable, Optional, Tuple

from pydantic import BaseModel, Field, model_validator
from scipy import integrate

from models.resolutions import Resolution


class KrausVariant(str, Enum):
    UNITARY_PHASE = "unitary_phase"
    IDEAL = "ideal"
    GAUSSIAN_WEAK = "gaussian_weak"
    L2_KERNEL = "l2_kernel"


class PhaseKind(str, Enum):
    """theta(lambda) for unitary kicks exp(i theta(phi(f)))"""
    ZERO = "zero"
    LINEAR = "linear"
    SQUARE = "square"
    CUSTOM = "custom"


class KernelShape(str, Enum):
    GAUSSIAN = "gaussian"
    BOX = "box"
    CUSTOM = "custom"


class L2KernelSpec(BaseModel):
    """
    Square-integrable kernel k with kappa(lambda, gamma) = k(lambda - gamma)

    gaussian: k = (2 pi sigma^2)^(-1/4) exp(-gamma^2 / (4 sigma^2))
    box:      k = w^(-1/2) on [-w/2, w/2)
    custom:   any callable normalised on its support window
    """
    shape: KernelShape
    sigma: Optional[float] = Field(None, gt=0.0)
    width: Optional[float] = Field(None, gt=0.0)
    k: Optional[Callable[[float], complex]] = Field(None, description="Custom kernel")
    support: Optional[Tuple[float, float]] = Field(None, description="Window holding the custom kernel")

    model_config = {"frozen": True}

    @model_validator(mode='after')
    def check_shape(self):
        if self.shape == KernelShape.GAUSSIAN and self.sigma is None:
            raise ValueError("gaussian kernel needs sigma")
        if self.shape == KernelShape.BOX and self.width is None:
            raise ValueError("box kernel needs a width")
        if self.shape == KernelShape.CUSTOM:
            if self.k is None or self.support is None:
                raise ValueError("custom kernel needs k and a support window")
            lo, hi = self.support
            norm, _ = integrate.quad(lambda x: abs(self.k(x)) ** 2, lo, hi, limit=400)
            if abs(norm - 1.0) > 1e-8:
                raise ValueError(f"kernel is not normalised: integral of |k|^2 = {norm:.10g}")
        return self

    def value(self, gamma: float) -> complex:
        """k(gamma)"""
        if self.shape == KernelShape.GAUSSIAN:
            s2 = self.sigma ** 2
            return (2.0 * math.pi * s2) ** -0.25 * math.exp(-gamma * gamma / (4.0 * s2))
        if self.shape == KernelShape.BOX:
            half = self.width / 2.0
            return self.width ** -0.5 if -half <= gamma < half else 0.0
        return complex(self.k(gamma))

    def describe(self) -> str:
        if self.shape == KernelShape.GAUSSIAN:
            return f"l2:gaussian:sigma={self.sigma!r}"
        if self.shape == KernelShape.BOX:
            return f"l2:box:w={self.width!r}"
        return "l2:custom"


class KrausFamily(BaseModel):
    """
    Tagged description of kappa(lambda, gamma)

    unitary_phase: kappa = exp(i theta(lambda)) on a one-point outcome space
    ideal:         kappa(lambda, n) = 1 on bin n of a resolution
    gaussian_weak: Gaussian L2 kernel of width sigma
    l2_kernel:     kappa(lambda, gamma) = k(lambda - gamma)
    """
    variant: KrausVariant
    phase: Optional[PhaseKind] = None
    theta: Optional[Callable[[float], float]] = Field(None, description="Custom phase function")
    resolution: Optional[Resolution] = None
    sigma: Optional[float] = Field(None, gt=0.0)
    kernel: Optional[L2KernelSpec] = None

    model_config = {"frozen": True}

    @model_validator(mode='after')
    def check_variant(self):
        v = self.variant
        if v == KrausVariant.UNITARY_PHASE:
            if self.phase is None:
                raise ValueError("unitary kick needs a phase kind")
            if self.phase == PhaseKind.CUSTOM and self.theta is None:
                raise ValueError("custom phase needs theta")
        elif v == KrausVariant.IDEAL and self.resolution is None:
            raise ValueError("ideal measurement needs a resolution")
        elif v == KrausVariant.GAUSSIAN_WEAK and self.sigma is None:
            raise ValueError("weak measurement needs sigma")
        elif v == KrausVariant.L2_KERNEL and self.kernel is None:
            raise ValueError("L2 Kraus map needs a kernel")
        return self

    @classmethod
    def unitary(cls, phase: PhaseKind, theta: Optional[Callable[[float], float]] = None) -> "KrausFamily":
        return cls(variant=KrausVariant.UNITARY_PHASE, phase=phase, theta=theta)

    @classmethod
    def ideal(cls, resolution: Resolution) -> "KrausFamily":
        return cls(variant=KrausVariant.IDEAL, resolution=resolution)

    @classmethod
    def weak(cls, sigma: float) -> "KrausFamily":
        return cls(variant=KrausVariant.GAUSSIAN_WEAK, sigma=sigma)

    @classmethod
    def l2(cls, kernel: L2KernelSpec) -> "KrausFamily":
        return cls(variant=KrausVariant.L2_KERNEL, kernel=kernel)

    def theta_value(self, lam: float) -> float:
        if self.phase == PhaseKind.ZERO:
            return 0.0
        if self.phase == PhaseKind.LINEAR:
            return lam
        if self.phase == PhaseKind.SQUARE:
            return lam * lam
        return float(self.theta(lam))

    def l2_kernel(self) -> L2KernelSpec:
        """The kernel of an L2-type family (weak measurements are Gaussian kernels)"""
        if self.variant == KrausVariant.GAUSSIAN_WEAK:
            return L2KernelSpec(shape=KernelShape.GAUSSIAN, sigma=self.sigma)
        if self.variant == KrausVariant.L2_KERNEL:
            return self.kernel
        raise ValueError(f"{self.variant.value} has no L2 kernel")

    def describe(self) -> str:
        """Literal form, e.g. kick:square or ideal:uniform:w=1,o=0"""
        if self.variant == KrausVariant.UNITARY_PHASE:
            return f"kick:{self.phase.value}"
        if self.variant == KrausVariant.IDEAL:
            return f"ideal:{self.resolution.describe()}"
        if self.variant == KrausVariant.GAUSSIAN_WEAK:
            return f"weak:sigma={self.sigma!r}"
        return self.kernel.describe()


class Verdict(str, Enum):
    CAUSAL = "causal"
    ACAUSAL = "acausal"


class CausalityWitness(BaseModel):
    """Two outcomes at which kappa~(., t) differs by gap"""
    lambda_1: float
    lambda_2: float
    t: float
    gap: float = Field(..., ge=0.0)


class VerdictSampling(BaseModel):
    """Where and how densely kappa~ is sampled for constancy in lambda"""
    half_width: float = Field(5.0, gt=0.0)
    samples: int = Field(2001, ge=3)
    tolerance: float = Field(1e-9, gt=0.0)


class CausalityVerdict(BaseModel):
    verdict: Verdict
    witness: Optional[CausalityWitness] = None
    tolerance: float = Field(..., gt=0.0)
    method: str = Field("analytic", description="analytic, interval-exact or sampled")

    @model_validator(mode='after')
    def witness_when_acausal(self):
        if self.verdict == Verdict.ACAUSAL:
            if self.witness is None:
                raise ValueError("an acausal verdict needs a witness")
            if self.witness.gap <= self.tolerance:
                raise ValueError("witness gap does not exceed the tolerance")
        return self
