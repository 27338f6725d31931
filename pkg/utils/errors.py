"""
Error types raised by the numerical services
Each error knows how to render itself as a machine-readable record
"""

from typing import Any, Dict, List, Optional, Tuple


class SorkinLabError(Exception):
    """Base class for all sorkinlab failures"""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_record(self) -> Dict[str, Any]:
        """Render as a flat dict for the CLI error channel"""
        record = {"error": type(self).__name__, "message": self.message}
        record.update(self.details)
        return record


class ResummationDivergesError(SorkinLabError, RuntimeError):
    """The chain resummation (I - b a C) cannot be inverted"""

    def __init__(self, spectral_radius: float, condition: float):
        super().__init__(
            f"resummation diverges: spectral radius of b*a*C is {spectral_radius:.6g} "
            f"(condition number {condition:.3g})",
            spectral_radius=spectral_radius,
            condition=condition,
        )
        self.spectral_radius = spectral_radius


class DegenerateWidthError(SorkinLabError, ValueError):
    """A Gaussian width W(f,f) is zero where a density is required"""


class QuadratureError(SorkinLabError, RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy"""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual estimate {residual:.3g})", residual=residual)
        self.residual = residual


class UnsupportedCaseError(SorkinLabError, ValueError):
    """The requested combination has no implementation"""


class SizeGuardError(SorkinLabError, ValueError):
    """A dense construction would exceed the configured size guard"""


class NotASolutionError(SorkinLabError, ValueError):
    """A grid field does not satisfy the massless wave equation"""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3g})", residual=residual)
        self.residual = residual


class IllConditionedEstimatorError(SorkinLabError, ValueError):
    """The Fourier factor in the estimator weight vanishes"""


class UnsampleableKernelError(SorkinLabError, RuntimeError):
    """No sampling strategy produced draws from the kernel density"""


class NontrivialitySearchError(SorkinLabError, RuntimeError):
    """No shift t gave 0 < measure(D & R_t) < measure(D)"""

    def __init__(self, message: str, profile: Optional[List[Tuple[float, float]]] = None):
        super().__init__(message, profile=profile or [])
        self.profile = profile or []


class GridResolutionError(SorkinLabError, ValueError):
    """A requested feature is finer than the quadrature grid"""


class LiteralParseError(SorkinLabError, ValueError):
    """A resolution, Kraus or grid literal could not be parsed"""


class InvalidConfigError(SorkinLabError, ValueError):
    """An experiment config cannot drive the requested command"""

    def __init__(self, command: str, errors: List[str]):
        super().__init__(f"config rejected for {command}: {'; '.join(errors)}", command=command, errors=errors)
        self.errors = errors
