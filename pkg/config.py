from pydantic_settings import BaseSettings
from pydantic import Field
from pathlib import Path


class Settings(BaseSettings):
    """Configuration settings for the sorkinlab numerical laboratory"""

    # Parallelism
    SORKINLAB_THREADS: int = Field(
        default=1,
        ge=1,
        description="Maximum worker threads used by scans and replication studies"
    )

    # Storage Paths
    WORKSPACE_DIR: str = "./workspace"
    OUTPUT_DIR: str = "./workspace/output"

    # Propagator coefficients (G+ = a C (I - b a C)^-1, b = -m^2/rho)
    PROPAGATOR_A: float = Field(
        default=0.5,
        description="Prefactor a of the causal-set retarded Green function"
    )

    # Linear algebra tolerances
    EIGEN_REL_TOL: float = Field(
        default=1e-12,
        description="Eigenvalues of i*Delta below this fraction of max|lambda| count as zero"
    )
    PAIRING_TOL: float = Field(
        default=1e-10,
        description="Tolerance of the W(f,g) - W(g,f) = i Delta(f,g) consistency check"
    )

    # Quadrature
    QUAD_EPSABS: float = 1e-13
    QUAD_EPSREL: float = 1e-11
    QUAD_LIMIT: int = 400
    QUAD_TAIL_TOL: float = Field(
        default=1e-12,
        description="Integration windows grow until the Gaussian tail estimate drops below this"
    )
    QUAD_MAX_RESIDUAL: float = Field(
        default=1e-8,
        description="Adaptive quadrature error estimates above this raise QuadratureError"
    )

    # Resolutions
    NONTRIVIALITY_SCAN_POINTS: int = 10_000
    NONTRIVIALITY_BISECTION_STEPS: int = 60

    # Causality verdicts
    VERDICT_TOLERANCE: float = 1e-9
    VERDICT_SAMPLES: int = 2001
    VERDICT_WINDOW: float = Field(
        default=5.0,
        description="Half-width of the lambda sampling window used by verdicts"
    )

    # Truncated Fock oracle guards
    FOCK_MAX_MODES: int = 3
    FOCK_MAX_CUTOFF: int = 60
    FOCK_MAX_DIM: int = Field(
        default=4096,
        description="Largest dense Fock dimension the oracle will build"
    )

    # Binned decoherence functional guards
    DECO_MAX_CELLS_PER_AXIS: int = Field(
        default=12,
        description="Cells per axis; path vectors hold cells^4 x Fock dimension amplitudes, so DECO_MAX_BYTES binds first at n_max = 40"
    )
    DECO_MAX_BYTES: int = Field(
        default=512 * 1024 * 1024,
        description="Memory cap for the stored path vectors"
    )
    DECO_DENSE_MAX_CELLS: int = Field(
        default=1296,
        description="Largest cell count for which the dense D(c, c_bar) array is materialised"
    )

    # Scenario construction
    SCENARIO_SUPPORT_TOL: float = Field(
        default=1e-3,
        description="|Delta f| above this fraction of its maximum counts as support"
    )
    SCENARIO_PAIR_BUDGET: int = Field(
        default=4_000_000,
        description="Maximum number of candidate (x+, x-) pairs examined"
    )

    # Debug mode
    DEBUG: bool = False

    # Logging configuration
    LOG_LEVEL: str = Field(
        default="INFO",
        description="Logging level (DEBUG, INFO, WARNING, ERROR)"
    )
    LOG_FORMAT: str = Field(
        default="json",
        description="Log format (json or text)"
    )

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"


# Initialize settings
settings = Settings()


def ensure_directories():
    """Create all required workspace directories"""
    directories = [
        settings.WORKSPACE_DIR,
        settings.OUTPUT_DIR,
    ]

    for directory in directories:
        Path(directory).mkdir(parents=True, exist_ok=True)
