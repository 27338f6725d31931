"""
Pydantic models package for sorkinlab
"""

__all__ = [
    "CausalSet",
    "Region",
    "Grid2D",
    "BumpFunction",
    "PropagatorSet",
    "ModeBasis",
    "PairingContext",
    "Resolution",
    "IntervalSet",
    "KrausFamily",
    "L2KernelSpec",
    "SorkinScenario",
    "FockSpace",
    "EstimatorPlan",
    "BinnedDecoherence",
    "ExperimentConfig",
    "RunSummary",
]
