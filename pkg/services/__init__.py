"""
Services package for sorkinlab
"""

__all__ = [
    "spacetime",
    "propagators",
    "gaussian_state",
    "resolutions",
    "kraus",
    "scenario",
    "fock_oracle",
    "sampling",
    "deco",
    "oscillator2d",
    "persistence",
    "experiments",
]
