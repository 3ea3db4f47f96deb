from .evolve import (
    EFFECTIVE_SOURCE,
    EXPLICIT_SOURCE,
    LAB_SOURCE,
    EvolutionRequest,
    NoiseModel,
    Trajectory,
    evolve_exact,
    evolve_lindblad,
    evolve_unitary,
    liouvillian,
    noise_from_chain,
    propagator_exact,
)

__all__ = [
    "EFFECTIVE_SOURCE",
    "EXPLICIT_SOURCE",
    "LAB_SOURCE",
    "EvolutionRequest",
    "NoiseModel",
    "Trajectory",
    "evolve_exact",
    "evolve_lindblad",
    "evolve_unitary",
    "liouvillian",
    "noise_from_chain",
    "propagator_exact",
]
