"""Perfect state transfer in parametrically modulated qubit chains."""

from .errors import ChainQSTError, FitError, InfeasibleTargetError, NumericalError, ResonanceError, ValidationError
from .model import ChainConfig, ModulationSpec, QuantumState, QubitParams, TransferSchedule

__version__ = "0.1.0"

__all__ = [
    "ChainConfig",
    "ModulationSpec",
    "QuantumState",
    "QubitParams",
    "TransferSchedule",
    "ChainQSTError",
    "FitError",
    "InfeasibleTargetError",
    "NumericalError",
    "ResonanceError",
    "ValidationError",
]
