from .hamiltonian import (
    LAB,
    ROTATING,
    Drive,
    TimeDependentOperator,
    build_effective_hamiltonian,
    build_lab_hamiltonian,
    chain_terms,
    check_resonance,
    hopping_full,
    hopping_matrix,
    lab_terms,
    project_to_sector,
)
from .types import (
    FULL,
    SECTOR,
    ChainConfig,
    ModulationSpec,
    QuantumState,
    QubitParams,
    TransferSchedule,
    product_state,
    reduced_qubit,
    sector_indices,
    single_qubit_state,
)

__all__ = [
    "LAB",
    "ROTATING",
    "FULL",
    "SECTOR",
    "Drive",
    "TimeDependentOperator",
    "ChainConfig",
    "ModulationSpec",
    "QuantumState",
    "QubitParams",
    "TransferSchedule",
    "build_effective_hamiltonian",
    "build_lab_hamiltonian",
    "chain_terms",
    "check_resonance",
    "hopping_full",
    "hopping_matrix",
    "lab_terms",
    "product_state",
    "project_to_sector",
    "reduced_qubit",
    "sector_indices",
    "single_qubit_state",
]
