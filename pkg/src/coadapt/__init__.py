"""Hardware-aware adaptive ansatz construction with CNOT-accounted routing."""

from .adapt import AdaptConfig, AdaptResult, IterationRecord, run_adapt
from .fermion import FermionExcitation, FermionOperator, hamiltonian_from_integrals, jordan_wigner
from .pauli import PauliSum, PauliTerm
from .pools import Pool, PoolOperator, build_pool
from .routing import ConnectivityGraph, Layout, RoutedCircuit, penalty_table
from .statevec import Ansatz, StateVector

__version__ = "0.1.0"

__all__ = [
    "AdaptConfig", "AdaptResult", "Ansatz", "ConnectivityGraph", "FermionExcitation", "FermionOperator",
    "IterationRecord", "Layout", "PauliSum", "PauliTerm", "Pool", "PoolOperator", "RoutedCircuit",
    "StateVector", "build_pool", "hamiltonian_from_integrals", "jordan_wigner", "penalty_table", "run_adapt",
]
