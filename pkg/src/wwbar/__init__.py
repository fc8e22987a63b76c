"""Simulation toolkit for the three-qubit WWbar state.

Prepare it with a gate circuit, filter it into GHZ with ancilla-assisted
local measurements, tomograph it, and rebuild it from two-party marginals.
"""

from .circuit import run_with_checkpoints, wwbar_circuit, wwbar_nmr_variant
from .filtration import (
    apply_ilo_deterministic,
    build_projectors,
    filter_single_qubit,
    filter_three_qubit,
    ilo_decomposition,
    run_ensemble,
)
from .marginals import reconstruct_from_marginals
from .metrics import fidelity, purity, trace_distance
from .states import DensityMatrix, StateVector, make_state

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "StateVector",
    "apply_ilo_deterministic",
    "build_projectors",
    "fidelity",
    "filter_single_qubit",
    "filter_three_qubit",
    "ilo_decomposition",
    "make_state",
    "purity",
    "reconstruct_from_marginals",
    "run_ensemble",
    "run_with_checkpoints",
    "trace_distance",
    "wwbar_circuit",
    "wwbar_nmr_variant",
]
