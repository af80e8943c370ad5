"""Circuit DAG, OpenQASM I/O and the simulator driver."""

from .dag import (
    COMPOSITE,
    GATE_KINDS,
    CircuitDAG,
    GateSpec,
    ValidationReport,
    classical,
    emitter,
    is_isomorphic,
    photon,
    validate,
)
from .qasm import from_qasm, to_qasm
from .simulate import BACKENDS, qubit_index, simulate

__all__ = [
    "BACKENDS",
    "COMPOSITE",
    "GATE_KINDS",
    "CircuitDAG",
    "GateSpec",
    "ValidationReport",
    "classical",
    "emitter",
    "from_qasm",
    "is_isomorphic",
    "photon",
    "qubit_index",
    "simulate",
    "to_qasm",
    "validate",
]
