"""Quantum circuit compilation pipeline with end-to-end fidelity estimates."""
from .ir import Circuit, Gate, GateKind, build_dag, depth, gate_counts, to_unitary
from .passes import PassConfig, PassKind, run_pipeline
from .qasm import ParseError, emit_qasm, parse_qasm

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "Gate",
    "GateKind",
    "ParseError",
    "PassConfig",
    "PassKind",
    "build_dag",
    "depth",
    "emit_qasm",
    "gate_counts",
    "parse_qasm",
    "run_pipeline",
    "to_unitary",
]
