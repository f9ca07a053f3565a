"""Circuit intermediate representation.

Gates are immutable records; a :class:`Circuit` is an ordered tuple of gates
over ``num_qubits`` wires.  Qubit 0 is the least-significant bit of a basis
index, so ``|q2 q1 q0>`` maps to index ``4*q2 + 2*q1 + q0``.

Matrix conventions::

    RZ(t)     = diag(exp(-i t/2), exp(+i t/2))
    RX(t)     = exp(-i t X / 2)
    RY(t)     = exp(-i t Y / 2)
    PRX(t, p) = RZ(p) . RX(t) . RZ(-p)

Two-qubit matrices are written with the first operand as the more
significant local bit (CX control first).
"""
from __future__ import annotations

import heapq
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

MAX_UNITARY_QUBITS = 12


class GateKind(str, Enum):
    H = "h"
    X = "x"
    Y = "y"
    Z = "z"
    S = "s"
    SDG = "sdg"
    T = "t"
    TDG = "tdg"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    PRX = "prx"
    CX = "cx"
    CZ = "cz"
    SWAP = "swap"

    @property
    def num_params(self) -> int:
        if self in (GateKind.RX, GateKind.RY, GateKind.RZ):
            return 1
        if self is GateKind.PRX:
            return 2
        return 0

    @property
    def num_qubits(self) -> int:
        return 2 if self in (GateKind.CX, GateKind.CZ, GateKind.SWAP) else 1


ROTATIONS = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ})
DIAGONAL = frozenset(
    {GateKind.Z, GateKind.S, GateKind.SDG, GateKind.T, GateKind.TDG, GateKind.RZ, GateKind.CZ}
)


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.params) != kind.num_params:
            raise ValueError(
                f"{kind.name} takes {kind.num_params} parameter(s), got {len(self.params)}"
            )
        if len(self.qubits) != kind.num_qubits:
            raise ValueError(f"{kind.name} acts on {kind.num_qubits} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{kind.name} operands must be distinct: {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.qubits}")
        if not all(math.isfinite(p) for p in self.params):
            raise ValueError(f"non-finite angle in {kind.name}{self.params}")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2

    def __str__(self) -> str:
        args = f"({', '.join(f'{p:.6g}' for p in self.params)})" if self.params else ""
        return f"{self.kind.value}{args} " + ", ".join(f"q{q}" for q in self.qubits)


def gate(kind, *qubits: int, params=()) -> Gate:
    """Shorthand constructor: ``gate("cx", 0, 1)`` or ``gate("rz", 0, params=[0.5])``."""
    return Gate(GateKind(kind), tuple(qubits), tuple(params))


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if int(self.num_qubits) < 1:
            raise ValueError(f"num_qubits must be positive, got {self.num_qubits}")
        for g in self.gates:
            if not isinstance(g, Gate):
                raise TypeError(f"expected Gate, got {type(g).__name__}")
            if max(g.qubits) >= self.num_qubits:
                raise ValueError(f"gate {g} exceeds circuit width {self.num_qubits}")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def with_gates(self, gates) -> "Circuit":
        return Circuit(self.num_qubits, tuple(gates), self.name)

    def append(self, g: Gate) -> "Circuit":
        return self.with_gates(self.gates + (g,))

    def wire(self, q: int) -> list[Gate]:
        return [g for g in self.gates if q in g.qubits]


def depth(c: Circuit) -> int:
    """ASAP unit-duration layering depth."""
    level = [0] * c.num_qubits
    for g in c.gates:
        layer = max(level[q] for q in g.qubits) + 1
        for q in g.qubits:
            level[q] = layer
    return max(level, default=0)


@dataclass(frozen=True)
class GateCounts:
    total: int
    two_qubit: int
    per_kind: dict = field(default_factory=dict)


def gate_counts(c: Circuit) -> GateCounts:
    per_kind = Counter(g.kind for g in c.gates)
    two = sum(1 for g in c.gates if g.is_two_qubit)
    return GateCounts(len(c.gates), two, dict(per_kind))


# --- matrices -------------------------------------------------------------

_SQ2 = 1 / np.sqrt(2)
_FIXED = {
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.diag([1, -1]).astype(complex),
    GateKind.S: np.diag([1, 1j]),
    GateKind.SDG: np.diag([1, -1j]),
    GateKind.T: np.diag([1, np.exp(1j * np.pi / 4)]),
    GateKind.TDG: np.diag([1, np.exp(-1j * np.pi / 4)]),
    GateKind.CX: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.SWAP: np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def rx_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def prx_matrix(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -1j * np.exp(-1j * phi) * s], [-1j * np.exp(1j * phi) * s, c]]
    )


def gate_matrix(g: Gate) -> np.ndarray:
    if g.kind is GateKind.RX:
        return rx_matrix(g.params[0])
    if g.kind is GateKind.RY:
        return ry_matrix(g.params[0])
    if g.kind is GateKind.RZ:
        return rz_matrix(g.params[0])
    if g.kind is GateKind.PRX:
        return prx_matrix(*g.params)
    return _FIXED[g.kind]


def apply_gate(tensor: np.ndarray, g: Gate, n: int) -> np.ndarray:
    """Apply ``g`` to a state (or stacked columns) reshaped as ``(2,)*n + rest``."""
    k = len(g.qubits)
    m = gate_matrix(g).reshape((2,) * (2 * k))
    axes = [n - 1 - q for q in g.qubits]
    out = np.tensordot(m, tensor, axes=(list(range(k, 2 * k)), axes))
    # tensordot puts the gate's output axes first; move them back in place
    return np.moveaxis(out, list(range(k)), axes)


def to_unitary(c: Circuit) -> np.ndarray:
    n = c.num_qubits
    if n > MAX_UNITARY_QUBITS:
        raise ValueError(f"to_unitary limited to {MAX_UNITARY_QUBITS} qubits, got {n}")
    dim = 2**n
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for g in c.gates:
        u = apply_gate(u, g, n)
    return u.reshape(dim, dim)


def to_statevector(c: Circuit, initial: np.ndarray | None = None) -> np.ndarray:
    n = c.num_qubits
    psi = np.zeros(2**n, dtype=complex)
    if initial is None:
        psi[0] = 1.0
    else:
        psi[:] = initial
    psi = psi.reshape((2,) * n)
    for g in c.gates:
        psi = apply_gate(psi, g, n)
    return psi.reshape(-1)


# --- DAG view -------------------------------------------------------------


@dataclass(frozen=True)
class CircuitDag:
    """Dependency view of a circuit: node ``i`` is ``circuit.gates[i]``."""

    num_qubits: int
    nodes: tuple[Gate, ...]
    wire_edges: dict  # qubit -> tuple of node ids in program order
    predecessors: tuple[frozenset, ...]
    successors: tuple[frozenset, ...]

    def linearize(self, name: str = "") -> Circuit:
        """Topological order, lowest node id first among ready nodes."""
        indeg = [len(p) for p in self.predecessors]
        ready = [i for i, d in enumerate(indeg) if d == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            i = heapq.heappop(ready)
            order.append(i)
            for j in self.successors[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(ready, j)
        return Circuit(self.num_qubits, tuple(self.nodes[i] for i in order), name)

    def front_layer(self) -> list[int]:
        return [i for i, p in enumerate(self.predecessors) if not p]


def build_dag(c: Circuit) -> CircuitDag:
    wires: dict[int, list[int]] = {q: [] for q in range(c.num_qubits)}
    preds: list[set] = [set() for _ in c.gates]
    succs: list[set] = [set() for _ in c.gates]
    for i, g in enumerate(c.gates):
        for q in g.qubits:
            if wires[q]:
                p = wires[q][-1]
                preds[i].add(p)
                succs[p].add(i)
            wires[q].append(i)
    return CircuitDag(
        c.num_qubits,
        c.gates,
        {q: tuple(ids) for q, ids in wires.items()},
        tuple(frozenset(p) for p in preds),
        tuple(frozenset(s) for s in succs),
    )


def wire_sequences(c: Circuit) -> dict[int, list[Gate]]:
    return {q: c.wire(q) for q in range(c.num_qubits)}
