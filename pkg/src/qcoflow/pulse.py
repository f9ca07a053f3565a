"""Native-gate decomposition ({PRX, CZ, virtual RZ}) and ASAP scheduling."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from enum import Enum

import numpy as np

from .ir import Circuit, Gate, GateKind, gate_matrix

EULER_EPS = 1e-12


class NativeKind(str, Enum):
    PRX = "prx"
    CZ = "cz"
    VIRTUAL_RZ = "vrz"


_ARITY = {NativeKind.PRX: (2, 1), NativeKind.CZ: (0, 2), NativeKind.VIRTUAL_RZ: (1, 1)}


@dataclass(frozen=True)
class NativeOp:
    kind: NativeKind
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        kind = NativeKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        n_params, n_qubits = _ARITY[kind]
        if len(self.params) != n_params or len(self.qubits) != n_qubits:
            raise ValueError(f"bad arity for {kind.name}: params={self.params} qubits={self.qubits}")

    def to_gate(self) -> Gate:
        if self.kind is NativeKind.VIRTUAL_RZ:
            return Gate(GateKind.RZ, self.qubits, self.params)
        return Gate(GateKind(self.kind.value), self.qubits, self.params)


@dataclass(frozen=True)
class NativeCircuit:
    num_qubits: int
    ops: tuple[NativeOp, ...] = ()
    name: str = ""

    def to_circuit(self) -> Circuit:
        """Equivalent :class:`Circuit` (virtual RZ becomes RZ) for unitary checks."""
        return Circuit(self.num_qubits, tuple(op.to_gate() for op in self.ops), self.name)

    def count(self, kind: NativeKind) -> int:
        return sum(1 for op in self.ops if op.kind is kind)


def zxz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Angles (alpha, theta, beta) with ``u ~ RZ(alpha) RX(theta) RZ(beta)``.

    ``theta`` lies in [0, pi]; equality holds up to global phase.
    """
    det = np.linalg.det(u)
    v = u / cmath.sqrt(det)
    c, s = abs(v[1, 1]), abs(v[1, 0])
    theta = 2 * math.atan2(s, c)
    total = 2 * cmath.phase(v[1, 1]) if c > EULER_EPS else 0.0
    diff = 2 * cmath.phase(v[1, 0]) + math.pi if s > EULER_EPS else 0.0
    return (total + diff) / 2, theta, (total - diff) / 2


def _wrap(theta: float) -> float:
    r = math.remainder(theta, 2 * math.pi)
    return math.pi if r <= -math.pi else r


@lru_cache(maxsize=4096)
def _single_qubit(g: Gate) -> tuple[NativeOp, ...]:
    q = g.qubits
    if g.kind is GateKind.RZ:
        return (NativeOp(NativeKind.VIRTUAL_RZ, q, g.params),)
    if g.kind is GateKind.PRX:
        return (NativeOp(NativeKind.PRX, q, g.params),)
    alpha, theta, beta = zxz_angles(gate_matrix(g))
    frame = _wrap(alpha + beta)
    ops = []
    # RZ(a) RX(t) RZ(b) = RZ(a + b) . PRX(t, -b)
    if theta >= EULER_EPS:
        ops.append(NativeOp(NativeKind.PRX, q, (theta, _wrap(-beta))))
    if abs(frame) >= EULER_EPS:
        ops.append(NativeOp(NativeKind.VIRTUAL_RZ, q, (frame,)))
    return tuple(ops)


def _hadamard(q: int) -> tuple[NativeOp, ...]:
    return _single_qubit(Gate(GateKind.H, (q,)))


def decompose_gate(g: Gate) -> list[NativeOp]:
    if g.kind is GateKind.CZ:
        return [NativeOp(NativeKind.CZ, g.qubits)]
    if g.kind is GateKind.CX:
        c, t = g.qubits
        return [*_hadamard(t), NativeOp(NativeKind.CZ, (c, t)), *_hadamard(t)]
    if g.kind is GateKind.SWAP:
        a, b = g.qubits
        ops = []
        for cx in ((a, b), (b, a), (a, b)):
            ops.extend(decompose_gate(Gate(GateKind.CX, cx)))
        return ops
    return list(_single_qubit(g))


def decompose_to_native(c: Circuit) -> NativeCircuit:
    ops = []
    for g in c.gates:
        ops.extend(decompose_gate(g))
    return NativeCircuit(c.num_qubits, tuple(ops), c.name)


DEFAULT_DURATIONS_NS = {NativeKind.PRX: 20.0, NativeKind.CZ: 40.0, NativeKind.VIRTUAL_RZ: 0.0}


@dataclass(frozen=True)
class ScheduledOp:
    op: NativeOp
    start_ns: float
    duration_ns: float

    @property
    def end_ns(self) -> float:
        return self.start_ns + self.duration_ns


@dataclass(frozen=True)
class PulseSchedule:
    num_qubits: int
    ops: tuple[ScheduledOp, ...] = ()
    total_duration_ns: float = 0.0
    per_qubit_busy_ns: dict = field(default_factory=dict)

    def count(self, kind: NativeKind) -> int:
        return sum(1 for s in self.ops if s.op.kind is kind)

    def qubit_end_ns(self) -> dict[int, float]:
        """Finish time of the last operation on each touched qubit."""
        ends: dict[int, float] = {}
        for s in self.ops:
            for q in s.op.qubits:
                ends[q] = max(ends.get(q, 0.0), s.end_ns)
        return ends

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "total_duration_ns": self.total_duration_ns,
            "ops": [
                {
                    "kind": s.op.kind.value,
                    "qubits": list(s.op.qubits),
                    "params": list(s.op.params),
                    "start_ns": s.start_ns,
                    "duration_ns": s.duration_ns,
                }
                for s in self.ops
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PulseSchedule":
        ops = tuple(
            ScheduledOp(
                NativeOp(NativeKind(o["kind"]), tuple(o["qubits"]), tuple(o.get("params", ()))),
                float(o["start_ns"]),
                float(o["duration_ns"]),
            )
            for o in doc["ops"]
        )
        busy: dict[int, float] = {}
        for s in ops:
            for q in s.op.qubits:
                busy[q] = busy.get(q, 0.0) + s.duration_ns
        total = max((s.end_ns for s in ops), default=0.0)
        return cls(int(doc["num_qubits"]), ops, total, busy)


def schedule(native: NativeCircuit, durations: dict | None = None) -> PulseSchedule:
    """As-soon-as-possible schedule respecting per-wire program order."""
    dur = dict(DEFAULT_DURATIONS_NS)
    if durations:
        dur.update({NativeKind(k): float(v) for k, v in durations.items()})
    free = [0.0] * native.num_qubits
    busy: dict[int, float] = {}
    placed = []
    for op in native.ops:
        start = max(free[q] for q in op.qubits)
        d = dur[op.kind]
        placed.append(ScheduledOp(op, start, d))
        for q in op.qubits:
            free[q] = start + d
            busy[q] = busy.get(q, 0.0) + d
    total = max((s.end_ns for s in placed), default=0.0)
    return PulseSchedule(native.num_qubits, tuple(placed), total, busy)
