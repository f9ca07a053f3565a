"""Gate-level optimization passes and the pass pipeline.

Every pass maps a circuit to an equivalent circuit (up to global phase) and
reports how many gates it removed/added.  Cancel, Rotate and Identity are
single left-to-right sweeps with a per-wire stack, which reaches the local
fixpoint in one pass; Commute is a stable reorder that never changes counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .ir import DIAGONAL, ROTATIONS, Circuit, Gate, GateKind

DEFAULT_ANGLE_TOLERANCE = 1e-9
DEFAULT_MAX_ROUNDS = 10


class PassKind(str, Enum):
    CANCEL = "cancel"
    COMMUTE = "commute"
    ROTATE = "rotate"
    IDENTITY = "identity"


@dataclass(frozen=True)
class PassReport:
    pass_kind: PassKind
    gates_before: int
    gates_after: int
    gates_removed: int = 0
    gates_added: int = 0
    applications: int = 0

    def __post_init__(self):
        if self.gates_after != self.gates_before - self.gates_removed + self.gates_added:
            raise ValueError("PassReport counts are inconsistent")

    def to_dict(self) -> dict:
        return {
            "pass": self.pass_kind.value,
            "gates_before": self.gates_before,
            "gates_after": self.gates_after,
            "gates_removed": self.gates_removed,
            "gates_added": self.gates_added,
            "applications": self.applications,
        }


@dataclass(frozen=True)
class PassConfig:
    sequence: tuple[PassKind, ...]
    max_rounds: int = DEFAULT_MAX_ROUNDS
    angle_tolerance: float = DEFAULT_ANGLE_TOLERANCE

    def __post_init__(self):
        seq = tuple(PassKind(p) for p in self.sequence)
        object.__setattr__(self, "sequence", seq)
        if not seq:
            raise ValueError("pass sequence must be non-empty")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if not self.angle_tolerance > 0:
            raise ValueError("angle_tolerance must be positive")

    @classmethod
    def parse(cls, text: str, **kwargs) -> "PassConfig":
        """Build from a comma-separated list such as ``"cancel,commute,rotate"``."""
        names = [t.strip().lower() for t in text.split(",") if t.strip()]
        try:
            seq = tuple(PassKind(n) for n in names)
        except ValueError:
            valid = ", ".join(p.value for p in PassKind)
            raise ValueError(f"unknown pass in {text!r}; expected any of: {valid}") from None
        return cls(seq, **kwargs)

    @property
    def label(self) -> str:
        return ">".join(p.value for p in self.sequence)


# --- angle helpers --------------------------------------------------------


def normalize_angle(theta: float) -> float:
    """Map to (-pi, pi]."""
    r = math.remainder(theta, 2 * math.pi)
    return math.pi if r <= -math.pi else r


def is_zero_angle(theta: float, tol: float = DEFAULT_ANGLE_TOLERANCE) -> bool:
    """True when ``theta`` is a multiple of 2*pi within ``tol``."""
    return abs(math.remainder(theta, 2 * math.pi)) <= tol


# --- inverse and commutation tables ---------------------------------------

_SELF_INVERSE = frozenset(
    {GateKind.H, GateKind.X, GateKind.Y, GateKind.Z, GateKind.CX, GateKind.CZ, GateKind.SWAP}
)
_SYMMETRIC = frozenset({GateKind.CZ, GateKind.SWAP})
_INVERSE_KIND = {
    GateKind.S: GateKind.SDG,
    GateKind.SDG: GateKind.S,
    GateKind.T: GateKind.TDG,
    GateKind.TDG: GateKind.T,
}
_Z_FAMILY = frozenset(
    {GateKind.Z, GateKind.S, GateKind.SDG, GateKind.T, GateKind.TDG, GateKind.RZ}
)
_X_FAMILY = frozenset({GateKind.X, GateKind.RX})


def _same_operands(a: Gate, b: Gate) -> bool:
    if a.qubits == b.qubits:
        return True
    return a.kind in _SYMMETRIC and set(a.qubits) == set(b.qubits)


def is_inverse_pair(a: Gate, b: Gate, tol: float = DEFAULT_ANGLE_TOLERANCE) -> bool:
    """True when ``b`` undoes ``a`` on the same operands."""
    if not _same_operands(a, b):
        return False
    if a.kind in _SELF_INVERSE:
        return b.kind is a.kind
    if a.kind in _INVERSE_KIND:
        return b.kind is _INVERSE_KIND[a.kind]
    if a.kind in ROTATIONS:
        return b.kind is a.kind and abs(a.params[0] + b.params[0]) <= tol
    if a.kind is GateKind.PRX:
        return (
            b.kind is GateKind.PRX
            and abs(a.params[0] + b.params[0]) <= tol
            and abs(a.params[1] - b.params[1]) <= tol
        )
    return False


def _is_rx_like(g: Gate, tol: float) -> bool:
    return g.kind in _X_FAMILY or (g.kind is GateKind.PRX and is_zero_angle(g.params[1], tol))


def _commutes_on_shared(one: Gate, two: Gate) -> bool:
    # one is single-qubit, two is two-qubit
    q = one.qubits[0]
    if two.kind is GateKind.CX:
        if q == two.qubits[0]:
            return one.kind in _Z_FAMILY
        return one.kind in _X_FAMILY
    return False


def commutes(a: Gate, b: Gate, tol: float = DEFAULT_ANGLE_TOLERANCE) -> bool:
    """Sound, incomplete commutation check.

    Rules: disjoint operands; any two diagonal gates; Z-family on a CX
    control; X/RX on a CX target; X/RX against PRX with zero phase.
    """
    if not set(a.qubits) & set(b.qubits):
        return True
    if a.kind in DIAGONAL and b.kind in DIAGONAL:
        return True
    if len(a.qubits) == 1 and len(b.qubits) == 2:
        return _commutes_on_shared(a, b)
    if len(a.qubits) == 2 and len(b.qubits) == 1:
        return _commutes_on_shared(b, a)
    if len(a.qubits) == 1 and len(b.qubits) == 1:
        if a.kind in _X_FAMILY and b.kind is GateKind.PRX:
            return _is_rx_like(b, tol)
        if b.kind in _X_FAMILY and a.kind is GateKind.PRX:
            return _is_rx_like(a, tol)
    return False


def _is_partner(a: Gate, b: Gate, tol: float) -> bool:
    """Gates that a later rewrite could fuse: same kind or an inverse pair."""
    if not _same_operands(a, b):
        return False
    return a.kind is b.kind or is_inverse_pair(a, b, tol)


# --- passes ---------------------------------------------------------------


class _WireStack:
    """Output buffer where ``top(q)`` is the last surviving gate on wire q."""

    def __init__(self, num_qubits: int):
        self.out: list[Gate | None] = []
        self.stacks: list[list[int]] = [[] for _ in range(num_qubits)]

    def top(self, g: Gate) -> int | None:
        """Index of a kept gate that is last on *all* of ``g``'s wires, if any."""
        tops = {self.stacks[q][-1] if self.stacks[q] else None for q in g.qubits}
        if len(tops) != 1:
            return None
        idx = tops.pop()
        if idx is None or set(self.out[idx].qubits) != set(g.qubits):
            return None
        return idx

    def push(self, g: Gate) -> None:
        self.out.append(g)
        for q in g.qubits:
            self.stacks[q].append(len(self.out) - 1)

    def pop(self, idx: int) -> None:
        for q in self.out[idx].qubits:
            self.stacks[q].pop()
        self.out[idx] = None

    def gates(self) -> tuple[Gate, ...]:
        return tuple(g for g in self.out if g is not None)


def cancel_pass(c: Circuit, tol: float = DEFAULT_ANGLE_TOLERANCE) -> tuple[Circuit, PassReport]:
    """Remove wire-adjacent inverse pairs (HH, XX, S.SDG, RZ(a).RZ(-a), ...)."""
    buf = _WireStack(c.num_qubits)
    pairs = 0
    for g in c.gates:
        idx = buf.top(g)
        if idx is not None and is_inverse_pair(buf.out[idx], g, tol):
            buf.pop(idx)
            pairs += 1
        else:
            buf.push(g)
    out = c.with_gates(buf.gates())
    return out, PassReport(PassKind.CANCEL, len(c), len(out), gates_removed=2 * pairs, applications=pairs)


def commute_pass(c: Circuit, tol: float = DEFAULT_ANGLE_TOLERANCE) -> tuple[Circuit, PassReport]:
    """Move each gate as early as the commutation rules allow.

    A gate only moves if it can pass at least one earlier gate that shares a
    qubit with it; gates on disjoint wires keep their relative list order.
    Movement stops right after a fusable partner so that cancellation and
    merging see the pair adjacent.
    """
    out: list[Gate] = []
    moves = 0
    for g in c.gates:
        target = len(out)
        pos = len(out)
        while pos > 0:
            prev = out[pos - 1]
            shares = bool(set(prev.qubits) & set(g.qubits))
            if shares and _is_partner(prev, g, tol):
                break
            if not commutes(prev, g, tol):
                break
            pos -= 1
            if shares:
                target = pos
        if target != len(out):
            moves += 1
        out.insert(target, g)
    result = c.with_gates(out)
    return result, PassReport(PassKind.COMMUTE, len(c), len(result), applications=moves)


def rotate_pass(c: Circuit, tol: float = DEFAULT_ANGLE_TOLERANCE) -> tuple[Circuit, PassReport]:
    """Merge wire-adjacent RX/RY/RZ pairs about the same axis."""
    buf = _WireStack(c.num_qubits)
    merges = 0
    removed = 0
    for g in c.gates:
        idx = buf.top(g) if g.kind in ROTATIONS else None
        prev = buf.out[idx] if idx is not None else None
        if prev is not None and prev.kind is g.kind:
            merges += 1
            angle = normalize_angle(prev.params[0] + g.params[0])
            if abs(angle) <= tol:
                buf.pop(idx)
                removed += 2
            else:
                buf.out[idx] = Gate(g.kind, g.qubits, (angle,))
                removed += 1
        else:
            buf.push(g)
    out = c.with_gates(buf.gates())
    return out, PassReport(PassKind.ROTATE, len(c), len(out), gates_removed=removed, applications=merges)


def identity_pass(c: Circuit, tol: float = DEFAULT_ANGLE_TOLERANCE) -> tuple[Circuit, PassReport]:
    """Drop rotations (and PRX) whose angle is a multiple of 2*pi."""
    kept = []
    for g in c.gates:
        if (g.kind in ROTATIONS or g.kind is GateKind.PRX) and is_zero_angle(g.params[0], tol):
            continue
        kept.append(g)
    out = c.with_gates(kept)
    dropped = len(c) - len(out)
    return out, PassReport(PassKind.IDENTITY, len(c), len(out), gates_removed=dropped, applications=dropped)


PASSES = {
    PassKind.CANCEL: cancel_pass,
    PassKind.COMMUTE: commute_pass,
    PassKind.ROTATE: rotate_pass,
    PassKind.IDENTITY: identity_pass,
}


def run_pass(kind: PassKind, c: Circuit, tol: float = DEFAULT_ANGLE_TOLERANCE):
    return PASSES[PassKind(kind)](c, tol)


def run_pipeline(c: Circuit, cfg: PassConfig) -> tuple[Circuit, list[PassReport]]:
    """Apply ``cfg.sequence`` repeatedly until no pass changes the gate count."""
    reports: list[PassReport] = []
    for _ in range(cfg.max_rounds):
        changed = False
        for kind in cfg.sequence:
            c, rep = run_pass(kind, c, cfg.angle_tolerance)
            reports.append(rep)
            changed |= bool(rep.gates_removed or rep.gates_added)
        if not changed:
            break
    return c, reports
