"""Deterministic benchmark circuit generators (GHZ, QFT, QAOA, random).

Randomness comes from :class:`SplitMix64` so corpora are reproducible in any
language.  The exact recipe:

* state update ``s += 0x9E3779B97F4A7C15 (mod 2**64)``; output
  ``z = s; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) * 0x94D049BB133111EB;
  z ^ z>>31`` (all mod 2**64);
* ``uniform()`` = ``(next_u64() >> 11) * 2**-53`` in [0, 1);
* ``below(k)`` = ``floor(uniform() * k)``;
* Fisher-Yates ``shuffle`` walks ``i`` from ``len-1`` down to 1 swapping with
  ``below(i + 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .ir import Circuit, Gate, GateKind

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        return mix64(self.state)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def below(self, k: int) -> int:
        return min(int(self.uniform() * k), k - 1)

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_seed(base: int, *parts: int) -> int:
    """Fold integers into a seed: ``s = mix64((s ^ p) + golden)`` for each part."""
    s = base & _MASK
    for p in parts:
        s = mix64((s ^ (p & _MASK)) + _GOLDEN)
    return s


class Family(str, Enum):
    GHZ = "ghz"
    QFT = "qft"
    QAOA = "qaoa"
    RANDOM = "random"


QUBIT_RANGES = {Family.GHZ: (2, 12), Family.QFT: (2, 8), Family.QAOA: (2, 12), Family.RANDOM: (4, 8)}
DEPTH_RANGE = (5, 30)


def gen_ghz(n: int) -> Circuit:
    if n < 2:
        raise ValueError("GHZ needs at least 2 qubits")
    gates = [Gate(GateKind.H, (0,))]
    gates += [Gate(GateKind.CX, (i, i + 1)) for i in range(n - 1)]
    return Circuit(n, tuple(gates), f"ghz_{n}q")


def controlled_phase(theta: float, control: int, target: int) -> list[Gate]:
    """CP(theta) as RZ(theta/2) c; CX c,t; RZ(-theta/2) t; CX c,t; RZ(theta/2) t."""
    return [
        Gate(GateKind.RZ, (control,), (theta / 2,)),
        Gate(GateKind.CX, (control, target)),
        Gate(GateKind.RZ, (target,), (-theta / 2,)),
        Gate(GateKind.CX, (control, target)),
        Gate(GateKind.RZ, (target,), (theta / 2,)),
    ]


def gen_qft(n: int) -> Circuit:
    """QFT without the final qubit-reversal swaps; n + 5*n*(n-1)/2 gates."""
    if n < 2:
        raise ValueError("QFT needs at least 2 qubits")
    gates: list[Gate] = []
    for j in range(n):
        gates.append(Gate(GateKind.H, (j,)))
        for k in range(j + 1, n):
            gates += controlled_phase(math.pi / 2 ** (k - j), k, j)
    return Circuit(n, tuple(gates), f"qft_{n}q")


def ring_edges(n: int) -> list[tuple[int, int]]:
    return [(i, (i + 1) % n) for i in range(n)] if n > 2 else [(0, 1)]


def _open_unit(rng: SplitMix64) -> float:
    u = rng.uniform()
    while u == 0.0:
        u = rng.uniform()
    return u


def gen_qaoa(n: int, edges, seed: int, name: str | None = None) -> Circuit:
    """One MaxCut QAOA level: H layer, CX-RZ(gamma)-CX per edge, RX(beta) mixer."""
    if n < 2:
        raise ValueError("QAOA needs at least 2 qubits")
    edges = [tuple(int(v) for v in e) for e in edges]
    for a, b in edges:
        if a == b or not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"invalid edge ({a}, {b}) for {n} qubits")
    rng = SplitMix64(seed)
    gamma = math.pi * _open_unit(rng)
    beta = math.pi * _open_unit(rng)
    gates = [Gate(GateKind.H, (q,)) for q in range(n)]
    for a, b in edges:
        gates += [
            Gate(GateKind.CX, (a, b)),
            Gate(GateKind.RZ, (b,), (gamma,)),
            Gate(GateKind.CX, (a, b)),
        ]
    gates += [Gate(GateKind.RX, (q,), (beta,)) for q in range(n)]
    return Circuit(n, tuple(gates), name or f"qaoa_{n}q_s{seed}")


_ROT = (GateKind.RX, GateKind.RY, GateKind.RZ)


def gen_random(n: int, layers: int, seed: int, name: str | None = None) -> Circuit:
    """Layered random circuit.

    Each layer: every qubit gets RX/RY/RZ (``below(3)``) with angle
    ``2*pi*uniform()``; then the neighbour pairs (i, i+1) are shuffled and
    taken greedily into a maximal matching, and each matched pair, in
    ascending ``i``, gets CX(i, i+1) if ``below(2) == 0`` else CZ(i, i+1).
    """
    if n < 2 or layers < 1:
        raise ValueError("random circuits need n >= 2 and layers >= 1")
    rng = SplitMix64(seed)
    gates: list[Gate] = []
    for _ in range(layers):
        for q in range(n):
            kind = _ROT[rng.below(3)]
            gates.append(Gate(kind, (q,), (2 * math.pi * rng.uniform(),)))
        pairs = list(range(n - 1))
        rng.shuffle(pairs)
        used: set[int] = set()
        chosen = []
        for i in pairs:
            if i not in used and i + 1 not in used:
                used.update((i, i + 1))
                chosen.append(i)
        for i in sorted(chosen):
            kind = GateKind.CX if rng.below(2) == 0 else GateKind.CZ
            gates.append(Gate(kind, (i, i + 1)))
    return Circuit(n, tuple(gates), name or f"random_{n}q_{layers}l_s{seed}")


@dataclass(frozen=True)
class CorpusSpec:
    family: Family
    qubits: int
    depth_layers: int = 0
    seed: int = 0
    graph_edges: tuple = ()
    allow_out_of_range: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.allow_out_of_range:
            return
        lo, hi = QUBIT_RANGES[self.family]
        if not lo <= self.qubits <= hi:
            raise ValueError(f"{self.family.value}: qubits {self.qubits} outside [{lo}, {hi}]")
        if self.family is Family.RANDOM and not DEPTH_RANGE[0] <= self.depth_layers <= DEPTH_RANGE[1]:
            raise ValueError(f"random: layers {self.depth_layers} outside {list(DEPTH_RANGE)}")

    def generate(self, name: str | None = None) -> Circuit:
        if self.family is Family.GHZ:
            return gen_ghz(self.qubits)
        if self.family is Family.QFT:
            return gen_qft(self.qubits)
        if self.family is Family.QAOA:
            edges = self.graph_edges or tuple(ring_edges(self.qubits))
            return gen_qaoa(self.qubits, edges, self.seed, name)
        return gen_random(self.qubits, self.depth_layers, self.seed, name)

    def to_dict(self) -> dict:
        doc = {"family": self.family.value, "qubits": self.qubits}
        if self.family is Family.RANDOM:
            doc["depth_layers"] = self.depth_layers
        if self.family in (Family.RANDOM, Family.QAOA):
            doc["seed"] = self.seed
        if self.family is Family.QAOA:
            doc["graph_edges"] = [list(e) for e in (self.graph_edges or ring_edges(self.qubits))]
        return doc


DEFAULT_SEED = 7


def default_corpus_specs(seed: int = DEFAULT_SEED) -> list[tuple[str, CorpusSpec]]:
    """The 105-circuit desk corpus as (name, spec) pairs."""
    specs: list[tuple[str, CorpusSpec]] = []
    for n in range(2, 13):
        specs.append((f"ghz_{n}q", CorpusSpec(Family.GHZ, n)))
    for n in range(2, 9):
        specs.append((f"qft_{n}q", CorpusSpec(Family.QFT, n)))
    for n in range(4, 9):
        for k in range(3):
            s = derive_seed(seed, 1, n, k)
            specs.append((f"qaoa_ring_{n}q_r{k}", CorpusSpec(Family.QAOA, n, seed=s)))
    for n in (4, 6, 8):
        for layers in (5, 10, 20, 30):
            for k in range(6):
                s = derive_seed(seed, 2, n, layers, k)
                specs.append((f"random_{n}q_{layers}l_r{k}", CorpusSpec(Family.RANDOM, n, layers, s)))
    return specs


def default_corpus(seed: int = DEFAULT_SEED) -> list[Circuit]:
    out = []
    for name, spec in default_corpus_specs(seed):
        c = spec.generate(name)
        out.append(Circuit(c.num_qubits, c.gates, name))
    return out
