"""Qubit routing on a coupling graph (SABRE-style, deterministic).

Layouts map logical qubit ``l`` to physical qubit ``layout[l]``.  The routed
circuit is expressed on physical qubits; inserted SWAPs are ordinary
``SWAP`` gates so the result stays a plain :class:`~qcoflow.ir.Circuit`.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .ir import Circuit, Gate, GateKind, build_dag

LOOKAHEAD_SIZE = 20
LOOKAHEAD_WEIGHT = 0.5


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Topology:
    num_qubits: int
    edges: frozenset
    name: str = ""

    def __post_init__(self):
        norm = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise TopologyError(f"self-loop on qubit {a}")
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise TopologyError(f"edge ({a}, {b}) outside {self.num_qubits} qubits")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))
        if self.num_qubits < 1:
            raise TopologyError("topology needs at least one qubit")

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def is_connected(self) -> bool:
        n, _ = connected_components(self._adjacency(), directed=False)
        return n == 1

    def _adjacency(self) -> csr_matrix:
        if not self.edges:
            return csr_matrix((self.num_qubits, self.num_qubits))
        a, b = zip(*self.sorted_edges())
        return csr_matrix((np.ones(len(a)), (a, b)), shape=(self.num_qubits, self.num_qubits))

    def subgraph(self, qubits, name: str = "") -> "Topology":
        """Induced subgraph on ``qubits``, relabelled 0..k-1 in the given order."""
        index = {q: i for i, q in enumerate(qubits)}
        edges = {(index[a], index[b]) for a, b in self.edges if a in index and b in index}
        return Topology(len(index), frozenset(edges), name or f"{self.name}-sub{len(index)}")

    def to_dict(self) -> dict:
        return {"name": self.name, "num_qubits": self.num_qubits, "edges": [list(e) for e in self.sorted_edges()]}

    @classmethod
    def from_dict(cls, doc: dict) -> "Topology":
        try:
            return cls(int(doc["num_qubits"]), frozenset(tuple(e) for e in doc["edges"]), str(doc.get("name", "")))
        except (KeyError, TypeError, ValueError) as exc:
            raise TopologyError(f"malformed topology document: {exc}") from None


def line_topology(n: int) -> Topology:
    return Topology(n, frozenset((i, i + 1) for i in range(n - 1)), f"line{n}")


def complete_topology(n: int) -> Topology:
    return Topology(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)), f"complete{n}")


def garnet20() -> Topology:
    """20-qubit / 30-edge approximation of the IQM Garnet lattice."""
    text = resources.files("qcoflow").joinpath("data/garnet20.json").read_text()
    return Topology.from_dict(json.loads(text))


def load_topology(spec: str) -> Topology:
    """Resolve a builtin name (``garnet20``, ``line<N>``, ``complete<N>``) or a JSON path."""
    if spec == "garnet20":
        return garnet20()
    m = re.fullmatch(r"(line|complete)(\d+)", spec)
    if m:
        n = int(m.group(2))
        if n < 1:
            raise TopologyError(f"bad topology size in {spec!r}")
        return line_topology(n) if m.group(1) == "line" else complete_topology(n)
    path = Path(spec)
    if not path.is_file():
        raise TopologyError(f"unknown topology {spec!r} (not a builtin name or file)")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise TopologyError(f"{path}: {exc}") from None
    return Topology.from_dict(doc)


def distance_matrix(t: Topology) -> np.ndarray:
    """All-pairs hop counts; raises :class:`TopologyError` if disconnected."""
    return _distances(t).copy()


@lru_cache(maxsize=64)
def _distances(t: Topology) -> np.ndarray:
    d = shortest_path(t._adjacency(), method="D", directed=False, unweighted=True)
    if not np.all(np.isfinite(d)):
        raise TopologyError(f"topology {t.name!r} is disconnected")
    return d.astype(int)


@dataclass(frozen=True)
class Layout:
    logical_to_physical: tuple[int, ...]

    def __post_init__(self):
        l2p = tuple(int(p) for p in self.logical_to_physical)
        object.__setattr__(self, "logical_to_physical", l2p)
        if sorted(l2p) != list(range(len(l2p))):
            raise ValueError(f"layout is not a permutation: {l2p}")

    @classmethod
    def identity(cls, n: int) -> "Layout":
        return cls(tuple(range(n)))

    def __getitem__(self, logical: int) -> int:
        return self.logical_to_physical[logical]

    def __len__(self) -> int:
        return len(self.logical_to_physical)

    def physical_to_logical(self) -> tuple[int, ...]:
        inv = [0] * len(self)
        for l, p in enumerate(self.logical_to_physical):
            inv[p] = l
        return tuple(inv)


@dataclass(frozen=True)
class RoutingReport:
    swaps_inserted: int
    initial_layout: Layout
    final_layout: Layout
    gates_before: int
    gates_after: int

    def to_dict(self) -> dict:
        return {
            "swaps_inserted": self.swaps_inserted,
            "initial_layout": list(self.initial_layout.logical_to_physical),
            "final_layout": list(self.final_layout.logical_to_physical),
            "gates_before": self.gates_before,
            "gates_after": self.gates_after,
        }


class _Router:
    def __init__(self, c: Circuit, t: Topology, layout: Layout):
        self.c = c
        self.t = t
        self.dist = _distances(t).tolist()
        self.l2p = list(layout.logical_to_physical)
        self.p2l = list(layout.physical_to_logical())
        self.dag = build_dag(c)
        self.indeg = [len(p) for p in self.dag.predecessors]
        self.done = [False] * len(c.gates)
        self.front = sorted(i for i, d in enumerate(self.indeg) if d == 0)
        self.two_qubit_ids = [i for i, g in enumerate(c.gates) if g.is_two_qubit]
        self.out: list[Gate] = []
        self.swaps = 0
        self.adjacent = {q: sorted({b for a, b in t.edges if a == q} | {a for a, b in t.edges if b == q})
                         for q in range(t.num_qubits)}

    def phys(self, g: Gate) -> tuple[int, ...]:
        return tuple(self.l2p[q] for q in g.qubits)

    def executable(self, g: Gate) -> bool:
        return not g.is_two_qubit or self.t.has_edge(*self.phys(g))

    def execute_ready(self) -> bool:
        progressed = False
        while True:
            ready = [i for i in self.front if self.executable(self.c.gates[i])]
            if not ready:
                return progressed
            progressed = True
            for i in ready:
                g = self.c.gates[i]
                self.out.append(Gate(g.kind, self.phys(g), g.params))
                self.done[i] = True
                self.front.remove(i)
                for j in self.dag.successors[i]:
                    self.indeg[j] -= 1
                    if self.indeg[j] == 0:
                        self.front.append(j)
            self.front.sort()

    def swap(self, a: int, b: int) -> None:
        la, lb = self.p2l[a], self.p2l[b]
        self.p2l[a], self.p2l[b] = lb, la
        self.l2p[la], self.l2p[lb] = b, a
        self.out.append(Gate(GateKind.SWAP, (a, b)))
        self.swaps += 1

    def lookahead(self) -> list[int]:
        front = set(self.front)
        ext = []
        for i in self.two_qubit_ids:
            if not self.done[i] and i not in front:
                ext.append(i)
                if len(ext) == LOOKAHEAD_SIZE:
                    break
        return ext

    def score(self, a: int, b: int, front: list[tuple[int, int]], ext: list[tuple[int, int]]) -> float:
        dist = self.dist

        def d(pair: tuple[int, int]) -> int:
            pa, pb = pair
            pa = b if pa == a else a if pa == b else pa
            pb = b if pb == a else a if pb == b else pb
            return dist[pa][pb]

        s = float(sum(d(p) for p in front))
        if ext:
            s += LOOKAHEAD_WEIGHT * sum(d(p) for p in ext)
        return s

    def best_swap(self) -> tuple[int, int]:
        front = [self.phys(self.c.gates[i]) for i in self.front if self.c.gates[i].is_two_qubit]
        ext = [self.phys(self.c.gates[i]) for i in self.lookahead()]
        touched = {p for pair in front for p in pair}
        candidates = sorted(e for e in self.t.edges if e[0] in touched or e[1] in touched)
        return min(candidates, key=lambda e: (self.score(e[0], e[1], front, ext), e))

    def release_valve(self) -> None:
        """Walk the first blocked gate's operands together along a shortest path."""
        i = min(i for i in self.front if self.c.gates[i].is_two_qubit)
        src, dst = self.phys(self.c.gates[i])
        while self.dist[src][dst] > 1:
            nxt = min(q for q in self.adjacent[src] if self.dist[q][dst] == self.dist[src][dst] - 1)
            self.swap(src, nxt)
            src = nxt

    def run(self) -> None:
        max_stall = 2 * self.t.num_qubits + 10
        stall = 0
        while True:
            if self.execute_ready():
                stall = 0
            if not self.front:
                return
            if stall >= max_stall:
                self.release_valve()
                stall = 0
                continue
            self.swap(*self.best_swap())
            stall += 1


def sabre_route(c: Circuit, t: Topology, initial: Layout | None = None) -> tuple[Circuit, RoutingReport]:
    """Insert SWAPs so every two-qubit gate acts on a coupling edge."""
    if c.num_qubits > t.num_qubits:
        raise TopologyError(f"circuit needs {c.num_qubits} qubits, topology {t.name!r} has {t.num_qubits}")
    if initial is None:
        initial = Layout.identity(t.num_qubits)
    elif len(initial) != t.num_qubits:
        raise TopologyError(f"layout covers {len(initial)} qubits, topology has {t.num_qubits}")
    router = _Router(c, t, initial)
    router.run()
    routed = Circuit(t.num_qubits, tuple(router.out), c.name)
    report = RoutingReport(
        swaps_inserted=router.swaps,
        initial_layout=initial,
        final_layout=Layout(tuple(router.l2p)),
        gates_before=len(c),
        gates_after=len(routed),
    )
    return routed, report
