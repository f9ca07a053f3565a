"""Fidelity metrics, the decoherence surrogate and a single-qubit Lindblad integrator.

The surrogate treats every qubit as idling under amplitude damping plus pure
dephasing for the whole schedule duration, and multiplies in independent
per-gate error probabilities.  :func:`lindblad_oracle` integrates the full
single-qubit master equation and is the reference the closed form is tested
against.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .pulse import NativeKind, PulseSchedule


@dataclass(frozen=True)
class NoiseModel:
    t1_us: float = 37.0
    t2_us: float = 9.6
    err_1q: float = 0.001
    err_2q: float = 0.006
    dur_1q_ns: float = 20.0
    dur_2q_ns: float = 40.0

    def __post_init__(self):
        if not (self.t1_us > 0 and self.t2_us > 0):
            raise ValueError("T1 and T2 must be positive")
        if self.t2_us > 2 * self.t1_us:
            raise ValueError(f"unphysical T2={self.t2_us} > 2*T1={2 * self.t1_us}")
        if not (0 <= self.err_1q < 1 and 0 <= self.err_2q < 1):
            raise ValueError("gate errors must lie in [0, 1)")
        if not (self.dur_1q_ns > 0 and self.dur_2q_ns > 0):
            raise ValueError("gate durations must be positive")

    @property
    def t1_ns(self) -> float:
        return self.t1_us * 1e3

    @property
    def t2_ns(self) -> float:
        return self.t2_us * 1e3

    def durations(self) -> dict:
        return {NativeKind.PRX: self.dur_1q_ns, NativeKind.CZ: self.dur_2q_ns, NativeKind.VIRTUAL_RZ: 0.0}

    def scaled(self, t_scale: float, err_scale: float) -> "NoiseModel":
        return replace(
            self,
            t1_us=self.t1_us * t_scale,
            t2_us=self.t2_us * t_scale,
            err_1q=min(self.err_1q * err_scale, 0.999999),
            err_2q=min(self.err_2q * err_scale, 0.999999),
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "NoiseModel":
        known = {k: float(doc[k]) for k in cls.__dataclass_fields__ if k in doc}
        return cls(**known)


GARNET = NoiseModel()


@dataclass(frozen=True)
class NoiseRegime:
    name: str
    t_scale: float
    err_scale: float

    def apply(self, nm: NoiseModel) -> NoiseModel:
        return nm.scaled(self.t_scale, self.err_scale)


NOISE_REGIMES = (
    NoiseRegime("low", 4.0, 0.25),
    NoiseRegime("medium", 1.0, 1.0),
    NoiseRegime("high", 0.5, 2.0),
    NoiseRegime("very_high", 0.25, 4.0),
)


def load_noise_model(spec: str) -> NoiseModel:
    """``garnet``, a regime name (``low`` ... ``very_high``) or a JSON file path."""
    if spec == "garnet":
        return GARNET
    for regime in NOISE_REGIMES:
        if spec == regime.name:
            return regime.apply(GARNET)
    path = Path(spec)
    if not path.is_file():
        raise ValueError(f"unknown noise preset {spec!r} (not a builtin name or file)")
    try:
        return NoiseModel.from_dict(json.loads(path.read_text()))
    except (json.JSONDecodeError, TypeError, AttributeError) as exc:
        raise ValueError(f"{path}: malformed noise model: {exc}") from None


# --- exact metrics --------------------------------------------------------


def process_fidelity_exact(u_target: np.ndarray, u_impl: np.ndarray) -> float:
    """|Tr(U_target^dag U_impl)|^2 / d^2."""
    u_target = np.asarray(u_target)
    u_impl = np.asarray(u_impl)
    if u_target.shape != u_impl.shape or u_target.ndim != 2 or u_target.shape[0] != u_target.shape[1]:
        raise ValueError(f"dimension mismatch: {u_target.shape} vs {u_impl.shape}")
    d = u_target.shape[0]
    overlap = np.vdot(u_target, u_impl)  # == Tr(U_target^dag U_impl)
    return float(abs(overlap) ** 2 / d**2)


def state_fidelity(target_state: np.ndarray, rho: np.ndarray) -> float:
    psi = np.asarray(target_state, dtype=complex).reshape(-1)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: state {psi.size}, rho {rho.shape}")
    return float(np.real(np.vdot(psi, rho @ psi)))


def idle_fidelity(t_ns: float, nm: NoiseModel) -> float:
    """Average fidelity of a qubit idling for ``t_ns`` under T1/T2 decay."""
    if t_ns < 0:
        raise ValueError("idle time must be non-negative")
    return (3 + math.exp(-t_ns / nm.t1_ns) + 2 * math.exp(-t_ns / nm.t2_ns)) / 6


# --- Lindblad oracle ------------------------------------------------------

_SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
_SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


def _dissipators(nm: NoiseModel) -> list[tuple[float, np.ndarray]]:
    gamma_1 = 1 / nm.t1_ns
    gamma_phi = 1 / nm.t2_ns - 1 / (2 * nm.t1_ns)
    return [(gamma_1, _SIGMA_MINUS), (gamma_phi / 2, _SIGMA_Z)]


def _rhs(rho: np.ndarray, hamiltonian: np.ndarray, jumps) -> np.ndarray:
    out = -1j * (hamiltonian @ rho - rho @ hamiltonian)
    for rate, op in jumps:
        op_dag = op.conj().T
        n = op_dag @ op
        out += rate * (op @ rho @ op_dag - 0.5 * (n @ rho + rho @ n))
    return out


def _liouvillian(hamiltonian: np.ndarray, jumps) -> np.ndarray:
    """Matrix of the master-equation right-hand side acting on row-major vec(rho)."""
    cols = []
    for k in range(4):
        basis = np.zeros(4, dtype=complex)
        basis[k] = 1
        cols.append(_rhs(basis.reshape(2, 2), hamiltonian, jumps).reshape(4))
    return np.array(cols).T


def lindblad_oracle(initial: np.ndarray, t_ns: float, nm: NoiseModel, dt_ns: float | None = None) -> np.ndarray:
    """RK4 integration of the idle (H = 0) single-qubit master equation."""
    rho = np.array(initial, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("oracle integrates a single qubit (2x2 density matrix)")
    if t_ns < 0:
        raise ValueError("t_ns must be non-negative")
    if t_ns == 0:
        return rho
    if dt_ns is None:
        dt_ns = t_ns / 1000
    if not 0 < dt_ns <= t_ns / 100:
        raise ValueError(f"step {dt_ns} ns too coarse for t = {t_ns} ns (need dt <= t/100)")
    steps = math.ceil(t_ns / dt_ns - 1e-9)
    h = t_ns / steps
    lv = _liouvillian(np.zeros((2, 2), dtype=complex), _dissipators(nm))
    v = rho.reshape(4)
    for _ in range(steps):
        k1 = lv @ v
        k2 = lv @ (v + 0.5 * h * k1)
        k3 = lv @ (v + 0.5 * h * k2)
        k4 = lv @ (v + h * k3)
        v = v + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v.reshape(2, 2)


AXIS_STATES = {
    "+z": np.array([1, 0], dtype=complex),
    "-z": np.array([0, 1], dtype=complex),
    "+x": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "-x": np.array([1, -1], dtype=complex) / math.sqrt(2),
    "+y": np.array([1, 1j], dtype=complex) / math.sqrt(2),
    "-y": np.array([1, -1j], dtype=complex) / math.sqrt(2),
}


def oracle_average_fidelity(t_ns: float, nm: NoiseModel, dt_ns: float | None = None) -> float:
    """Idle-channel fidelity averaged over the six Pauli eigenstates."""
    total = 0.0
    for psi in AXIS_STATES.values():
        rho = lindblad_oracle(np.outer(psi, psi.conj()), t_ns, nm, dt_ns)
        total += state_fidelity(psi, rho)
    return total / len(AXIS_STATES)


# --- schedule-level estimator ---------------------------------------------


@dataclass(frozen=True)
class FidelityEstimate:
    process: float
    state: float
    gate_factor: float
    decoherence_factor: float

    def to_dict(self) -> dict:
        return asdict(self)


def estimate_fidelity(
    sched: PulseSchedule, nm: NoiseModel, n_qubits: int, window: str = "circuit"
) -> FidelityEstimate:
    """Gate-error x decoherence surrogate for a scheduled circuit.

    ``window="circuit"`` charges every one of ``n_qubits`` qubits for the full
    schedule duration.  ``window="qubit"`` instead charges each touched qubit
    up to the end of its own last operation (untouched qubits contribute 1).
    """
    n_prx = sched.count(NativeKind.PRX)
    n_cz = sched.count(NativeKind.CZ)
    gate_factor = (1 - nm.err_1q) ** n_prx * (1 - nm.err_2q) ** n_cz
    if window == "circuit":
        decoherence = idle_fidelity(sched.total_duration_ns, nm) ** n_qubits
    elif window == "qubit":
        decoherence = math.prod(idle_fidelity(t, nm) for t in sched.qubit_end_ns().values())
    else:
        raise ValueError(f"unknown decoherence window {window!r}")
    process = gate_factor * decoherence
    state = process + (1 - process) / 2.0**n_qubits
    return FidelityEstimate(process, state, gate_factor, decoherence)
