"""scikit-learn style wrappers around the functional pipeline.

Each stage is a ``BaseEstimator`` so it supports ``get_params``/``set_params``,
``clone`` and composition with :class:`sklearn.pipeline.Pipeline`::

    Pipeline([
        ("opt", CircuitOptimizer("cancel,commute,rotate")),
        ("route", QubitRouter("garnet20")),
        ("pulse", PulseCompiler()),
        ("fid", FidelityEstimator()),
    ]).fit(circuits).predict(circuits)

Samples are circuits (or QASM strings), not numeric rows, so the numeric
input checks from ``sklearn.utils`` do not apply; :func:`check_circuits` and
:func:`check_schedules` play that role.
"""
from __future__ import annotations

from collections.abc import Iterable

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .ir import Circuit
from .noise import NoiseModel, estimate_fidelity, load_noise_model
from .passes import PassConfig, run_pipeline
from .pulse import PulseSchedule, decompose_to_native, schedule
from .qasm import parse_qasm
from .route import Topology, load_topology, sabre_route


def check_circuits(X) -> list[Circuit]:
    """Coerce a circuit, a QASM string, or an iterable of either to a list of circuits."""
    if isinstance(X, (Circuit, str, bytes)):
        X = [X]
    if not isinstance(X, Iterable):
        raise TypeError(f"expected circuits or QASM text, got {type(X).__name__}")
    out = []
    for i, item in enumerate(X):
        if isinstance(item, Circuit):
            out.append(item)
        elif isinstance(item, (str, bytes)):
            out.append(parse_qasm(item))
        else:
            raise TypeError(f"sample {i}: expected Circuit or QASM text, got {type(item).__name__}")
    if not out:
        raise ValueError("empty input: at least one circuit is required")
    return out


def check_schedules(X, noise: NoiseModel | None = None) -> list[PulseSchedule]:
    """Like :func:`check_circuits`, but circuits are compiled to schedules."""
    if isinstance(X, PulseSchedule):
        X = [X]
    items = list(X) if isinstance(X, Iterable) and not isinstance(X, (str, bytes, Circuit)) else [X]
    if not items:
        raise ValueError("empty input: at least one schedule is required")
    durations = noise.durations() if noise is not None else None
    out = []
    for item in items:
        if isinstance(item, PulseSchedule):
            out.append(item)
        else:
            (c,) = check_circuits(item)
            out.append(schedule(decompose_to_native(c), durations))
    return out


def _resolve_noise(noise) -> NoiseModel:
    if isinstance(noise, NoiseModel):
        return noise
    if isinstance(noise, str):
        return load_noise_model(noise)
    raise TypeError(f"noise must be a NoiseModel or preset name, got {type(noise).__name__}")


class CircuitOptimizer(TransformerMixin, BaseEstimator):
    """Apply a pass sequence until fixpoint (or ``max_rounds``)."""

    def __init__(self, passes="cancel,commute,rotate", max_rounds=10, angle_tolerance=1e-9):
        self.passes = passes
        self.max_rounds = max_rounds
        self.angle_tolerance = angle_tolerance

    def fit(self, X=None, y=None):
        seq = PassConfig.parse(self.passes).sequence if isinstance(self.passes, str) else tuple(self.passes)
        self.config_ = PassConfig(seq, self.max_rounds, self.angle_tolerance)
        return self

    def transform(self, X) -> list[Circuit]:
        check_is_fitted(self, "config_")
        out, self.reports_ = [], []
        for c in check_circuits(X):
            optimized, reports = run_pipeline(c, self.config_)
            out.append(optimized)
            self.reports_.append(reports)
        return out


class QubitRouter(TransformerMixin, BaseEstimator):
    def __init__(self, topology="garnet20"):
        self.topology = topology

    def fit(self, X=None, y=None):
        self.topology_ = self.topology if isinstance(self.topology, Topology) else load_topology(self.topology)
        return self

    def transform(self, X) -> list[Circuit]:
        check_is_fitted(self, "topology_")
        out, self.reports_ = [], []
        for c in check_circuits(X):
            routed, report = sabre_route(c, self.topology_)
            out.append(routed)
            self.reports_.append(report)
        return out


class PulseCompiler(TransformerMixin, BaseEstimator):
    """Lower circuits to native ops and schedule them with the model's durations."""

    def __init__(self, noise="garnet"):
        self.noise = noise

    def fit(self, X=None, y=None):
        self.noise_model_ = _resolve_noise(self.noise)
        return self

    def transform(self, X) -> list[PulseSchedule]:
        check_is_fitted(self, "noise_model_")
        durations = self.noise_model_.durations()
        return [schedule(decompose_to_native(c), durations) for c in check_circuits(X)]


class FidelityEstimator(BaseEstimator):
    """Predict process (or state) fidelity for schedules or circuits.

    ``n_qubits=None`` charges decoherence to the qubits the schedule actually
    touches, which after routing can include qubits used only by SWAPs.
    """

    def __init__(self, noise="garnet", window="circuit", n_qubits=None, target="process"):
        self.noise = noise
        self.window = window
        self.n_qubits = n_qubits
        self.target = target

    def fit(self, X=None, y=None):
        if self.window not in ("circuit", "qubit"):
            raise ValueError(f"window must be 'circuit' or 'qubit', got {self.window!r}")
        if self.target not in ("process", "state"):
            raise ValueError(f"target must be 'process' or 'state', got {self.target!r}")
        if self.n_qubits is not None and self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.noise_model_ = _resolve_noise(self.noise)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "noise_model_")
        values = []
        for s in check_schedules(X, self.noise_model_):
            n = self.n_qubits or max(len(s.qubit_end_ns()), 1)
            est = estimate_fidelity(s, self.noise_model_, n, window=self.window)
            values.append(est.process if self.target == "process" else est.state)
        return np.asarray(values, dtype=float)
