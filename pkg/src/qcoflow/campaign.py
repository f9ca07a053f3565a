"""End-to-end runs, the six-experiment campaign, statistics and reports."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from ._io import atomic_write_text
from .ir import Circuit, depth, gate_counts
from .noise import GARNET, NOISE_REGIMES, FidelityEstimate, NoiseModel, estimate_fidelity
from .passes import PassConfig, PassKind, PassReport, run_pipeline
from .pulse import NativeKind, decompose_to_native, schedule
from .route import RoutingReport, Topology, sabre_route

BEST_SEQUENCE = (PassKind.CANCEL, PassKind.COMMUTE, PassKind.ROTATE)
REGRESSORS = ("pulse_duration", "input_gates", "input_depth", "input_qubits", "two_qubit_gates")
CSV_COLUMNS = (
    "circuit_name", "family", "config_id", "qubits", "gates_in", "gates_out", "reduction_pct",
    "depth_in", "two_qubit_gates", "swaps", "duration_ns", "f_process", "f_state",
)


class ExperimentKind(str, Enum):
    BASELINE = "baseline"
    PER_PASS = "per_pass"
    PASS_COMBOS = "pass_combos"
    ROUTING_IMPACT = "routing_impact"
    NOISE_SENSITIVITY = "noise_sensitivity"
    SCALING = "scaling"


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class RunRecord:
    circuit_name: str
    family: str
    config_id: str
    pass_sequence: tuple[PassKind, ...]
    input_qubits: int
    input_gates: int
    input_depth: int
    input_two_qubit_gates: int
    optimized_gates: int
    pass_reports: tuple[PassReport, ...]
    routing: RoutingReport | None
    total_duration_ns: float
    prx_count: int
    cz_count: int
    fidelity: FidelityEstimate

    @property
    def reduction_pct(self) -> float:
        if self.input_gates == 0:
            return 0.0
        return 100.0 * (self.input_gates - self.optimized_gates) / self.input_gates

    @property
    def swaps(self) -> int:
        return self.routing.swaps_inserted if self.routing else 0

    @property
    def routed_gates(self) -> int:
        return self.optimized_gates + self.swaps

    def regressor(self, name: str) -> float:
        return {
            "pulse_duration": self.total_duration_ns,
            "input_gates": self.input_gates,
            "input_depth": self.input_depth,
            "input_qubits": self.input_qubits,
            "two_qubit_gates": self.input_two_qubit_gates,
        }[name]

    def to_dict(self) -> dict:
        return {
            "circuit_name": self.circuit_name,
            "family": self.family,
            "config_id": self.config_id,
            "passes": [p.value for p in self.pass_sequence],
            "input": {
                "qubits": self.input_qubits,
                "gates": self.input_gates,
                "depth": self.input_depth,
                "two_qubit_gates": self.input_two_qubit_gates,
            },
            "optimized_gates": self.optimized_gates,
            "reduction_pct": self.reduction_pct,
            "pass_reports": [r.to_dict() for r in self.pass_reports],
            "routing": self.routing.to_dict() if self.routing else None,
            "pulse": {
                "total_duration_ns": self.total_duration_ns,
                "prx_count": self.prx_count,
                "cz_count": self.cz_count,
            },
            "fidelity": self.fidelity.to_dict(),
        }

    def csv_row(self) -> list:
        return [
            self.circuit_name, self.family, self.config_id, self.input_qubits, self.input_gates,
            self.optimized_gates, repr(self.reduction_pct), self.input_depth,
            self.input_two_qubit_gates, self.swaps, repr(self.total_duration_ns),
            repr(self.fidelity.process), repr(self.fidelity.state),
        ]


def _family_of(c: Circuit) -> str:
    return c.name.split("_", 1)[0] if c.name else "unknown"


def run_pipeline_full(
    c: Circuit,
    passes: PassConfig | None,
    topo: Topology | None,
    nm: NoiseModel = GARNET,
    config_id: str = "",
    family: str | None = None,
    window: str = "circuit",
) -> RunRecord:
    """Validate, optimize, route, compile to pulses and estimate fidelity."""
    try:
        counts = gate_counts(c)
        in_depth = depth(c)
    except Exception as exc:  # noqa: BLE001 - tag and re-raise
        raise StageError("parse", exc) from exc
    try:
        if passes is None:
            optimized, reports = c, []
        else:
            optimized, reports = run_pipeline(c, passes)
    except Exception as exc:  # noqa: BLE001
        raise StageError("optimize", exc) from exc
    try:
        routing = None
        routed = optimized
        if topo is not None:
            routed, routing = sabre_route(optimized, topo)
    except Exception as exc:  # noqa: BLE001
        raise StageError("route", exc) from exc
    try:
        native = decompose_to_native(routed)
        sched = schedule(native, nm.durations())
    except Exception as exc:  # noqa: BLE001
        raise StageError("pulse", exc) from exc
    try:
        fid = estimate_fidelity(sched, nm, c.num_qubits, window=window)
    except Exception as exc:  # noqa: BLE001
        raise StageError("simulate", exc) from exc
    return RunRecord(
        circuit_name=c.name,
        family=family or _family_of(c),
        config_id=config_id,
        pass_sequence=passes.sequence if passes else (),
        input_qubits=c.num_qubits,
        input_gates=counts.total,
        input_depth=in_depth,
        input_two_qubit_gates=counts.two_qubit,
        optimized_gates=len(optimized),
        pass_reports=tuple(reports),
        routing=routing,
        total_duration_ns=sched.total_duration_ns,
        prx_count=sched.count(NativeKind.PRX),
        cz_count=sched.count(NativeKind.CZ),
        fidelity=fid,
    )


# --- experiments ------------------------------------------------------------


def pass_combinations() -> list[tuple[PassKind, ...]]:
    """Every ordered sequence of 1-3 distinct passes, plus the named best sequence."""
    seqs = []
    for length in (1, 2, 3):
        seqs.extend(itertools.permutations(PassKind, length))
    if BEST_SEQUENCE not in seqs:
        seqs.append(BEST_SEQUENCE)
    return seqs


@dataclass(frozen=True)
class _Task:
    circuit: Circuit
    passes: PassConfig | None
    topo: Topology | None
    nm: NoiseModel
    config_id: str


def _configs(kind: ExperimentKind, base_nm: NoiseModel, topo: Topology | None):
    best = PassConfig(BEST_SEQUENCE)
    if kind is ExperimentKind.BASELINE:
        return [("baseline", None, topo, base_nm)]
    if kind is ExperimentKind.PER_PASS:
        return [(f"per_pass/{p.value}", PassConfig((p,)), topo, base_nm) for p in PassKind]
    if kind is ExperimentKind.PASS_COMBOS:
        return [
            (f"pass_combos/{PassConfig(s).label}", PassConfig(s), topo, base_nm)
            for s in pass_combinations()
        ]
    if kind is ExperimentKind.ROUTING_IMPACT:
        out = [("routing_impact/unrouted", best, None, base_nm)]
        if topo is not None:
            out.insert(0, ("routing_impact/routed", best, topo, base_nm))
        return out
    if kind is ExperimentKind.NOISE_SENSITIVITY:
        return [(f"noise_sensitivity/{r.name}", best, topo, r.apply(base_nm)) for r in NOISE_REGIMES]
    return [("scaling", best, topo, base_nm)]


def _run_task(task: _Task) -> RunRecord:
    return run_pipeline_full(task.circuit, task.passes, task.topo, task.nm, task.config_id)


def _sort_key(r: RunRecord):
    return (r.config_id, r.circuit_name)


def run_tasks(tasks: list[_Task], jobs: int = 1) -> list[RunRecord]:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=16))
    else:
        records = [_run_task(t) for t in tasks]
    return sorted(records, key=_sort_key)


def run_experiment(
    kind: ExperimentKind,
    corpus: list[Circuit],
    base_nm: NoiseModel = GARNET,
    topo: Topology | None = None,
    jobs: int = 1,
) -> list[RunRecord]:
    if not corpus:
        raise ValueError("corpus is empty")
    kind = ExperimentKind(kind)
    tasks = [
        _Task(c, passes, t, nm, cid)
        for cid, passes, t, nm in _configs(kind, base_nm, topo)
        for c in corpus
    ]
    return run_tasks(tasks, jobs)


def run_campaign(
    corpus: list[Circuit],
    base_nm: NoiseModel = GARNET,
    topo: Topology | None = None,
    experiments=tuple(ExperimentKind),
    jobs: int = 1,
) -> dict[ExperimentKind, list[RunRecord]]:
    if not corpus:
        raise ValueError("corpus is empty")
    tasks: list[_Task] = []
    owner: dict[str, ExperimentKind] = {}
    for kind in experiments:
        kind = ExperimentKind(kind)
        for cid, passes, t, nm in _configs(kind, base_nm, topo):
            owner[cid] = kind
            tasks.extend(_Task(c, passes, t, nm, cid) for c in corpus)
    results: dict[ExperimentKind, list[RunRecord]] = {ExperimentKind(k): [] for k in experiments}
    for rec in run_tasks(tasks, jobs):
        results[owner[rec.config_id]].append(rec)
    return results


# --- statistics ---------------------------------------------------------------


class DegenerateDataError(ValueError):
    pass


def pearson_r(xs, ys) -> float:
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("pearson_r needs two equal-length samples of size >= 2")
    mx, my = math.fsum(xs) / len(xs), math.fsum(ys) / len(ys)
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise DegenerateDataError("zero variance")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class PassStats:
    gates_removed_total: int
    circuits: int
    circuits_improved: int

    @property
    def pct_circuits_improved(self) -> float:
        return 100.0 * self.circuits_improved / self.circuits if self.circuits else 0.0

    def to_dict(self) -> dict:
        return {
            "gates_removed_total": self.gates_removed_total,
            "circuits": self.circuits,
            "pct_circuits_improved": self.pct_circuits_improved,
        }


@dataclass(frozen=True)
class SummaryStats:
    n_runs: int
    mean_process_fidelity: float
    std_process_fidelity: float
    median_process_fidelity: float
    mean_gate_reduction_pct: float
    max_gate_reduction_pct: float
    per_pass: dict = field(default_factory=dict)  # PassKind -> PassStats
    correlations: dict = field(default_factory=dict)  # regressor -> {"r", "r2"} or None

    def to_dict(self) -> dict:
        return {
            "n_runs": self.n_runs,
            "mean_process_fidelity": self.mean_process_fidelity,
            "std_process_fidelity": self.std_process_fidelity,
            "median_process_fidelity": self.median_process_fidelity,
            "mean_gate_reduction_pct": self.mean_gate_reduction_pct,
            "max_gate_reduction_pct": self.max_gate_reduction_pct,
            "per_pass": {p.value: s.to_dict() for p, s in self.per_pass.items()},
            "correlations": dict(self.correlations),
        }


def _per_pass(records: list[RunRecord]) -> dict:
    seen: dict[tuple, RunRecord] = {}
    for r in records:
        if len(r.pass_sequence) == 1:
            seen.setdefault((r.pass_sequence[0], r.circuit_name), r)
    out = {}
    for p in PassKind:
        runs = [r for (kind, _), r in seen.items() if kind is p]
        if not runs:
            continue
        removed = [sum(rep.gates_removed for rep in r.pass_reports) for r in runs]
        out[p] = PassStats(sum(removed), len(runs), sum(1 for x in removed if x >= 1))
    return out


def _correlations(records: list[RunRecord]) -> dict:
    fid = [r.fidelity.process for r in records]
    out = {}
    for name in REGRESSORS:
        try:
            r = pearson_r([rec.regressor(name) for rec in records], fid)
        except ValueError:
            out[name] = None
            continue
        out[name] = {"r": r, "r2": r * r}
    return out


def summarize(records: list[RunRecord]) -> SummaryStats:
    if not records:
        raise ValueError("cannot summarize an empty record list")
    fid = [r.fidelity.process for r in records]
    red = [r.reduction_pct for r in records]
    return SummaryStats(
        n_runs=len(records),
        mean_process_fidelity=statistics.fmean(fid),
        std_process_fidelity=statistics.pstdev(fid),
        median_process_fidelity=statistics.median(fid),
        mean_gate_reduction_pct=statistics.fmean(red),
        max_gate_reduction_pct=max(red),
        per_pass=_per_pass(records),
        correlations=_correlations(records) if len(records) >= 2 else {},
    )


# --- reports -----------------------------------------------------------------


def records_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def report_json(stats: SummaryStats, records: list[RunRecord], experiments: dict | None = None) -> str:
    doc = {"summary": stats.to_dict()}
    if experiments:
        doc["experiments"] = {str(ExperimentKind(k).value): s.to_dict() for k, s in experiments.items()}
    doc["records"] = [r.to_dict() for r in sorted(records, key=_sort_key)]
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def emit_report(
    stats: SummaryStats,
    records: list[RunRecord],
    path,
    experiments: dict | None = None,
    meta: dict | None = None,
) -> dict[str, Path]:
    """Write report.json, records.csv and meta.json into directory ``path``.

    Only meta.json may carry run-specific data such as timestamps; the other
    two files are byte-identical for identical inputs.
    """
    if not records:
        raise ValueError("no records to report")
    out = Path(path)
    ordered = sorted(records, key=_sort_key)
    report = report_json(stats, ordered, experiments)
    table = records_csv(ordered)
    paths = {"report": out / "report.json", "records": out / "records.csv"}
    atomic_write_text(paths["report"], report)
    atomic_write_text(paths["records"], table)
    if meta is not None:
        paths["meta"] = out / "meta.json"
        atomic_write_text(paths["meta"], json.dumps(meta, indent=1, sort_keys=True) + "\n")
    return paths


def write_campaign(results: dict, path, meta: dict | None = None) -> dict[str, Path]:
    """Report a :func:`run_campaign` result: overall summary plus one per experiment."""
    kinds = [k for k in ExperimentKind if results.get(k)]
    if not kinds:
        raise ValueError("no records to report")
    records = [r for k in kinds for r in results[k]]
    per_exp = {k: summarize(results[k]) for k in kinds}
    return emit_report(summarize(records), records, path, experiments=per_exp, meta=meta)
