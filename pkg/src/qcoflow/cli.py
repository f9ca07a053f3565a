"""Command-line entry point: ``qcoflow <subcommand> ...``.

Exit status: 0 on success, 1 on usage errors (bad flags, missing input
files), 2 when a pipeline stage fails.  Diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from ._io import atomic_write_text
from .campaign import (
    ExperimentKind,
    StageError,
    run_campaign,
    run_pipeline_full,
    write_campaign,
)
from .corpus import DEFAULT_SEED, CorpusSpec, Family, default_corpus, default_corpus_specs, derive_seed
from .ir import depth, gate_counts
from .noise import estimate_fidelity, load_noise_model
from .passes import PassConfig, run_pipeline
from .pulse import PulseSchedule, decompose_to_native, schedule
from .qasm import ParseError, emit_qasm, parse_qasm
from .route import TopologyError, load_topology, sabre_route


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    return p.read_text(encoding="utf-8", errors="strict")


def _write_output(path: str | None, text: str) -> None:
    if path is None:
        return
    if path == "-":
        sys.stdout.write(text)
    else:
        atomic_write_text(path, text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=1) + "\n"


def _passes(args) -> PassConfig | None:
    if not args.passes:
        return None
    try:
        return PassConfig.parse(args.passes, max_rounds=args.max_rounds)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _topology(spec: str | None):
    if not spec:
        return None
    try:
        return load_topology(spec)
    except TopologyError as exc:
        raise UsageError(str(exc)) from None


def _noise(spec: str):
    try:
        return load_noise_model(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QCO_SEED")
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise UsageError(f"QCO_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _int_list(text: str) -> list[int]:
    out = []
    try:
        for part in text.split(","):
            if "-" in part.strip()[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            elif part.strip():
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers like '4' or '2-8' or '4,6,8', got {text!r}") from None
    return out


# --- subcommands -------------------------------------------------------------


def cmd_optimize(args) -> int:
    cfg = _passes(args)
    if cfg is None:
        raise UsageError("optimize: --passes is required")
    circuit = parse_qasm(_read_input(args.input), name=Path(args.input).stem)
    optimized, reports = run_pipeline(circuit, cfg)
    _write_output(args.out, emit_qasm(optimized))
    if args.report:
        _write_output(args.report, _dump({
            "passes": [p.value for p in cfg.sequence],
            "gates_before": len(circuit),
            "gates_after": len(optimized),
            "pass_reports": [r.to_dict() for r in reports],
        }))
    return 0


def cmd_route(args) -> int:
    topo = _topology(args.topology)
    circuit = parse_qasm(_read_input(args.input), name=Path(args.input).stem)
    routed, report = sabre_route(circuit, topo)
    _write_output(args.out, emit_qasm(routed))
    if args.report:
        _write_output(args.report, _dump({"topology": topo.name, **report.to_dict()}))
    return 0


def cmd_compile(args) -> int:
    nm = _noise(args.noise)
    circuit = parse_qasm(_read_input(args.input), name=Path(args.input).stem)
    sched = schedule(decompose_to_native(circuit), nm.durations())
    _write_output(args.out, _dump(sched.to_dict()))
    return 0


def cmd_simulate(args) -> int:
    nm = _noise(args.noise)
    text = _read_input(args.input)
    if text.lstrip().startswith("{"):
        try:
            sched = PulseSchedule.from_dict(json.loads(text))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise StageError("simulate", exc) from None
    else:
        circuit = parse_qasm(text, name=Path(args.input).stem)
        sched = schedule(decompose_to_native(circuit), nm.durations())
    n = args.qubits or sched.num_qubits
    est = estimate_fidelity(sched, nm, n, window=args.window)
    _write_output(args.out, _dump({
        "num_qubits": n,
        "total_duration_ns": sched.total_duration_ns,
        "fidelity": est.to_dict(),
        "state_fidelity_is_estimate": True,
    }))
    return 0


def cmd_pipeline(args) -> int:
    cfg = _passes(args)
    topo = _topology(args.topology)
    nm = _noise(args.noise)
    circuit = parse_qasm(_read_input(args.input), name=Path(args.input).stem)
    record = run_pipeline_full(circuit, cfg, topo, nm, config_id=f"cli/{cfg.label if cfg else 'none'}",
                               window=args.window)
    _write_output(args.report, _dump(record.to_dict()))
    return 0


def cmd_corpus_generate(args) -> int:
    seed = _seed(args)
    out = Path(args.out)
    family = Family(args.family)
    if family is Family.RANDOM and not args.layers:
        raise UsageError("corpus generate: --layers is required for the random family")
    entries = []
    for n in args.qubits:
        for depth_layers in (args.layers if family is Family.RANDOM else [0]):
            for k in range(args.count if family in (Family.RANDOM, Family.QAOA) else 1):
                # same derivation as the built-in corpus, so names and circuits agree
                if family is Family.RANDOM:
                    s = derive_seed(seed, 2, n, depth_layers, k)
                elif family is Family.QAOA:
                    s = derive_seed(seed, 1, n, k)
                else:
                    s = 0
                try:
                    spec = CorpusSpec(family, n, depth_layers, s, allow_out_of_range=args.allow_out_of_range)
                except ValueError as exc:
                    raise UsageError(str(exc)) from None
                entries.append((_corpus_name(spec, k), spec))
    _write_corpus(entries, out, seed)
    return 0


def cmd_corpus_default(args) -> int:
    seed = _seed(args)
    _write_corpus(default_corpus_specs(seed), Path(args.out), seed)
    return 0


def _corpus_name(spec: CorpusSpec, k: int) -> str:
    if spec.family is Family.RANDOM:
        return f"random_{spec.qubits}q_{spec.depth_layers}l_r{k}"
    if spec.family is Family.QAOA:
        return f"qaoa_ring_{spec.qubits}q_r{k}"
    return f"{spec.family.value}_{spec.qubits}q"


def _write_corpus(entries, out: Path, base_seed: int) -> None:
    manifest = []
    for name, spec in entries:
        circuit = spec.generate(name)
        counts = gate_counts(circuit)
        atomic_write_text(out / f"{name}.qasm", emit_qasm(circuit))
        manifest.append({
            "name": name,
            "file": f"{name}.qasm",
            **spec.to_dict(),
            "seed": spec.seed,
            "gates": counts.total,
            "two_qubit_gates": counts.two_qubit,
            "depth": depth(circuit),
        })
    atomic_write_text(out / "manifest.json", _dump({"base_seed": base_seed, "circuits": manifest}))


def _load_corpus_dir(path: Path):
    files = sorted(path.glob("*.qasm"))
    if not files:
        raise UsageError(f"no .qasm files in {path}")
    return [parse_qasm(f.read_text(encoding="utf-8"), name=f.stem) for f in files]


def cmd_campaign(args) -> int:
    seed = _seed(args)
    topo = _topology(args.topology)
    nm = _noise(args.noise)
    if args.corpus:
        if not Path(args.corpus).is_dir():
            raise UsageError(f"corpus directory not found: {args.corpus}")
        corpus = _load_corpus_dir(Path(args.corpus))
    else:
        corpus = default_corpus(seed)
    try:
        kinds = [ExperimentKind(k.strip()) for k in args.experiments.split(",") if k.strip()]
    except ValueError:
        raise UsageError(f"unknown experiment in {args.experiments!r}") from None
    if not kinds:
        raise UsageError("campaign: --experiments selects nothing")
    jobs = args.jobs or os.cpu_count() or 1
    results = run_campaign(corpus, nm, topo, kinds, jobs=jobs)
    meta = {
        "tool": "qcoflow",
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "jobs": jobs,
        "corpus_size": len(corpus),
        "experiments": [k.value for k in kinds],
        "topology": topo.name if topo else None,
        "topology_note": "garnet20 is an approximation of the IQM Garnet coupler map" if topo and topo.name == "garnet20" else None,
        "noise": nm.to_dict(),
        "state_fidelity_is_estimate": True,
    }
    paths = write_campaign(results, args.out, meta=meta)
    n = sum(len(v) for v in results.values())
    print(f"wrote {n} records to {paths['report'].parent}", file=sys.stderr)
    return 0


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qcoflow", description="Quantum circuit optimization and fidelity pipeline.")
    p.add_argument("--version", action="version", version=f"qcoflow {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add_in(sp):
        sp.add_argument("--in", dest="input", required=True, metavar="FILE",
                        help="input OpenQASM 3 file ('-' for stdin)")

    def add_passes(sp, required=False):
        sp.add_argument("--passes", required=required, default=None,
                        help="comma-separated passes: cancel,commute,rotate,identity")
        sp.add_argument("--max-rounds", type=int, default=10, help="fixpoint round cap (default 10)")

    def add_noise(sp):
        sp.add_argument("--noise", default="garnet",
                        help="noise preset (garnet, low, medium, high, very_high) or JSON file")

    def add_window(sp):
        sp.add_argument("--window", choices=("circuit", "qubit"), default="circuit",
                        help="decoherence window: whole schedule (default) or per-qubit")

    sp = sub.add_parser("optimize", help="run optimization passes on a circuit")
    add_in(sp)
    add_passes(sp, required=True)
    sp.add_argument("--out", default="-", help="output QASM path ('-' for stdout)")
    sp.add_argument("--report", help="write per-pass metrics JSON here")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("route", help="route a circuit onto a coupling topology")
    add_in(sp)
    sp.add_argument("--topology", required=True, help="garnet20, line<N>, complete<N> or JSON file")
    sp.add_argument("--out", default="-", help="output QASM path ('-' for stdout)")
    sp.add_argument("--report", help="write routing statistics JSON here")
    sp.set_defaults(func=cmd_route)

    sp = sub.add_parser("compile", help="decompose to native gates and schedule pulses")
    add_in(sp)
    add_noise(sp)
    sp.add_argument("--out", default="-", help="output schedule JSON ('-' for stdout)")
    sp.set_defaults(func=cmd_compile)

    sp = sub.add_parser("simulate", help="estimate fidelity of a schedule JSON or QASM circuit")
    add_in(sp)
    add_noise(sp)
    add_window(sp)
    sp.add_argument("--qubits", type=int, default=None, help="qubits charged for decoherence (default: schedule width)")
    sp.add_argument("--out", default="-", help="output JSON ('-' for stdout)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("pipeline", help="optimize, route, compile and simulate one circuit")
    add_in(sp)
    add_passes(sp)
    sp.add_argument("--topology", default=None, help="routing topology (omit to skip routing)")
    add_noise(sp)
    add_window(sp)
    sp.add_argument("--report", default="-", help="output RunRecord JSON ('-' for stdout)")
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("corpus", help="generate benchmark circuits")
    csub = sp.add_subparsers(dest="corpus_command", metavar="ACTION", parser_class=_Parser)
    csub.required = True
    gp = csub.add_parser("generate", help="generate one family")
    gp.add_argument("--family", required=True, choices=[f.value for f in Family], help="circuit family")
    gp.add_argument("--qubits", required=True, type=_int_list, help="e.g. 4, 2-8 or 4,6,8")
    gp.add_argument("--layers", type=_int_list, default=None, help="random family only, e.g. 5,10,20")
    gp.add_argument("--count", type=int, default=1, help="instances per size (random/qaoa)")
    gp.add_argument("--seed", type=int, default=None, help="base seed (default: $QCO_SEED or 7)")
    gp.add_argument("--allow-out-of-range", action="store_true", help="permit sizes outside the family ranges")
    gp.add_argument("--out", required=True, help="output directory")
    gp.set_defaults(func=cmd_corpus_generate)
    dp = csub.add_parser("default", help="write the 105-circuit default corpus")
    dp.add_argument("--seed", type=int, default=None, help="base seed (default: $QCO_SEED or 7)")
    dp.add_argument("--out", required=True, help="output directory")
    dp.set_defaults(func=cmd_corpus_default)

    sp = sub.add_parser("campaign", help="run the experiment campaign and write reports")
    sp.add_argument("--out", required=True, help="output directory for report.json, records.csv, meta.json")
    sp.add_argument("--corpus", default=None, help="directory of .qasm files (default: built-in corpus)")
    sp.add_argument("--experiments", default=",".join(k.value for k in ExperimentKind),
                    help="comma-separated experiment names (default: all six)")
    sp.add_argument("--topology", default="garnet20", help="routing topology")
    add_noise(sp)
    sp.add_argument("--seed", type=int, default=None, help="corpus seed (default: $QCO_SEED or 7)")
    sp.add_argument("--jobs", type=int, default=None, help="worker processes (default: all CPUs)")
    sp.set_defaults(func=cmd_campaign)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, StageError, TopologyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
