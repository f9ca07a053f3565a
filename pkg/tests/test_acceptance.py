"""Exit criteria, each at its stated tolerance.

Every test records a PASS/FAIL line (printed in the terminal summary) and
then asserts, so a failing criterion is red in the pytest run as well.
"""
import os
import signal
import statistics
import time
from contextlib import contextmanager

import numpy as np
import pytest

from _fuzz import fuzz_inputs
from _oracles import permutation_matrix, random_circuit
from qcoflow.campaign import (
    REGRESSORS,
    ExperimentKind,
    pass_combinations,
    run_campaign,
    summarize,
    write_campaign,
)
from qcoflow.cli import main as cli_main
from qcoflow.corpus import DEFAULT_SEED, default_corpus, gen_ghz, gen_qft
from qcoflow.ir import Circuit, to_unitary
from qcoflow.noise import GARNET, idle_fidelity, lindblad_oracle, oracle_average_fidelity, process_fidelity_exact
from qcoflow.passes import PassConfig, PassKind, run_pipeline
from qcoflow.qasm import ParseError, parse_qasm
from qcoflow.route import garnet20, line_topology, sabre_route

FIDELITY_FLOOR = 1 - 1e-9
JOBS = os.cpu_count() or 1


@pytest.fixture(scope="module")
def campaign(tmp_path_factory):
    out = tmp_path_factory.mktemp("campaign_a")
    start = time.perf_counter()
    results = run_campaign(default_corpus(DEFAULT_SEED), GARNET, garnet20(), tuple(ExperimentKind), jobs=JOBS)
    write_campaign(results, out)
    return results, out, time.perf_counter() - start


def test_c01_semantics_preservation(criterion):
    start = time.perf_counter()
    worst = 1.0
    combos = [PassConfig(s) for s in pass_combinations()]
    for seed in range(200):
        rng = np.random.default_rng(seed)
        c = random_circuit(rng, 1 + seed % 5, int(rng.integers(1, 41)))
        u = to_unitary(c)
        for cfg in combos:
            out, _ = run_pipeline(c, cfg)
            worst = min(worst, process_fidelity_exact(u, to_unitary(out)))
    elapsed = time.perf_counter() - start
    ok = worst >= FIDELITY_FLOOR and elapsed < 60
    criterion(1, ok, f"min fidelity {worst:.15f} over 200 circuits x {len(combos)} sequences, {elapsed:.1f} s")
    assert ok


def test_c02_routing_correctness(criterion):
    start = time.perf_counter()
    topologies = [line_topology(5), garnet20().subgraph([2, 3, 7, 8, 9], "garnet20-sub5")]
    worst, off_edge = 1.0, 0
    for seed in range(100):
        rng = np.random.default_rng(10_000 + seed)
        n = 2 + seed % 4
        c = random_circuit(rng, n, int(rng.integers(5, 31)), two_qubit_prob=0.5)
        for topo in topologies:
            routed, rep = sabre_route(c, topo)
            off_edge += sum(1 for g in routed.gates if g.is_two_qubit and not topo.has_edge(*g.qubits))
            m = topo.num_qubits
            p_in = permutation_matrix(list(rep.initial_layout.logical_to_physical), m)
            p_out = permutation_matrix(list(rep.final_layout.logical_to_physical), m)
            expected = p_out @ to_unitary(Circuit(m, c.gates)) @ p_in.T
            worst = min(worst, process_fidelity_exact(expected, to_unitary(routed)))
    elapsed = time.perf_counter() - start
    ok = worst >= FIDELITY_FLOOR and off_edge == 0 and elapsed < 60
    criterion(2, ok, f"min fidelity {worst:.15f}, {off_edge} off-edge gates, {elapsed:.1f} s")
    assert ok


def test_c03_ghz_minimality(criterion):
    cfg = PassConfig((PassKind.CANCEL, PassKind.COMMUTE, PassKind.ROTATE))
    sizes = {n: len(run_pipeline(gen_ghz(n), cfg)[0]) for n in range(2, 13)}
    ok = all(sizes[n] == n for n in sizes)
    criterion(3, ok, "gates after optimization: " + ", ".join(f"{n}->{k}" for n, k in sizes.items()))
    assert ok


def test_c04_qft_reduction(criterion):
    c = gen_qft(4)
    out, _ = run_pipeline(c, PassConfig((PassKind.ROTATE, PassKind.CANCEL)))
    reduction = 100 * (len(c) - len(out)) / len(c)
    fid = process_fidelity_exact(to_unitary(c), to_unitary(out))
    ok = reduction >= 50 and fid >= FIDELITY_FLOOR
    criterion(4, ok, f"{len(c)} -> {len(out)} gates ({reduction:.1f}% reduction, need >= 50%), fidelity {fid:.15f}")
    assert ok


def test_c05_lindblad_agreement(criterion):
    start = time.perf_counter()
    gaps = [abs(idle_fidelity(m * GARNET.t2_ns, GARNET) - oracle_average_fidelity(m * GARNET.t2_ns, GARNET))
            for m in (0.1, 0.5, 1, 2, 5)]
    excited = lindblad_oracle(np.diag([0.0, 1.0]), GARNET.t1_ns, GARNET)
    plus = np.full((2, 2), 0.5)
    dephased = lindblad_oracle(plus, GARNET.t2_ns, GARNET)
    pop_err = abs(excited[1, 1].real - np.exp(-1))
    coh_err = abs(abs(dephased[0, 1]) - 0.5 * np.exp(-1))
    elapsed = time.perf_counter() - start
    ok = max(gaps) < 1e-6 and pop_err < 1e-6 and coh_err < 1e-6 and elapsed < 10
    criterion(5, ok, f"max |F_idle - F_oracle| {max(gaps):.2e}, rho11 err {pop_err:.2e}, "
                     f"|rho01| err {coh_err:.2e}, {elapsed:.2f} s")
    assert ok


def test_c06_correlation_direction(criterion, campaign):
    results, _, elapsed = campaign
    scaling = results[ExperimentKind.SCALING]
    stats = summarize(scaling)
    rs = {name: stats.correlations[name]["r"] for name in REGRESSORS}
    r2_exact = all(abs(stats.correlations[n]["r2"] - rs[n] ** 2) <= 1e-12 for n in REGRESSORS)
    ok = (len(scaling) >= 100 and rs["pulse_duration"] <= -0.5 and all(r < 0 for r in rs.values())
          and r2_exact and elapsed < 300)
    detail = ", ".join(f"{n} {r:+.3f}" for n, r in rs.items())
    criterion(6, ok, f"{len(scaling)} circuits; r: {detail}; campaign {elapsed:.0f} s")
    assert ok


def test_c07_pass_ranking(criterion, campaign):
    results, _, _ = campaign
    per_pass = summarize(results[ExperimentKind.PER_PASS]).per_pass
    removed = {p: per_pass[p].gates_removed_total for p in PassKind}
    c, r, i, m = (removed[PassKind.CANCEL], removed[PassKind.ROTATE], removed[PassKind.IDENTITY],
                  removed[PassKind.COMMUTE])
    ok = c >= r >= i >= m and m == 0
    criterion(7, ok, f"gates removed: cancel {c}, rotate {r}, identity {i}, commute {m} "
                     "(need cancel >= rotate >= identity >= commute = 0)")
    assert ok


def test_c08_mean_gate_reduction(criterion, campaign):
    results, _, _ = campaign
    red = [rec.reduction_pct for rec in results[ExperimentKind.SCALING]]
    mean, top = statistics.fmean(red), max(red)
    ok = mean >= 15 and top >= 50
    criterion(8, ok, f"best sequence: mean reduction {mean:.1f}% (need >= 15), max {top:.1f}% (need >= 50)")
    assert ok


def test_c09_noise_monotonicity(criterion, campaign):
    results, _, _ = campaign
    recs = results[ExperimentKind.NOISE_SENSITIVITY]
    names = ("low", "medium", "high", "very_high")
    means = [statistics.fmean(r.fidelity.process for r in recs if r.config_id == f"noise_sensitivity/{n}")
             for n in names]
    ok = all(a > b for a, b in zip(means, means[1:]))
    criterion(9, ok, "mean F_proc " + ", ".join(f"{n} {m:.4f}" for n, m in zip(names, means)))
    assert ok


def test_c10_determinism(criterion, campaign, tmp_path, capsys):
    _, first, _ = campaign
    second = tmp_path / "campaign_b"
    code = cli_main(["campaign", "--out", str(second), "--seed", str(DEFAULT_SEED), "--jobs", str(JOBS)])
    capsys.readouterr()
    same = {name: (first / name).read_bytes() == (second / name).read_bytes() for name in ("report.json", "records.csv")}
    ok = code == 0 and all(same.values())
    criterion(10, ok, "byte-identical: " + ", ".join(f"{k} {v}" for k, v in same.items()))
    assert ok


class _Hang(Exception):
    pass


@contextmanager
def _deadline(seconds: float):
    def boom(signum, frame):
        raise _Hang

    old = signal.signal(signal.SIGALRM, boom)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def test_c11_qasm_robustness(criterion):
    crashes, slow, parsed, rejected = [], 0, 0, 0
    slowest = 0.0
    for data in fuzz_inputs(10_000):
        start = time.perf_counter()
        try:
            with _deadline(5.0):
                parse_qasm(data)
            parsed += 1
        except ParseError:
            rejected += 1
        except _Hang:
            slow += 1
        except Exception as exc:  # noqa: BLE001 - any other outcome is a crash
            crashes.append(f"{type(exc).__name__}: {exc}")
        took = time.perf_counter() - start
        slowest = max(slowest, took)
        if took > 1.0:
            slow += 1
    ok = not crashes and slow == 0
    criterion(11, ok, f"10000 inputs: {parsed} parsed, {rejected} ParseError, {len(crashes)} crashes, "
                      f"{slow} over 1 s (slowest {slowest * 1e3:.1f} ms)")
    assert ok, crashes[:5]
