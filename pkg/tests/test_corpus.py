import math
from collections import Counter

import numpy as np
import pytest

from _oracles import dft_bit_reversed, fidelity, unitary
from qcoflow.corpus import (
    DEFAULT_SEED,
    CorpusSpec,
    Family,
    SplitMix64,
    controlled_phase,
    default_corpus,
    derive_seed,
    gen_ghz,
    gen_qaoa,
    gen_qft,
    gen_random,
    ring_edges,
)
from qcoflow.ir import Circuit, GateKind, depth, gate, gate_counts
from qcoflow.passes import PassConfig, PassKind, run_pipeline
from qcoflow.qasm import emit_qasm, parse_qasm


def test_splitmix_reference_vector():
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_rng_helpers_in_range():
    rng = SplitMix64(123)
    assert all(0 <= rng.uniform() < 1 for _ in range(1000))
    assert Counter(rng.below(3) for _ in range(3000)).keys() == {0, 1, 2}
    items = list(range(10))
    rng.shuffle(items)
    assert sorted(items) == list(range(10))
    assert derive_seed(7, 1, 2) == derive_seed(7, 1, 2) != derive_seed(7, 2, 1)


def test_ghz_examples():
    assert len(gen_ghz(4)) == 4 and gate_counts(gen_ghz(4)).two_qubit == 3
    assert len(gen_ghz(12)) == 12
    bell = gen_ghz(2)
    assert bell.gates == (gate("h", 0), gate("cx", 0, 1))
    psi = unitary(bell)[:, 0]
    np.testing.assert_allclose(psi, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)], atol=1e-12)
    with pytest.raises(ValueError):
        gen_ghz(1)


@pytest.mark.parametrize("n", range(2, 9))
def test_qft_gate_count_formula(n):
    assert len(gen_qft(n)) == n + 5 * n * (n - 1) // 2


def test_qft4_count():
    assert len(gen_qft(4)) == 34


@pytest.mark.parametrize("n", [2, 3, 4])
def test_qft_matches_dft(n):
    assert fidelity(dft_bit_reversed(n), unitary(gen_qft(n))) >= 1 - 1e-9


def test_controlled_phase_matches_diag():
    theta = 0.77
    cp = unitary(Circuit(2, tuple(controlled_phase(theta, 1, 0))))
    assert fidelity(np.diag([1, 1, 1, np.exp(1j * theta)]), cp) >= 1 - 1e-12


def test_qft3_rotate_cancel_reduces():
    c = gen_qft(3)
    out, _ = run_pipeline(c, PassConfig((PassKind.ROTATE, PassKind.CANCEL)))
    assert fidelity(unitary(c), unitary(out)) >= 1 - 1e-9
    assert len(out) < 18


def test_qaoa_examples():
    assert len(gen_qaoa(2, [(0, 1)], seed=1)) == 7
    tri = [(0, 1), (1, 2), (0, 2)]
    assert len(gen_qaoa(3, tri, seed=1)) == 15
    assert gen_qaoa(3, tri, seed=42) == gen_qaoa(3, tri, seed=42)
    assert gen_qaoa(3, tri, seed=42) != gen_qaoa(3, tri, seed=43)
    with pytest.raises(ValueError):
        gen_qaoa(3, [(0, 3)], seed=1)


def test_qaoa_angles_in_open_interval():
    for seed in range(200):
        c = gen_qaoa(2, [(0, 1)], seed)
        gamma = c.gates[3].params[0]
        beta = c.gates[-1].params[0]
        assert 0 < gamma < math.pi and 0 < beta < math.pi


def test_random_examples():
    assert gen_random(5, 7, 99) == gen_random(5, 7, 99)
    assert emit_qasm(gen_random(5, 7, 99)) == emit_qasm(gen_random(5, 7, 99))
    for seed in range(50):
        c = gen_random(4, 5, seed)
        assert 20 <= len(c) <= 30
        assert depth(c) >= 5


def test_random_layer_structure():
    c = gen_random(6, 3, 11)
    per_layer = [g for g in c.gates[:6]]
    assert [g.qubits for g in per_layer] == [(q,) for q in range(6)]
    assert {g.kind for g in per_layer} <= {GateKind.RX, GateKind.RY, GateKind.RZ}
    assert all(0 <= g.params[0] < 2 * math.pi for g in c.gates if g.params)
    two = [g for g in c.gates if g.is_two_qubit]
    assert all(g.qubits[1] == g.qubits[0] + 1 for g in two)


def test_ring_edges():
    assert ring_edges(4) == [(0, 1), (1, 2), (2, 3), (3, 0)]
    assert ring_edges(2) == [(0, 1)]


def test_spec_ranges_enforced():
    with pytest.raises(ValueError):
        CorpusSpec(Family.QFT, 9)
    with pytest.raises(ValueError):
        CorpusSpec(Family.RANDOM, 6, depth_layers=40)
    assert len(CorpusSpec(Family.QFT, 9, allow_out_of_range=True).generate()) == 9 + 5 * 36


def test_default_corpus_census():
    corpus = default_corpus()
    assert len(corpus) == 105
    fams = Counter(c.name.split("_")[0] for c in corpus)
    assert fams == {"ghz": 11, "qft": 7, "qaoa": 15, "random": 72}
    assert len({c.name for c in corpus}) == 105
    assert default_corpus(DEFAULT_SEED) == corpus


@pytest.mark.parametrize("c", default_corpus(), ids=lambda c: c.name)
def test_corpus_ghz_fixpoint_and_roundtrip(c):
    back = parse_qasm(emit_qasm(c))
    assert len(back) == len(c)
    if c.name.startswith("ghz"):
        out, _ = run_pipeline(c, PassConfig.parse("cancel,commute,rotate"))
        assert len(out) == len(c)
