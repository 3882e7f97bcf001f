import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import adaptive_distribution
from trapbench.graph import grid_graph, grid_pattern, random_grid_pattern, standard_grid_flow
from trapbench.pauli import PauliString
from trapbench.protocol import (
    AdversarialDevice,
    Device,
    HonestDevice,
    Preparation,
    ProtocolViolation,
    RoundTranscript,
    deterministic_output,
    mbqc_phi_prime,
    pattern_distribution,
    read_transcripts,
    run_mbqc,
    run_ubqc,
    ubqc_delta,
    write_transcripts,
)
from trapbench.statevector import NoiseModel, QubitLimitError
from trapbench.traps import build_trap, check_trap


def tv(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def empirical(samples):
    c = Counter(samples)
    return {k: v / len(samples) for k, v in c.items()}


def test_phi_prime_examples():
    assert mbqc_phi_prime(0, 0, 0) == 0
    assert mbqc_phi_prime(2, 1, 0) == 6
    assert mbqc_phi_prime(0, 0, 1) == 4


def test_delta_examples():
    assert ubqc_delta(0, 0, 0, 0, 0) == 0
    assert ubqc_delta(1, 1, 0, 1, 0) == 0
    assert ubqc_delta(1, 0, 1, 2, 1) == 3


@given(st.integers(0, 7), st.integers(0, 1), st.integers(0, 1), st.integers(0, 7), st.integers(0, 1))
def test_delta_is_phi_prime_plus_pads(phi, sx, sz, theta, r):
    assert ubqc_delta(phi, sx, sz, theta, r) == (mbqc_phi_prime(phi, sx, sz) + theta + 4 * r) % 8


GRIDS = [(1, 1), (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2)]


@settings(max_examples=60)
@given(st.sampled_from(GRIDS), st.integers(0, 2**32 - 1))
def test_branch_free_distribution_matches_adaptive_oracle(dims, seed):
    p = random_grid_pattern(*dims, np.random.default_rng(seed))
    got = pattern_distribution(p)
    want = adaptive_distribution(*dims, p.phi)
    assert tv(got, want) < 1e-9


def test_single_vertex_zero_angle_is_zero():
    dev = HonestDevice(seed=0)
    assert all(run_mbqc(grid_pattern(1, 1), dev) == (0,) for _ in range(100))
    assert deterministic_output(grid_pattern(1, 1)) == (0,)


def test_one_by_two_matches_oracle():
    p = grid_pattern(1, 2, [0, 0])
    want = adaptive_distribution(1, 2, p.phi)
    dev = HonestDevice(seed=1)
    shots = [run_mbqc(p, dev) for _ in range(2000)]
    if max(want.values()) > 1 - 1e-12:
        assert set(shots) == {max(want, key=want.get)}
    assert tv(empirical(shots), want) < 0.05


def test_two_by_two_random_angles_mbqc_and_ubqc():
    p = grid_pattern(2, 2, [1, 3, 6, 2])
    want = adaptive_distribution(2, 2, p.phi)
    dev = HonestDevice(seed=2)
    rng = np.random.default_rng(3)
    mbqc = [run_mbqc(p, dev) for _ in range(10_000)]
    ubqc = [run_ubqc(p, dev, rng)[0] for _ in range(10_000)]
    for shots in (mbqc, ubqc):
        emp = empirical(shots)
        assert tv(emp, want) < 0.05
        for k, pk in want.items():
            assert abs(emp.get(k, 0) - pk) <= 4 * math.sqrt(pk * (1 - pk) / 10_000) + 1e-12


def test_delta_stream_is_uniform_per_vertex():
    p = grid_pattern(1, 3, [0, 2, 5])
    dev = HonestDevice(seed=4)
    rng = np.random.default_rng(5)
    rounds = 4000
    counts = np.zeros((3, 8))
    for _ in range(rounds):
        _, tr = run_ubqc(p, dev, rng)
        for rec in tr.records:
            counts[rec.vertex, rec.delta] += 1
    sigma = math.sqrt(rounds * (1 / 8) * (7 / 8))
    assert np.all(np.abs(counts - rounds / 8) < 4 * sigma)


def test_transcript_records_are_consistent():
    p = grid_pattern(2, 3, [1, 2, 3, 4, 5, 6])
    _, tr = run_ubqc(p, HonestDevice(seed=0), np.random.default_rng(0))
    assert [r.vertex for r in tr.records] == list(standard_grid_flow(p.graph).order)
    assert all(0 <= r.delta < 8 and r.outcome in (0, 1) for r in tr.records)
    assert tr.result == tuple(tr.unblinded()[o] for o in p.outputs)
    assert RoundTranscript.from_dict(tr.to_dict()) == tr


def test_seeded_replay_is_bit_identical():
    p = grid_pattern(2, 2, [1, 3, 6, 2])

    def run():
        dev = HonestDevice(NoiseModel(prep_depolarizing=0.1, measure_flip=0.05), seed=42)
        rng = np.random.default_rng(7)
        return [run_ubqc(p, dev, rng)[1].to_dict() for _ in range(50)]

    assert run() == run()


def test_dummy_outcomes_never_reach_results():
    g = grid_graph(1, 3)
    trap = build_trap(g, {0}, dummy_bits={1: 1})
    dev = HonestDevice(seed=3)
    rng = np.random.default_rng(3)
    for _ in range(50):
        verdict, tr = run_ubqc(trap, dev, rng)
        assert verdict == "pass"
        before = tr.unblinded()
        for rec in tr.records:
            if rec.prep_kind == "dummy":
                rec.outcome ^= 1
        assert tr.unblinded() == before
        assert check_trap(trap, tr) == "pass"
        assert 1 not in before


def test_device_state_machine_rejects_misuse():
    g = grid_graph(1, 2)
    dev = HonestDevice(seed=0)
    with pytest.raises(ProtocolViolation):
        dev.measure(0, 0)
    dev.begin_round(g)
    with pytest.raises(ProtocolViolation):
        dev.begin_round(g)
    dev.accept_qubit(0, Preparation("plus_theta", 0))
    with pytest.raises(ProtocolViolation):
        dev.accept_qubit(0, Preparation("plus_theta", 0))
    with pytest.raises(ProtocolViolation):
        dev.entangle_all()
    with pytest.raises(ProtocolViolation):
        dev.measure(0, 0)
    dev.accept_qubit(1, Preparation("dummy", 1))
    dev.entangle_all()
    with pytest.raises(ProtocolViolation):
        dev.accept_qubit(1, Preparation("dummy", 0))
    dev.measure(0, 0)
    with pytest.raises(ProtocolViolation):
        dev.measure(0, 0)
    with pytest.raises(ProtocolViolation):
        dev.measure(1, 9)
    dev.end_round()
    dev.begin_round(g)


def test_preparation_validation():
    with pytest.raises(ValueError):
        Preparation("plus_theta", 8)
    with pytest.raises(ValueError):
        Preparation("dummy", 2)
    with pytest.raises(ValueError):
        Preparation("zero", 0)


def test_devices_satisfy_interface():
    assert isinstance(HonestDevice(), Device)
    assert isinstance(AdversarialDevice("constant_zero"), Device)


def test_device_limit():
    with pytest.raises(ProtocolViolation):
        HonestDevice(max_qubits=3).begin_round(grid_graph(2, 2))


def test_client_refuses_oversized_graphs():
    with pytest.raises(QubitLimitError):
        run_ubqc(grid_pattern(5, 5), HonestDevice(), np.random.default_rng(0))


class Misbehaving(HonestDevice):
    def __init__(self, reply):
        super().__init__(seed=0)
        self.reply = reply

    def measure(self, vertex, delta_index):
        super().measure(vertex, delta_index)
        if isinstance(self.reply, Exception):
            raise self.reply
        return self.reply


@pytest.mark.parametrize("reply", [2, "0", None, RuntimeError("boom"), ProtocolViolation("no")])
def test_bad_device_aborts_round(reply):
    p = grid_pattern(1, 2)
    dev = Misbehaving(reply)
    with pytest.raises(ProtocolViolation):
        run_mbqc(p, dev)
    result, tr = run_ubqc(p, dev, np.random.default_rng(0))
    assert result is None and tr.aborted and tr.error
    verdict, tr = run_ubqc(build_trap(p.graph, {0}, {1: 0}), dev, np.random.default_rng(0))
    assert verdict == "fail" and tr.aborted
    # the device is usable again afterwards
    dev.reply = 0
    assert run_mbqc(p, dev) == (0,)


def test_flip_all_corrupts_a_sensitive_pattern():
    p = grid_pattern(2, 2, [0, 2, 2, 0])
    assert deterministic_output(p) == (1, 0)
    dev = AdversarialDevice("flip_all_outcomes", seed=0)
    rng = np.random.default_rng(0)
    assert all(run_ubqc(p, dev, rng)[0] == (0, 0) for _ in range(20))


def test_flip_all_can_be_absorbed_by_corrections():
    # flipped inner outcomes toggle the output's Z correction, cancelling its own flip
    p = grid_pattern(2, 2)
    dev = AdversarialDevice("flip_all_outcomes", seed=0)
    assert all(run_mbqc(p, dev) == deterministic_output(p) for _ in range(20))


def test_constant_zero_reports_zero():
    dev = AdversarialDevice("constant_zero", seed=0)
    assert run_mbqc(grid_pattern(2, 3, [1] * 6), dev) == (0, 0)


def test_targeted_pauli_with_zero_probability_is_honest():
    p = grid_pattern(1, 3)
    dev = AdversarialDevice("targeted_pauli", seed=0, error=PauliString.parse("ZZZ"), probability=0.0)
    want = deterministic_output(p)
    assert all(run_mbqc(p, dev) == want for _ in range(20))


def test_targeted_z_on_output_flips_it():
    p = grid_pattern(1, 1)
    dev = AdversarialDevice("targeted_pauli", seed=0, error=PauliString.parse("Z"))
    assert all(run_mbqc(p, dev) == (1,) for _ in range(20))


def test_adversary_validation_and_fresh():
    with pytest.raises(ValueError):
        AdversarialDevice("bribe")
    with pytest.raises(ValueError):
        AdversarialDevice("targeted_pauli")
    with pytest.raises(ValueError):
        AdversarialDevice("targeted_pauli", error=PauliString.parse("X"), probability=2)
    dev = AdversarialDevice("targeted_pauli", seed=1, error=PauliString.parse("XY"), probability=0.5)
    twin = dev.fresh(9)
    assert twin.describe() == dev.describe() and twin.seed == 9
    assert dev.describe()["error"] == "+XY"


def test_transcript_file_round_trip(tmp_path):
    p = grid_pattern(2, 2, [1, 2, 3, 4])
    dev, rng = HonestDevice(seed=0), np.random.default_rng(0)
    rounds = [run_ubqc(p, dev, rng, round_id=i)[1] for i in range(5)]
    rounds.append(run_ubqc(build_trap(p.graph, {0, 3}), dev, rng, round_id=5)[1])
    path = tmp_path / "t.jsonl"
    write_transcripts(path, rounds)
    assert read_transcripts(path) == rounds


def test_transcript_corruption_detected(tmp_path):
    p = grid_pattern(1, 2)
    rounds = [run_ubqc(p, HonestDevice(seed=0), np.random.default_rng(0))[1] for _ in range(3)]
    path = tmp_path / "t.jsonl"
    write_transcripts(path, rounds)
    text = path.read_text()
    path.write_text(text[:-10])
    with pytest.raises(ValueError, match="truncated"):
        read_transcripts(path)
    path.write_text(text.replace('"delta":', '"delta":1', 1))
    with pytest.raises(ValueError):
        read_transcripts(path)
    path.write_text("{}\n")
    with pytest.raises(ValueError):
        read_transcripts(path)
