"""Client drivers for plain and blind delegated MBQC."""

from __future__ import annotations

import itertools
from typing import Callable, TypeVar

import numpy as np

from trapbench.graph import Flow, MeasurementPattern, correction_sets, standard_grid_flow
from trapbench.protocol.devices import Device, Preparation, ProtocolViolation
from trapbench.protocol.transcript import COMPUTATION, TRAP, RoundTranscript, VertexRecord
from trapbench.statevector import MAX_QUBITS, QubitLimitError, Statevector, prepare_plus_theta
from trapbench.traps import DUMMY, TrapComputation, check_trap

T = TypeVar("T")


def mbqc_phi_prime(phi: int, sx: int, sz: int) -> int:
    """Adapted angle index (-1)^sX * phi + sZ * pi, mod 8."""
    return ((-phi if sx else phi) + 4 * sz) % 8


def ubqc_delta(phi: int, sx: int, sz: int, theta: int, r: int) -> int:
    """Blinded angle index: the adapted angle plus theta plus the r * pi pad, mod 8."""
    return (mbqc_phi_prime(phi, sx, sz) + theta + 4 * r) % 8


def _call(fn: Callable[..., T], *args) -> T:
    try:
        return fn(*args)
    except ProtocolViolation:
        raise
    except Exception as exc:
        raise ProtocolViolation(f"device failed in {getattr(fn, '__name__', fn)}: {exc}") from exc


def _read_bit(device: Device, vertex: int, delta: int) -> int:
    bit = _call(device.measure, vertex, delta)
    if isinstance(bit, (bool, np.bool_)):
        bit = int(bit)
    if not isinstance(bit, (int, np.integer)) or bit not in (0, 1):
        raise ProtocolViolation(f"device answered {bit!r} for vertex {vertex}")
    return int(bit)


def _abort(device: Device) -> None:
    try:
        device.end_round()
    except Exception:
        pass


def _check_size(n: int) -> None:
    if n > MAX_QUBITS:
        raise QubitLimitError(f"{n} qubits exceed the {MAX_QUBITS}-qubit simulation limit")


def run_mbqc(pattern: MeasurementPattern, device: Device, rng: np.random.Generator | None = None) -> tuple[int, ...]:
    """Delegate ``pattern`` in the clear and return the output-layer bits.

    A contract breach by the device aborts the round with ProtocolViolation.
    ``rng`` is unused; the plain protocol has no client randomness.
    """
    graph, flow = pattern.graph, pattern.flow
    _check_size(graph.n_vertices)
    corr = correction_sets(graph, flow)
    outcomes: dict[int, int] = {}
    try:
        _call(device.begin_round, graph, flow)
        for v in graph.vertices:
            _call(device.accept_qubit, v, Preparation("plus_theta", 0))
        _call(device.entangle_all)
        for i in flow.order:
            sx = _parity(outcomes, corr.sx[i])
            sz = _parity(outcomes, corr.sz[i])
            outcomes[i] = _read_bit(device, i, mbqc_phi_prime(pattern.phi[i], sx, sz))
        _call(device.end_round)
    except ProtocolViolation:
        _abort(device)
        raise
    return tuple(outcomes[o] for o in pattern.outputs)


def _parity(outcomes: dict[int, int], members) -> int:
    p = 0
    for j in members:
        p ^= outcomes[j]
    return p


def run_ubqc(
    job: MeasurementPattern | TrapComputation,
    device: Device,
    rng: np.random.Generator,
    flow: Flow | None = None,
    round_id: int = 0,
) -> tuple[tuple[int, ...] | str | None, RoundTranscript]:
    """Delegate ``job`` blindly.

    Computation jobs return their unblinded output bits, trap jobs return
    'pass' or 'fail'.  Each non-dummy qubit gets a fresh uniform theta and an
    outcome pad bit; dummies get uniformly random measurement angles.  If the
    device breaks the contract the transcript is marked aborted and the result
    is None (a trap round then counts as failed).
    """
    if isinstance(job, MeasurementPattern):
        graph, flow, phi, kind = job.graph, job.flow, job.phi, COMPUTATION
        corr = correction_sets(graph, flow)
        dummy_bits: dict[int, int] = {}
    elif isinstance(job, TrapComputation):
        graph, phi, kind, corr = job.graph, job.phi, TRAP, None
        dummy_bits = dict(job.dummy_bits)
        if flow is None:
            flow = standard_grid_flow(graph) if graph.shape else Flow({}, tuple(graph.vertices))
    else:
        raise TypeError(f"cannot delegate {type(job).__name__}")
    _check_size(graph.n_vertices)

    n = graph.n_vertices
    thetas = rng.integers(0, 8, size=n)
    pads = rng.integers(0, 2, size=n)
    tr = RoundTranscript(round_id=round_id, kind=kind, dummy_bits=dummy_bits)
    if kind == TRAP:
        tr.trap = job.to_dict()
    records: dict[int, VertexRecord] = {}
    for v in graph.vertices:
        tr.theta[v] = int(thetas[v])
        if v in dummy_bits:
            records[v] = VertexRecord(v, "dummy", dummy_bits[v])
        else:
            tr.pads[v] = int(pads[v])
            records[v] = VertexRecord(v, "plus_theta", tr.theta[v])

    unblinded: dict[int, int] = {}
    try:
        _call(device.begin_round, graph, flow)
        for v in graph.vertices:
            rec = records[v]
            _call(device.accept_qubit, v, Preparation(rec.prep_kind, rec.prep_value))
        _call(device.entangle_all)
        for i in flow.order:
            rec = records[i]
            if rec.prep_kind == DUMMY:
                rec.delta = tr.theta[i]
            else:
                sx = _parity(unblinded, corr.sx[i]) if corr else 0
                sz = _parity(unblinded, corr.sz[i]) if corr else 0
                rec.delta = ubqc_delta(phi[i], sx, sz, tr.theta[i], tr.pads[i])
            tr.records.append(rec)
            rec.outcome = _read_bit(device, i, rec.delta)
            if rec.prep_kind != DUMMY:
                unblinded[i] = rec.outcome ^ tr.pads[i]
        _call(device.end_round)
    except ProtocolViolation as exc:
        _abort(device)
        tr.aborted = True
        tr.error = str(exc)

    if kind == COMPUTATION:
        if not tr.aborted:
            tr.result = tuple(unblinded[o] for o in job.outputs)
        return tr.result, tr
    tr.verdict = check_trap(job, tr)
    return tr.verdict, tr


def pattern_distribution(pattern: MeasurementPattern) -> dict[tuple[int, ...], float]:
    """Exact output distribution of ``pattern``, evaluated without adaptivity.

    Flow determinism makes every branch of non-output outcomes equivalent,
    so the all-zero branch is post-selected and the output layer is read off
    at the uncorrected angles.
    """
    graph = pattern.graph
    _check_size(graph.n_vertices)
    sv = Statevector.from_qubits({v: prepare_plus_theta(0) for v in graph.vertices})
    for a, b in graph.sorted_edges():
        sv.apply_cz(a, b)
    for v in pattern.flow.order:
        if v not in graph.outputs:
            _project_xy(sv, v, pattern.phi[v], 0)
            if sv.norm() < 1e-12:
                raise ValueError("zero-probability branch; flow is not deterministic here")
            sv.tensor = sv.tensor / sv.norm()
    outputs = pattern.outputs
    base = sv.tensor.copy(), list(sv.labels)
    dist = {}
    for bits in itertools.product((0, 1), repeat=len(outputs)):
        sv.tensor, sv.labels = base[0].copy(), list(base[1])
        for o, b in zip(outputs, bits):
            _project_xy(sv, o, pattern.phi[o], b)
        dist[bits] = float(np.vdot(sv.tensor, sv.tensor).real)
    return dist


def _project_xy(sv: Statevector, label: int, delta: int, bit: int) -> None:
    """Unnormalised projection of one qubit onto |+_delta> (bit 0) or |-_delta>."""
    ax = sv.labels.index(label)
    basis = prepare_plus_theta(delta + 4 * bit)
    sv.tensor = np.tensordot(sv.tensor, np.conj(basis), axes=([ax], [0]))
    del sv.labels[ax]


def deterministic_output(pattern: MeasurementPattern, tol: float = 1e-9) -> tuple[int, ...] | None:
    """The output string if the pattern produces it with certainty, else None."""
    dist = pattern_distribution(pattern)
    best = max(dist, key=dist.get)
    return best if dist[best] > 1.0 - tol else None
