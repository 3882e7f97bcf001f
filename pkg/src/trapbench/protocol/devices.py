"""Black-box quantum devices the client delegates rounds to.

Every device runs the same interactive algorithm in every round: receive
single-qubit preparations, entangle along the graph, answer measurement
requests one at a time.  Nothing carries over between rounds except the
device's own random stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Protocol, runtime_checkable

import numpy as np

from trapbench.graph import Flow, Graph
from trapbench.pauli import PauliString
from trapbench.statevector import (
    MAX_QUBITS,
    NoiseModel,
    NoiseSite,
    Statevector,
    apply_noise,
    noisy_outcome,
    prepare_dummy,
    prepare_plus_theta,
)


class ProtocolViolation(RuntimeError):
    """A round broke the client/device contract and was aborted."""


@dataclass(frozen=True)
class Preparation:
    """Classical stand-in for the single qubit the client sends."""

    kind: str
    value: int

    def __post_init__(self) -> None:
        if self.kind == "plus_theta":
            if not 0 <= self.value < 8:
                raise ValueError(f"theta index {self.value} outside 0..7")
        elif self.kind == "dummy":
            if self.value not in (0, 1):
                raise ValueError(f"dummy bit {self.value} is not 0 or 1")
        else:
            raise ValueError(f"unknown preparation kind {self.kind!r}")

    def vector(self) -> np.ndarray:
        if self.kind == "plus_theta":
            return prepare_plus_theta(self.value)
        return prepare_dummy(self.value)


@runtime_checkable
class Device(Protocol):
    def begin_round(self, graph: Graph, flow: Flow | None = None) -> None: ...

    def accept_qubit(self, vertex: int, prep: Preparation) -> None: ...

    def entangle_all(self) -> None: ...

    def measure(self, vertex: int, delta_index: int) -> int: ...

    def end_round(self) -> None: ...


_IDLE, _PREPARING, _ENTANGLED = "idle", "preparing", "entangled"


class SimulatedDevice:
    """Round bookkeeping shared by the simulated devices.

    Subclasses fill in the quantum behaviour through the ``_on_*`` hooks.
    Misuse by the client (measuring before entangling, measuring a vertex
    twice, ...) raises :class:`ProtocolViolation`.
    """

    simulates = True

    def __init__(self, seed: int | None = None, max_qubits: int = MAX_QUBITS):
        self.seed = seed
        self.max_qubits = max_qubits
        self.rng = np.random.default_rng(seed)
        self._phase = _IDLE
        self.graph: Graph | None = None
        self.state: Statevector | None = None
        self._prepared: set[int] = set()
        self._measured: set[int] = set()

    def fresh(self, seed: int | None) -> SimulatedDevice:
        """An identically configured device with its own random stream."""
        raise NotImplementedError

    def describe(self) -> dict[str, Any]:
        raise NotImplementedError

    def begin_round(self, graph: Graph, flow: Flow | None = None) -> None:
        if self._phase != _IDLE:
            raise ProtocolViolation("begin_round while a round is open")
        if graph.n_vertices > self.max_qubits:
            raise ProtocolViolation(f"graph of {graph.n_vertices} qubits exceeds device limit {self.max_qubits}")
        self.graph = graph
        self.state = Statevector(self.max_qubits) if self.simulates else None
        self._prepared = set()
        self._measured = set()
        self._phase = _PREPARING

    def accept_qubit(self, vertex: int, prep: Preparation) -> None:
        if self._phase != _PREPARING or self.graph is None:
            raise ProtocolViolation("qubit sent outside the preparation phase")
        if not 0 <= vertex < self.graph.n_vertices or vertex in self._prepared:
            raise ProtocolViolation(f"unexpected qubit for vertex {vertex}")
        self._prepared.add(vertex)
        if self.state is not None:
            self.state.add_qubit(vertex, prep.vector())
        self._on_prepare(vertex, prep)

    def entangle_all(self) -> None:
        if self._phase != _PREPARING or self.graph is None:
            raise ProtocolViolation("entangle requested outside the preparation phase")
        if len(self._prepared) != self.graph.n_vertices:
            raise ProtocolViolation("entangle requested before every qubit arrived")
        if self.state is not None:
            for a, b in self.graph.sorted_edges():
                self.state.apply_cz(a, b)
                self._on_cz(a, b)
        self._phase = _ENTANGLED
        self._on_entangled()

    def measure(self, vertex: int, delta_index: int) -> int:
        if self._phase != _ENTANGLED:
            raise ProtocolViolation("measurement requested before entangling")
        if vertex not in self._prepared or vertex in self._measured:
            raise ProtocolViolation(f"vertex {vertex} is not measurable")
        if not 0 <= delta_index < 8:
            raise ProtocolViolation(f"angle index {delta_index} outside 0..7")
        self._measured.add(vertex)
        return self._on_measure(vertex, delta_index)

    def end_round(self) -> None:
        self._phase = _IDLE
        self.state = None
        self.graph = None

    def _on_prepare(self, vertex: int, prep: Preparation) -> None:
        pass

    def _on_cz(self, a: int, b: int) -> None:
        pass

    def _on_entangled(self) -> None:
        pass

    def _on_measure(self, vertex: int, delta_index: int) -> int:
        assert self.state is not None
        return self.state.measure_xy(vertex, delta_index, self.rng)


class HonestDevice(SimulatedDevice):
    """Follows the protocol faithfully, up to the configured noise."""

    def __init__(self, noise: NoiseModel | None = None, seed: int | None = None, max_qubits: int = MAX_QUBITS):
        super().__init__(seed, max_qubits)
        self.noise = noise or NoiseModel()

    def fresh(self, seed: int | None) -> HonestDevice:
        return HonestDevice(self.noise, seed, self.max_qubits)

    def describe(self) -> dict[str, Any]:
        return {"kind": "honest", "noise": self.noise.to_dict()}

    def _on_prepare(self, vertex: int, prep: Preparation) -> None:
        if self.noise.prep_depolarizing:
            apply_noise(self.state, self.noise, NoiseSite("prep", (vertex,)), self.rng)

    def _on_cz(self, a: int, b: int) -> None:
        if self.noise.cz_depolarizing:
            apply_noise(self.state, self.noise, NoiseSite("cz", (a, b)), self.rng)

    def _on_measure(self, vertex: int, delta_index: int) -> int:
        assert self.state is not None
        if self.noise.idle_dephasing:
            apply_noise(self.state, self.noise, NoiseSite("idle", tuple(self.state.labels)), self.rng)
        bit = self.state.measure_xy(vertex, delta_index, self.rng)
        return noisy_outcome(bit, self.noise, self.rng)


STRATEGIES = ("flip_all_outcomes", "constant_zero", "random_outcomes", "targeted_pauli")


class AdversarialDevice(HonestDevice):
    """A device following one fixed deviation in every round.

    ``flip_all_outcomes`` runs honestly and reports every bit flipped;
    ``constant_zero`` and ``random_outcomes`` never touch the qubits;
    ``targeted_pauli`` applies ``error`` (a Pauli on the graph's vertices)
    right after entangling, with probability ``probability`` per round.
    Letters of ``error`` beyond the round's vertex count are dropped.
    """

    def __init__(
        self,
        strategy: str,
        seed: int | None = None,
        error: PauliString | None = None,
        probability: float = 1.0,
        noise: NoiseModel | None = None,
        max_qubits: int = MAX_QUBITS,
    ):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}")
        if strategy == "targeted_pauli" and error is None:
            raise ValueError("targeted_pauli needs an error string")
        if not 0.0 <= probability <= 1.0:
            raise ValueError(f"probability {probability} outside [0, 1]")
        super().__init__(noise, seed, max_qubits)
        self.strategy = strategy
        self.error = error
        self.probability = probability
        self.simulates = strategy in ("flip_all_outcomes", "targeted_pauli")

    def fresh(self, seed: int | None) -> AdversarialDevice:
        return AdversarialDevice(self.strategy, seed, self.error, self.probability, self.noise, self.max_qubits)

    def describe(self) -> dict[str, Any]:
        return {
            "kind": "adversary",
            "strategy": self.strategy,
            "error": None if self.error is None else str(self.error),
            "probability": self.probability,
            "noise": self.noise.to_dict(),
        }

    def _on_entangled(self) -> None:
        if self.strategy != "targeted_pauli":
            return
        assert self.state is not None and self.error is not None and self.graph is not None
        if self.probability >= 1.0 or self.rng.random() < self.probability:
            for v in range(min(self.error.n, self.graph.n_vertices)):
                self.state.apply_pauli(v, self.error.letter(v))

    def _on_measure(self, vertex: int, delta_index: int) -> int:
        if self.strategy == "constant_zero":
            return 0
        if self.strategy == "random_outcomes":
            return int(self.rng.integers(2))
        bit = super()._on_measure(vertex, delta_index)
        if self.strategy == "flip_all_outcomes":
            return bit ^ 1
        return bit
