"""Generalized stabilizer traps on graph states.

A trap picks a nonempty vertex subset A and measures the stabilizer
S = prod_{a in A} K_a.  Per vertex the support of S decides its role:

* X support   -> measured at angle 0 (X basis)
* Y support   -> measured at angle pi/2 (Y basis)
* Z support   -> sent as a dummy X^r|0>, which disentangles and leaves Z^r
                 on its neighbours
* no support  -> filler, measured at a random angle and ignored

Dropping the dummies turns S into a stabilizer of the smaller graph state with
the same sign, so the XOR of the X/Y outcomes is fixed by that sign and by the
Z^r kicks the dummies deliver to X/Y-measured neighbours.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Iterable, Mapping, Sequence

import numpy as np

from trapbench.graph import Graph
from trapbench.pauli import PauliString, graph_stabilizer

if TYPE_CHECKING:
    from trapbench.protocol.transcript import RoundTranscript

MEASURE_X = "measure_X"
MEASURE_Y = "measure_Y"
DUMMY = "dummy"
FILLER = "filler"

_ROLE_ANGLE = {MEASURE_X: 0, MEASURE_Y: 2}


@dataclass(frozen=True)
class TrapComputation:
    graph: Graph
    subset: frozenset[int]
    observable: PauliString
    roles: Mapping[int, str]
    phi: Mapping[int, int]
    dummy_bits: Mapping[int, int]
    expected_parity: int = field(default=0)

    @property
    def support(self) -> tuple[int, ...]:
        """Vertices whose outcomes enter the parity."""
        return tuple(v for v in self.graph.vertices if self.roles[v] in _ROLE_ANGLE)

    @property
    def dummies(self) -> tuple[int, ...]:
        return tuple(v for v in self.graph.vertices if self.roles[v] == DUMMY)

    def to_dict(self) -> dict[str, Any]:
        return {
            "subset": sorted(self.subset),
            "observable": str(self.observable),
            "plan": [self.roles[v] for v in self.graph.vertices],
            "phi": {str(v): a for v, a in sorted(self.phi.items())},
            "dummy_bits": {str(v): b for v, b in sorted(self.dummy_bits.items())},
            "expected_parity": self.expected_parity,
        }

    @classmethod
    def from_dict(cls, graph: Graph, data: Mapping[str, Any]) -> TrapComputation:
        return build_trap(
            graph,
            data["subset"],
            {int(v): int(b) for v, b in data["dummy_bits"].items()},
            {int(v): int(a) for v, a in data["phi"].items()},
        )


def build_trap(
    graph: Graph,
    subset: Iterable[int],
    dummy_bits: Mapping[int, int] | None = None,
    filler_angles: Mapping[int, int] | None = None,
) -> TrapComputation:
    """Compile the stabilizer of ``subset`` into a per-vertex plan.

    Missing dummy bits default to 0 and missing filler angles to 0.
    """
    members = frozenset(subset)
    observable = graph_stabilizer(graph, members)
    if not observable.is_hermitian:
        raise AssertionError(f"stabilizer {observable} has an imaginary phase")
    dummy_bits = dict(dummy_bits or {})
    filler_angles = dict(filler_angles or {})
    roles: dict[int, str] = {}
    phi: dict[int, int] = {}
    bits: dict[int, int] = {}
    for v in graph.vertices:
        letter = observable.letter(v)
        if letter == "X":
            roles[v] = MEASURE_X
        elif letter == "Y":
            roles[v] = MEASURE_Y
        elif letter == "Z":
            roles[v] = DUMMY
            bits[v] = int(dummy_bits.get(v, 0))
            continue
        else:
            roles[v] = FILLER
            phi[v] = int(filler_angles.get(v, 0)) % 8
            continue
        phi[v] = _ROLE_ANGLE[roles[v]]
    trap = TrapComputation(graph, members, observable, roles, phi, bits)
    return TrapComputation(graph, members, observable, roles, phi, bits, expected_parity(trap))


def expected_parity(trap: TrapComputation) -> int:
    """XOR of the unblinded X/Y outcomes a noiseless device must produce."""
    if not trap.observable.is_hermitian:
        raise AssertionError(f"stabilizer {trap.observable} has an imaginary phase")
    parity = 0 if trap.observable.sign == 1 else 1
    dummies = set(trap.dummies)
    for v in trap.support:
        for d in trap.graph.neighbors(v) & dummies:
            parity ^= trap.dummy_bits[d]
    return parity


@dataclass(frozen=True)
class TrapDistribution:
    """Sampler over trap subsets.

    By default subsets are uniform over all nonempty vertex sets.  A fixed
    ``subsets`` list is sampled uniformly instead when given; ``odd_only``
    conditions on an odd number of X/Y-measured vertices (i.e. odd |A|).
    """

    subsets: tuple[frozenset[int], ...] | None = None
    odd_only: bool = False

    def __post_init__(self) -> None:
        if self.subsets is not None:
            subs = tuple(frozenset(s) for s in self.subsets)
            if not subs or any(not s for s in subs):
                raise ValueError("fixed subset list must be nonempty and exclude the empty set")
            if self.odd_only and not any(len(s) % 2 for s in subs):
                raise ValueError("no odd subset to sample from")
            object.__setattr__(self, "subsets", subs)

    def sample_subset(self, graph: Graph, rng: np.random.Generator) -> frozenset[int]:
        if self.subsets is not None:
            pool: Sequence[frozenset[int]] = [s for s in self.subsets if len(s) % 2 or not self.odd_only]
            return pool[int(rng.integers(len(pool)))]
        n = graph.n_vertices
        while True:
            bits = rng.integers(0, 2, size=n)
            k = int(bits.sum())
            if k == 0 or (self.odd_only and k % 2 == 0):
                continue
            return frozenset(int(v) for v in np.flatnonzero(bits))

    def to_dict(self) -> dict[str, Any]:
        return {
            "subsets": None if self.subsets is None else [sorted(s) for s in self.subsets],
            "odd_only": self.odd_only,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | None) -> TrapDistribution:
        if not data:
            return cls()
        subsets = data.get("subsets")
        return cls(
            None if subsets is None else tuple(frozenset(s) for s in subsets),
            bool(data.get("odd_only", False)),
        )


def sample_trap(graph: Graph, dist: TrapDistribution, rng: np.random.Generator) -> TrapComputation:
    subset = dist.sample_subset(graph, rng)
    draws = rng.integers(0, 8, size=graph.n_vertices)
    observable = graph_stabilizer(graph, subset)
    dummy_bits = {}
    filler_angles = {}
    for v in graph.vertices:
        letter = observable.letter(v)
        if letter == "Z":
            dummy_bits[v] = int(draws[v]) & 1
        elif letter == "I":
            filler_angles[v] = int(draws[v])
    return build_trap(graph, subset, dummy_bits, filler_angles)


def observed_parity(trap: TrapComputation, transcript: RoundTranscript) -> int | None:
    """Parity of the unblinded support outcomes, or None if any is missing."""
    unblinded = transcript.unblinded()
    parity = 0
    for v in trap.support:
        if v not in unblinded:
            return None
        parity ^= unblinded[v]
    return parity


def check_trap(trap: TrapComputation, transcript: RoundTranscript) -> str:
    """'pass' or 'fail'; a transcript missing outcomes counts as a failed trap."""
    if transcript.aborted:
        return "fail"
    parity = observed_parity(trap, transcript)
    if parity is None or parity != expected_parity(trap):
        return "fail"
    return "pass"
