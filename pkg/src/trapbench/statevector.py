"""Dense pure-state simulator with the primitives the delegation protocols need.

The state is kept as a tensor with one length-2 axis per live qubit.  Qubits
are addressed by arbitrary integer labels (graph vertices) and disappear from
the tensor once measured, so memory shrinks as a round progresses.

Noise is unravelled into trajectories: with the configured probability a
uniformly random non-identity Pauli is inserted at the noisy site.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

MAX_QUBITS = 22
NORM_TOL = 1e-10

_SQRT_HALF = 1.0 / math.sqrt(2.0)
# e^{i k pi/4} for k in Z_8, exact at the axis-aligned angles.
PHASES = np.array(
    [1, (1 + 1j) * _SQRT_HALF, 1j, (-1 + 1j) * _SQRT_HALF, -1, (-1 - 1j) * _SQRT_HALF, -1j, (1 - 1j) * _SQRT_HALF],
    dtype=complex,
)


class QubitLimitError(ValueError):
    pass


def prepare_plus_theta(theta_index: int) -> np.ndarray:
    """(|0> + e^{i theta}|1>)/sqrt(2) with theta = theta_index * pi/4."""
    return np.array([_SQRT_HALF, _SQRT_HALF * PHASES[theta_index % 8]], dtype=complex)


def prepare_dummy(r: int) -> np.ndarray:
    """X^r |0>."""
    if r not in (0, 1):
        raise ValueError(f"dummy bit must be 0 or 1, got {r}")
    return np.array([1.0 - r, float(r)], dtype=complex)


@dataclass(frozen=True)
class NoiseModel:
    prep_depolarizing: float = 0.0
    cz_depolarizing: float = 0.0
    measure_flip: float = 0.0
    idle_dephasing: float = 0.0

    def __post_init__(self) -> None:
        for name, p in asdict(self).items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name}={p} is not a probability")

    @property
    def is_noiseless(self) -> bool:
        return not any(asdict(self).values())

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class NoiseSite:
    """Where noise strikes: ``kind`` is 'prep', 'cz' or 'idle'."""

    kind: str
    qubits: tuple[int, ...]


class Statevector:
    def __init__(self, max_qubits: int = MAX_QUBITS):
        self.max_qubits = max_qubits
        self.labels: list[int] = []
        self.tensor = np.ones((), dtype=complex)

    @classmethod
    def from_qubits(cls, states: Mapping[int, np.ndarray], max_qubits: int = MAX_QUBITS) -> Statevector:
        sv = cls(max_qubits)
        for label, vec in states.items():
            sv.add_qubit(label, vec)
        return sv

    @property
    def n(self) -> int:
        return len(self.labels)

    def _axis(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise IndexError(f"qubit {label} is not live in this state") from None

    def add_qubit(self, label: int, vec: np.ndarray) -> None:
        if label in self.labels:
            raise ValueError(f"qubit {label} already present")
        if self.n + 1 > self.max_qubits:
            raise QubitLimitError(f"state would exceed the {self.max_qubits}-qubit limit")
        self.tensor = np.multiply.outer(self.tensor, np.asarray(vec, dtype=complex))
        self.labels.append(label)

    def vector(self, order: Sequence[int] | None = None) -> np.ndarray:
        """Amplitudes as a flat array; the first label in ``order`` is the most significant bit."""
        order = list(self.labels if order is None else order)
        axes = [self._axis(q) for q in order]
        if sorted(axes) != list(range(self.n)):
            raise ValueError("order must list every live qubit once")
        return np.transpose(self.tensor, axes).reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.tensor))

    def _slice(self, axis: int, bit: int) -> tuple:
        idx: list = [slice(None)] * self.n
        idx[axis] = bit
        return tuple(idx)

    def apply_cz(self, a: int, b: int) -> None:
        if a == b:
            raise ValueError("CZ needs two distinct qubits")
        ia, ib = self._axis(a), self._axis(b)
        idx: list = [slice(None)] * self.n
        idx[ia] = 1
        idx[ib] = 1
        self.tensor[tuple(idx)] *= -1

    def apply_pauli(self, label: int, letter: str) -> None:
        if letter == "I":
            return
        ax = self._axis(label)
        s0, s1 = self._slice(ax, 0), self._slice(ax, 1)
        if letter == "Z":
            self.tensor[s1] *= -1
        elif letter == "X":
            self.tensor = np.flip(self.tensor, axis=ax).copy()
        elif letter == "Y":
            a0 = self.tensor[s0].copy()
            self.tensor[s0] = -1j * self.tensor[s1]
            self.tensor[s1] = 1j * a0
        else:
            raise ValueError(f"unknown Pauli letter {letter!r}")

    def apply_phase(self, label: int, angle_index: int) -> None:
        """diag(1, e^{i k pi/4}) on one qubit."""
        self.tensor[self._slice(self._axis(label), 1)] *= PHASES[angle_index % 8]

    def measure_xy(self, label: int, delta_index: int, rng: np.random.Generator, keep: bool = False) -> int:
        """Measure in the |+-_delta> basis; outcome 0 is |+_delta>.

        The measured qubit is removed unless ``keep`` is set, in which case it
        is left in the observed basis state.
        """
        ax = self._axis(label)
        t0 = np.take(self.tensor, 0, axis=ax)
        t1 = np.take(self.tensor, 1, axis=ax)
        w = np.conj(PHASES[delta_index % 8]) * t1
        branch0 = (t0 + w) * _SQRT_HALF
        p0 = float(np.vdot(branch0, branch0).real)
        bit = 0 if rng.random() < p0 else 1
        if bit == 0:
            rest, prob = branch0, p0
        else:
            rest = (t0 - w) * _SQRT_HALF
            prob = max(1.0 - p0, float(np.vdot(rest, rest).real))
        rest = rest / math.sqrt(prob)
        post = prepare_plus_theta(delta_index + 4 * bit) if keep else None
        self._replace(label, ax, rest, post)
        return bit

    def measure_z(self, label: int, rng: np.random.Generator, keep: bool = False) -> int:
        ax = self._axis(label)
        t0 = np.take(self.tensor, 0, axis=ax)
        p0 = float(np.vdot(t0, t0).real)
        bit = 0 if rng.random() < p0 else 1
        rest = np.take(self.tensor, bit, axis=ax)
        prob = p0 if bit == 0 else float(np.vdot(rest, rest).real)
        rest = rest / math.sqrt(prob)
        self._replace(label, ax, rest, prepare_dummy(bit) if keep else None)
        return bit

    def _replace(self, label: int, ax: int, rest: np.ndarray, post: np.ndarray | None) -> None:
        del self.labels[ax]
        self.tensor = rest
        if post is not None:
            self.tensor = np.multiply.outer(self.tensor, post)
            self.labels.append(label)


_ONE_QUBIT = ("X", "Y", "Z")
_TWO_QUBIT = tuple((a, b) for a in "IXYZ" for b in "IXYZ" if (a, b) != ("I", "I"))


def apply_noise(state: Statevector, model: NoiseModel, site: NoiseSite, rng: np.random.Generator) -> Statevector:
    """Insert the stochastic Pauli error ``model`` prescribes at ``site``."""
    if site.kind == "prep":
        for q in site.qubits:
            if model.prep_depolarizing and rng.random() < model.prep_depolarizing:
                state.apply_pauli(q, _ONE_QUBIT[rng.integers(3)])
    elif site.kind == "cz":
        a, b = site.qubits
        if model.cz_depolarizing and rng.random() < model.cz_depolarizing:
            pa, pb = _TWO_QUBIT[rng.integers(15)]
            state.apply_pauli(a, pa)
            state.apply_pauli(b, pb)
    elif site.kind == "idle":
        if model.idle_dephasing:
            for q in site.qubits:
                if rng.random() < model.idle_dephasing:
                    state.apply_pauli(q, "Z")
    else:
        raise ValueError(f"unknown noise site {site.kind!r}")
    return state


def noisy_outcome(bit: int, model: NoiseModel, rng: np.random.Generator) -> int:
    """Classical readout error: flip ``bit`` with probability ``measure_flip``."""
    if model.measure_flip and rng.random() < model.measure_flip:
        return bit ^ 1
    return bit
