"""Exact n-qubit Pauli algebra on binary symplectic vectors.

A Pauli string is stored as two bitmasks (bit ``v`` of ``x``/``z`` is the X/Z
component on qubit ``v``) plus a phase exponent ``k`` so that the operator is
``i**k`` times the tensor product of the Hermitian letters I, X, Y, Z
(``(x, z) = (1, 1)`` decodes to Y).  No floating point is involved anywhere,
so trap parities derived from these strings are bit-exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from trapbench.graph import Graph

MAX_ENUMERATION_VERTICES = 12

_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PREFIX_PHASE = {"+": 0, "+i": 1, "-": 2, "-i": 3, "": 0, "i": 1}
_PAULI_RE = re.compile(r"^([+-]?i?)([IXYZ]+)$")


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("a Pauli string needs at least one qubit")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError(f"bit masks exceed {self.n} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n)

    @classmethod
    def from_bits(cls, x_bits: Iterable[int], z_bits: Iterable[int], phase: int = 0) -> PauliString:
        xs, zs = list(x_bits), list(z_bits)
        if len(xs) != len(zs):
            raise ValueError("x_bits and z_bits must have the same length")
        return cls(len(xs), _mask(xs), _mask(zs), phase)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> PauliString:
        """The letter ``I/X/Y/Z`` on one qubit, identity elsewhere."""
        if not 0 <= qubit < n:
            raise IndexError(f"qubit {qubit} out of range for n={n}")
        bit = 1 << qubit
        x = bit if letter in "XY" else 0
        z = bit if letter in "ZY" else 0
        return cls(n, x, z)

    @classmethod
    def parse(cls, text: str) -> PauliString:
        """Parse strings like ``"+XZI"`` or ``"-iYY"``; letter ``k`` acts on qubit ``k``."""
        m = _PAULI_RE.match(text.strip())
        if m is None:
            raise ValueError(f"not a Pauli string: {text!r}")
        prefix, letters = m.groups()
        x = z = 0
        for q, letter in enumerate(letters):
            if letter in "XY":
                x |= 1 << q
            if letter in "ZY":
                z |= 1 << q
        return cls(len(letters), x, z, _PREFIX_PHASE[prefix])

    @property
    def x_bits(self) -> tuple[int, ...]:
        return tuple((self.x >> q) & 1 for q in range(self.n))

    @property
    def z_bits(self) -> tuple[int, ...]:
        return tuple((self.z >> q) & 1 for q in range(self.n))

    def letter(self, qubit: int) -> str:
        return "IXZY"[((self.x >> qubit) & 1) | (((self.z >> qubit) & 1) << 1)]

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian strings."""
        if not self.is_hermitian:
            raise ValueError(f"{self} has an imaginary phase")
        return 1 if self.phase == 0 else -1

    def __mul__(self, other: PauliString) -> PauliString:
        if not isinstance(other, PauliString):
            return NotImplemented
        _check_same_n(self, other)
        # Y = i X Z: move to the X^x Z^z form, multiply, move back.
        ny_a = (self.x & self.z).bit_count()
        ny_b = (other.x & other.z).bit_count()
        x, z = self.x ^ other.x, self.z ^ other.z
        swap = 2 * (self.z & other.x).bit_count()
        phase = self.phase + ny_a + other.phase + ny_b + swap - (x & z).bit_count()
        return PauliString(self.n, x, z, phase)

    def __str__(self) -> str:
        return _PHASE_PREFIX[self.phase] + "".join(self.letter(q) for q in range(self.n))

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


def _mask(bits: Iterable[int]) -> int:
    out = 0
    for q, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"bit {b!r} is not 0 or 1")
        out |= b << q
    return out


def _check_same_n(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise ValueError(f"qubit count mismatch: {p.n} vs {q.n}")


def commutes(p: PauliString, q: PauliString) -> bool:
    """True iff the symplectic inner product of ``p`` and ``q`` vanishes."""
    _check_same_n(p, q)
    return ((p.x & q.z).bit_count() + (p.z & q.x).bit_count()) % 2 == 0


def stabilizer_generator(graph: Graph, vertex: int) -> PauliString:
    """K_v = X_v times Z on every neighbour of v."""
    return PauliString(graph.n_vertices, 1 << vertex, graph.neighbor_mask(vertex))


def graph_stabilizer(graph: Graph, subset: Iterable[int]) -> PauliString:
    """Product of the generators K_a over ``subset``, with exact phase."""
    members = sorted(set(subset))
    if not members:
        raise ValueError("empty subset gives the identity, which detects nothing")
    for a in members:
        if not 0 <= a < graph.n_vertices:
            raise ValueError(f"vertex {a} not in graph")
    out = PauliString.identity(graph.n_vertices)
    for a in members:
        out = out * stabilizer_generator(graph, a)
    return out


def detection_fraction(graph: Graph, error: PauliString) -> Fraction:
    """Fraction of all 2^|V| stabilizer group elements that anticommute with ``error``.

    Brute-force enumeration, so only small graphs are accepted.
    """
    n = graph.n_vertices
    if n > MAX_ENUMERATION_VERTICES:
        raise ValueError(f"enumeration limited to {MAX_ENUMERATION_VERTICES} vertices, got {n}")
    if error.n != n:
        raise ValueError(f"error acts on {error.n} qubits, graph has {n}")
    nbr = [graph.neighbor_mask(v) for v in range(n)]
    hits = 0
    for subset in range(1 << n):
        sx, sz = subset, 0
        for v in range(n):
            if (subset >> v) & 1:
                sz ^= nbr[v]
        if ((sx & error.z).bit_count() + (sz & error.x).bit_count()) % 2:
            hits += 1
    return Fraction(hits, 1 << n)
