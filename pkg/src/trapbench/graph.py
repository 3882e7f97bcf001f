"""Graphs, flows, correction sets and measurement patterns on 2D cluster grids.

Vertices are integers ``0..n-1``.  Grid vertices are numbered row-major:
row ``r`` / column ``c`` of a ``width x depth`` grid is ``r * depth + c``.
Angles are indices in Z_8 (units of pi/4).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Protocol, Sequence

import numpy as np


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: frozenset[tuple[int, int]]
    inputs: frozenset[int] = frozenset()
    outputs: frozenset[int] = frozenset()
    shape: tuple[int, int] | None = None
    _nbr: tuple[int, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        norm = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            for v in (a, b):
                if not 0 <= v < self.n_vertices:
                    raise ValueError(f"edge ({a}, {b}) references unknown vertex")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "outputs", frozenset(self.outputs))
        for v in self.inputs | self.outputs:
            if not 0 <= v < self.n_vertices:
                raise ValueError(f"input/output vertex {v} not in graph")
        nbr = [0] * self.n_vertices
        for a, b in norm:
            nbr[a] |= 1 << b
            nbr[b] |= 1 << a
        object.__setattr__(self, "_nbr", tuple(nbr))

    @property
    def vertices(self) -> range:
        return range(self.n_vertices)

    def neighbor_mask(self, v: int) -> int:
        return self._nbr[v]

    def neighbors(self, v: int) -> frozenset[int]:
        mask = self._nbr[v]
        return frozenset(u for u in range(self.n_vertices) if (mask >> u) & 1)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_vertices": self.n_vertices,
            "edges": [list(e) for e in self.sorted_edges()],
            "inputs": sorted(self.inputs),
            "outputs": sorted(self.outputs),
            "shape": list(self.shape) if self.shape else None,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Graph:
        shape = data.get("shape")
        return cls(
            int(data["n_vertices"]),
            frozenset(tuple(e) for e in data["edges"]),
            frozenset(data.get("inputs", ())),
            frozenset(data.get("outputs", ())),
            tuple(shape) if shape else None,
        )

    def digest(self) -> int:
        """Stable 64-bit identifier of the vertex count and edge set."""
        canon = json.dumps({"n": self.n_vertices, "edges": self.sorted_edges()}, separators=(",", ":"))
        return int.from_bytes(hashlib.sha256(canon.encode()).digest()[:8], "little")


def grid_graph(width: int, depth: int) -> Graph:
    """``width`` rows by ``depth`` columns of nearest-neighbour cluster edges.

    Inputs are the first column and outputs the last column.
    """
    if width < 1 or depth < 1:
        raise ValueError(f"grid dimensions must be positive, got {width}x{depth}")
    edges = set()
    for r in range(width):
        for c in range(depth):
            v = r * depth + c
            if c + 1 < depth:
                edges.add((v, v + 1))
            if r + 1 < width:
                edges.add((v, v + depth))
    inputs = frozenset(r * depth for r in range(width))
    outputs = frozenset(r * depth + depth - 1 for r in range(width))
    return Graph(width * depth, frozenset(edges), inputs, outputs, (width, depth))


@dataclass(frozen=True)
class Flow:
    f: Mapping[int, int]
    order: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "f", dict(self.f))
        object.__setattr__(self, "order", tuple(self.order))

    def position(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.order)}

    def check(self, graph: Graph) -> None:
        """Raise ValueError unless this is a valid flow on ``graph``."""
        if sorted(self.order) != list(graph.vertices):
            raise ValueError("flow order must list every vertex exactly once")
        if len(set(self.f.values())) != len(self.f):
            raise ValueError("flow map is not injective")
        pos = self.position()
        for i, fi in self.f.items():
            if i in graph.outputs or fi in graph.inputs:
                raise ValueError(f"flow arc {i}->{fi} leaves an output or enters an input")
            if fi not in graph.neighbors(i):
                raise ValueError(f"f({i})={fi} is not a neighbour")
            if pos[i] >= pos[fi]:
                raise ValueError(f"{i} must be measured before f({i})={fi}")
            for k in graph.neighbors(fi):
                if k != i and pos[i] >= pos[k]:
                    raise ValueError(f"{i} must precede neighbour {k} of f({i})")
        missing = set(graph.vertices) - set(graph.outputs) - set(self.f)
        if missing:
            raise ValueError(f"non-output vertices without flow: {sorted(missing)}")


def standard_grid_flow(graph: Graph) -> Flow:
    """f(r, c) = (r, c + 1), measured column by column."""
    if graph.shape is None or grid_graph(*graph.shape) != graph:
        raise ValueError("standard_grid_flow needs a graph built by grid_graph")
    width, depth = graph.shape
    f = {r * depth + c: r * depth + c + 1 for r in range(width) for c in range(depth - 1)}
    order = tuple(r * depth + c for c in range(depth) for r in range(width))
    return Flow(f, order)


@dataclass(frozen=True)
class CorrectionSets:
    sx: Mapping[int, frozenset[int]]
    sz: Mapping[int, frozenset[int]]


def correction_sets(graph: Graph, flow: Flow) -> CorrectionSets:
    sx: dict[int, frozenset[int]] = {v: frozenset() for v in graph.vertices}
    sz: dict[int, set[int]] = {v: set() for v in graph.vertices}
    for j, fj in flow.f.items():
        sx[fj] = frozenset({j})
        for i in graph.neighbors(fj):
            if i != j:
                sz[i].add(j)
    return CorrectionSets(sx, {v: frozenset(s) for v, s in sz.items()})


@dataclass(frozen=True)
class MeasurementPattern:
    """Classical description of one X-Y plane MBQC computation."""

    graph: Graph
    flow: Flow
    phi: Mapping[int, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", {int(v): int(a) for v, a in self.phi.items()})
        self.flow.check(self.graph)
        for v in self.graph.vertices:
            if v not in self.phi:
                raise ValueError(f"no angle for vertex {v}")
            if not 0 <= self.phi[v] < 8:
                raise ValueError(f"angle index {self.phi[v]} outside 0..7")

    @property
    def output_set(self) -> frozenset[int]:
        return self.graph.outputs

    @property
    def outputs(self) -> tuple[int, ...]:
        return tuple(sorted(self.graph.outputs))

    def to_dict(self) -> dict[str, Any]:
        return {
            "graph": self.graph.to_dict(),
            "flow": sorted([i, fi] for i, fi in self.flow.f.items()),
            "order": list(self.flow.order),
            "phi": [self.phi[v] for v in self.graph.vertices],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> MeasurementPattern:
        graph = Graph.from_dict(data["graph"])
        flow = Flow({int(i): int(fi) for i, fi in data["flow"]}, tuple(data["order"]))
        return cls(graph, flow, dict(enumerate(data["phi"])))


def grid_pattern(width: int, depth: int, phi: Sequence[int] | Mapping[int, int] | None = None) -> MeasurementPattern:
    graph = grid_graph(width, depth)
    if phi is None:
        angles = {v: 0 for v in graph.vertices}
    elif isinstance(phi, Mapping):
        angles = dict(phi)
    else:
        if len(phi) != graph.n_vertices:
            raise ValueError(f"need {graph.n_vertices} angles, got {len(phi)}")
        angles = dict(enumerate(phi))
    return MeasurementPattern(graph, standard_grid_flow(graph), angles)


def random_grid_pattern(width: int, depth: int, rng: np.random.Generator) -> MeasurementPattern:
    return grid_pattern(width, depth, [int(a) for a in rng.integers(0, 8, size=width * depth)])


class _Entry(Protocol):
    width: int
    depth: int
    verdict: str


def fits_certified(dims: tuple[int, int], cmap: Any, allow_transpose: bool = True) -> bool:
    """Whether a ``(width, depth)`` pattern sits inside some accepted grid of ``cmap``.

    ``cmap`` is a CertificationMap or any iterable of entries with
    ``width``, ``depth`` and ``verdict`` attributes.
    """
    return bool(fitting_entries(dims, cmap, allow_transpose))


def fitting_entries(dims: tuple[int, int], cmap: Any, allow_transpose: bool = True) -> list[Any]:
    width, depth = dims
    entries: Iterable[_Entry] = getattr(cmap, "entries", cmap)
    out = []
    for e in entries:
        if e.verdict != "Accept":
            continue
        if (width <= e.width and depth <= e.depth) or (
            allow_transpose and width <= e.depth and depth <= e.width
        ):
            out.append(e)
    return out
