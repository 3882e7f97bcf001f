"""Carry the device interface over the framed wire format.

``DeviceServer`` turns incoming frames into calls on a local device and
returns reply frames.  ``LoopbackDevice`` is the in-process client proxy
(everything still goes through bytes); ``StreamDevice``/``serve_stream`` do
the same over a connected socket.

The BeginRound frame only carries a graph hash, so the server resolves it
against graphs it knows: explicitly registered ones plus every grid that
fits the qubit limit.
"""

from __future__ import annotations

import logging
import socket
from typing import Iterable

from trapbench.graph import Flow, Graph, grid_graph
from trapbench.protocol.devices import Device, Preparation, ProtocolViolation
from trapbench.protocol.messages import (
    BeginRound,
    EndRound,
    Entangle,
    FrameDecoder,
    FrameError,
    Measure,
    Message,
    Outcome,
    Prepare,
    decode_all,
    encode,
)
from trapbench.statevector import MAX_QUBITS

log = logging.getLogger(__name__)


def _grid_catalog(max_qubits: int) -> dict[int, Graph]:
    out = {}
    for w in range(1, max_qubits + 1):
        for d in range(1, max_qubits // w + 1):
            g = grid_graph(w, d)
            out[g.digest()] = g
    return out


class DeviceServer:
    def __init__(self, device: Device, graphs: Iterable[Graph] = (), max_qubits: int = MAX_QUBITS):
        self.device = device
        self.graphs = _grid_catalog(max_qubits)
        for g in graphs:
            self.graphs[g.digest()] = g

    def register(self, graph: Graph) -> None:
        self.graphs[graph.digest()] = graph

    def dispatch(self, msg: Message) -> Message | None:
        if isinstance(msg, BeginRound):
            graph = self.graphs.get(msg.graph_hash)
            if graph is None or graph.n_vertices != msg.n:
                raise ProtocolViolation(f"unknown graph hash {msg.graph_hash:#x}")
            self.device.begin_round(graph, None)
        elif isinstance(msg, Prepare):
            self.device.accept_qubit(msg.vertex, Preparation(msg.kind, msg.value))
        elif isinstance(msg, Entangle):
            self.device.entangle_all()
        elif isinstance(msg, Measure):
            return Outcome(msg.vertex, self.device.measure(msg.vertex, msg.delta))
        elif isinstance(msg, EndRound):
            self.device.end_round()
        else:
            raise ProtocolViolation(f"client sent device-side message {msg!r}")
        return None

    def handle(self, data: bytes) -> bytes:
        """Process complete frames and return the encoded replies."""
        replies = [self.dispatch(m) for m in decode_all(data)]
        return b"".join(encode(r) for r in replies if r is not None)


class _FramedClient:
    """Client half: encodes each device call, decodes the reply."""

    def _exchange(self, msg: Message) -> list[Message]:
        raise NotImplementedError

    def begin_round(self, graph: Graph, flow: Flow | None = None) -> None:
        self._exchange(BeginRound(graph.digest(), graph.n_vertices))

    def accept_qubit(self, vertex: int, prep: Preparation) -> None:
        self._exchange(Prepare(vertex, prep.kind, prep.value))

    def entangle_all(self) -> None:
        self._exchange(Entangle())

    def measure(self, vertex: int, delta_index: int) -> int:
        replies = self._exchange(Measure(vertex, delta_index))
        if len(replies) != 1 or not isinstance(replies[0], Outcome) or replies[0].vertex != vertex:
            raise ProtocolViolation(f"bad reply to Measure({vertex}): {replies!r}")
        return replies[0].bit

    def end_round(self) -> None:
        self._exchange(EndRound())


class LoopbackDevice(_FramedClient):
    """In-process transport: every call is serialised to frames and back."""

    def __init__(self, server: DeviceServer):
        self.server = server
        self.wire_log: list[bytes] = []

    def _exchange(self, msg: Message) -> list[Message]:
        frame = encode(msg)
        self.wire_log.append(frame)
        reply = self.server.handle(frame)
        if reply:
            self.wire_log.append(reply)
        return decode_all(reply)


class StreamDevice(_FramedClient):
    """Client proxy over a connected stream socket."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.decoder = FrameDecoder()

    def _exchange(self, msg: Message) -> list[Message]:
        self.sock.sendall(encode(msg))
        if not isinstance(msg, Measure):
            return []
        while True:
            msgs = self.decoder.feed(self._recv())
            if msgs:
                return msgs

    def _recv(self) -> bytes:
        chunk = self.sock.recv(4096)
        if not chunk:
            raise ProtocolViolation("device closed the connection")
        return chunk


def serve_stream(sock: socket.socket, server: DeviceServer) -> None:
    """Serve frames from ``sock`` until the peer closes it.

    A contract breach or malformed frame closes the connection.
    """
    decoder = FrameDecoder()
    try:
        while True:
            chunk = sock.recv(4096)
            if not chunk:
                return
            for msg in decoder.feed(chunk):
                reply = server.dispatch(msg)
                if reply is not None:
                    sock.sendall(encode(reply))
    except (ProtocolViolation, FrameError, ValueError) as exc:
        log.warning("closing device connection: %s", exc)
    finally:
        sock.close()
