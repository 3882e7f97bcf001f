"""Framed wire format between client and device.

Every record is ``u32 length | u8 tag | payload`` with ``length`` counting the
tag and payload bytes.  Integers are little-endian.

====  ==========  =====================================
tag   message     payload
====  ==========  =====================================
0x01  BeginRound  graph hash u64, vertex count u32
0x02  Prepare     vertex u32, kind u8 (0 plus_theta, 1 dummy), value u8
0x03  Entangle    -
0x04  Measure     vertex u32, delta u8
0x05  Outcome     vertex u32, bit u8
0x06  EndRound    -
====  ==========  =====================================
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Union

_LEN = struct.Struct("<I")

PREP_KINDS = ("plus_theta", "dummy")


class FrameError(ValueError):
    pass


@dataclass(frozen=True)
class BeginRound:
    graph_hash: int
    n: int


@dataclass(frozen=True)
class Prepare:
    vertex: int
    kind: str
    value: int


@dataclass(frozen=True)
class Entangle:
    pass


@dataclass(frozen=True)
class Measure:
    vertex: int
    delta: int


@dataclass(frozen=True)
class Outcome:
    vertex: int
    bit: int


@dataclass(frozen=True)
class EndRound:
    pass


Message = Union[BeginRound, Prepare, Entangle, Measure, Outcome, EndRound]

_BODY = {
    0x01: struct.Struct("<QI"),
    0x02: struct.Struct("<IBB"),
    0x03: struct.Struct("<"),
    0x04: struct.Struct("<IB"),
    0x05: struct.Struct("<IB"),
    0x06: struct.Struct("<"),
}


_MAX_BODY = 1 + max(s.size for s in _BODY.values())


def encode(msg: Message) -> bytes:
    if isinstance(msg, BeginRound):
        tag, fields = 0x01, (msg.graph_hash, msg.n)
    elif isinstance(msg, Prepare):
        tag, fields = 0x02, (msg.vertex, PREP_KINDS.index(msg.kind), msg.value)
    elif isinstance(msg, Entangle):
        tag, fields = 0x03, ()
    elif isinstance(msg, Measure):
        tag, fields = 0x04, (msg.vertex, msg.delta)
    elif isinstance(msg, Outcome):
        tag, fields = 0x05, (msg.vertex, msg.bit)
    elif isinstance(msg, EndRound):
        tag, fields = 0x06, ()
    else:
        raise TypeError(f"not a wire message: {msg!r}")
    try:
        body = bytes([tag]) + _BODY[tag].pack(*fields)
    except struct.error as exc:
        raise FrameError(f"cannot encode {msg!r}: {exc}") from exc
    return _LEN.pack(len(body)) + body


def _decode_body(body: bytes) -> Message:
    if not body:
        raise FrameError("empty frame")
    tag = body[0]
    if tag not in _BODY:
        raise FrameError(f"unknown tag 0x{tag:02x}")
    layout = _BODY[tag]
    if len(body) - 1 != layout.size:
        raise FrameError(f"tag 0x{tag:02x} expects {layout.size} payload bytes, got {len(body) - 1}")
    fields = layout.unpack(body[1:])
    if tag == 0x01:
        return BeginRound(*fields)
    if tag == 0x02:
        vertex, kind, value = fields
        if kind >= len(PREP_KINDS):
            raise FrameError(f"unknown preparation kind {kind}")
        return Prepare(vertex, PREP_KINDS[kind], value)
    if tag == 0x03:
        return Entangle()
    if tag == 0x04:
        return Measure(*fields)
    if tag == 0x05:
        return Outcome(*fields)
    return EndRound()


class FrameDecoder:
    """Incremental decoder for a byte stream of frames."""

    def __init__(self) -> None:
        self.buffer = b""

    def feed(self, data: bytes) -> list[Message]:
        self.buffer += data
        out = []
        while len(self.buffer) >= _LEN.size:
            (length,) = _LEN.unpack_from(self.buffer)
            if not 1 <= length <= _MAX_BODY:
                raise FrameError(f"frame length {length} out of range")
            end = _LEN.size + length
            if len(self.buffer) < end:
                break
            out.append(_decode_body(self.buffer[_LEN.size:end]))
            self.buffer = self.buffer[end:]
        return out

    @property
    def pending(self) -> bool:
        return bool(self.buffer)


def decode_all(data: bytes) -> list[Message]:
    dec = FrameDecoder()
    msgs = dec.feed(data)
    if dec.pending:
        raise FrameError("trailing partial frame")
    return msgs
