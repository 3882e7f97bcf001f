"""Per-round records of a blind delegation, persisted as JSON lines."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping

COMPUTATION = "computation"
TRAP = "trap"


@dataclass
class VertexRecord:
    vertex: int
    prep_kind: str
    prep_value: int
    delta: int | None = None
    outcome: int | None = None


@dataclass
class RoundTranscript:
    round_id: int
    kind: str
    records: list[VertexRecord] = field(default_factory=list)
    theta: dict[int, int] = field(default_factory=dict)
    dummy_bits: dict[int, int] = field(default_factory=dict)
    pads: dict[int, int] = field(default_factory=dict)
    result: tuple[int, ...] | None = None
    trap: dict[str, Any] | None = None
    verdict: str | None = None
    aborted: bool = False
    error: str | None = None
    repetition: int = 0

    def unblinded(self) -> dict[int, int]:
        """Device outcomes with the client's pi-pads removed; dummies excluded."""
        out = {}
        for rec in self.records:
            if rec.outcome is None or rec.prep_kind == "dummy":
                continue
            out[rec.vertex] = rec.outcome ^ self.pads.get(rec.vertex, 0)
        return out

    def deltas(self) -> list[int]:
        return [rec.delta for rec in self.records if rec.delta is not None]

    def to_dict(self) -> dict[str, Any]:
        return {
            "round": self.round_id,
            "repetition": self.repetition,
            "kind": self.kind,
            "records": [
                {"vertex": r.vertex, "prep": [r.prep_kind, r.prep_value], "delta": r.delta, "outcome": r.outcome}
                for r in self.records
            ],
            "secrets": {
                "theta": _str_keys(self.theta),
                "r": _str_keys(self.dummy_bits),
                "pad": _str_keys(self.pads),
            },
            "result": None if self.result is None else list(self.result),
            "trap": self.trap,
            "verdict": self.verdict,
            "aborted": self.aborted,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RoundTranscript:
        secrets = data["secrets"]
        records = [
            VertexRecord(int(r["vertex"]), str(r["prep"][0]), int(r["prep"][1]), r["delta"], r["outcome"])
            for r in data["records"]
        ]
        for r in records:
            if r.delta is not None and not 0 <= r.delta < 8:
                raise ValueError(f"delta index {r.delta} outside 0..7")
            if r.outcome not in (None, 0, 1):
                raise ValueError(f"outcome {r.outcome!r} is not a bit")
        return cls(
            round_id=int(data["round"]),
            kind=str(data["kind"]),
            records=records,
            theta=_int_keys(secrets["theta"]),
            dummy_bits=_int_keys(secrets["r"]),
            pads=_int_keys(secrets["pad"]),
            result=None if data["result"] is None else tuple(data["result"]),
            trap=data["trap"],
            verdict=data["verdict"],
            aborted=bool(data["aborted"]),
            error=data["error"],
            repetition=int(data["repetition"]),
        )


def _str_keys(d: Mapping[int, int]) -> dict[str, int]:
    return {str(k): v for k, v in sorted(d.items())}


def _int_keys(d: Mapping[str, int]) -> dict[int, int]:
    return {int(k): int(v) for k, v in d.items()}


def dumps_transcripts(rounds: Iterable[RoundTranscript]) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True, separators=(",", ":")) + "\n" for r in rounds)


def write_transcripts(path: str | Path, rounds: Iterable[RoundTranscript]) -> None:
    Path(path).write_text(dumps_transcripts(rounds))


def iter_transcripts(path: str | Path) -> Iterator[RoundTranscript]:
    """Parse a JSONL transcript; a malformed or truncated line raises ValueError."""
    text = Path(path).read_text()
    if text and not text.endswith("\n"):
        raise ValueError(f"{path}: transcript is truncated (no trailing newline)")
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            yield RoundTranscript.from_dict(json.loads(line))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, IndexError) as exc:
            raise ValueError(f"{path}:{lineno}: corrupt transcript record ({exc})") from exc


def read_transcripts(path: str | Path) -> list[RoundTranscript]:
    return list(iter_transcripts(path))
