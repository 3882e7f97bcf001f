"""Sweep grid sizes, benchmark each one, and publish the resulting certification map."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from trapbench.bench import BenchmarkConfig, run_optimized_cicc, run_protocol1
from trapbench.graph import fits_certified, fitting_entries, grid_graph
from trapbench.statevector import MAX_QUBITS
from trapbench.traps import TrapDistribution

SWEEP_MODES = ("protocol1", "optimized_cicc")
FORMATS = ("json", "csv", "svg_heatmap")
CSV_COLUMNS = ("width", "depth", "z", "z_t", "gamma", "verdict", "z_fail", "status")

CERTIFICATION_MAP_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "CertificationMap",
    "type": "object",
    "additionalProperties": False,
    "required": ["device_label", "timestamp", "mode", "entries"],
    "properties": {
        "device_label": {"type": "string"},
        "timestamp": {"type": ["string", "null"]},
        "mode": {"enum": list(SWEEP_MODES)},
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["width", "depth", "status", "z", "z_t", "gamma", "z_fail", "verdict", "config_hash", "seed"],
                "properties": {
                    "width": {"type": "integer", "minimum": 1},
                    "depth": {"type": "integer", "minimum": 1},
                    "status": {"enum": ["ok", "skipped"]},
                    "z": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
                    "z_t": {"type": ["number", "null"]},
                    "gamma": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
                    "z_fail": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
                    "verdict": {"enum": ["Accept", "Reject", None]},
                    "config_hash": {"type": "string"},
                    "seed": {"type": "integer", "minimum": 0},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class CertificationEntry:
    width: int
    depth: int
    status: str
    z: float | None
    z_t: float | None
    gamma: float | None
    z_fail: float | None
    verdict: str | None
    config_hash: str
    seed: int

    @property
    def dims(self) -> tuple[int, int]:
        return self.width, self.depth


@dataclass
class CertificationMap:
    entries: list[CertificationEntry]
    device_label: str
    mode: str
    timestamp: str | None = None

    def __post_init__(self) -> None:
        keys = [e.dims for e in self.entries]
        if len(keys) != len(set(keys)):
            raise ValueError("certification map has duplicate (width, depth) entries")
        if self.mode not in SWEEP_MODES:
            raise ValueError(f"unknown sweep mode {self.mode!r}")

    def entry(self, width: int, depth: int) -> CertificationEntry | None:
        return next((e for e in self.entries if e.dims == (width, depth)), None)

    def to_dict(self) -> dict[str, Any]:
        return {
            "device_label": self.device_label,
            "timestamp": self.timestamp,
            "mode": self.mode,
            "entries": [asdict(e) for e in self.entries],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CertificationMap:
        return cls(
            entries=[CertificationEntry(**e) for e in data["entries"]],
            device_label=data["device_label"],
            mode=data["mode"],
            timestamp=data.get("timestamp"),
        )


def config_hash(config: BenchmarkConfig, mode: str, dist: TrapDistribution | None = None) -> str:
    payload = {"config": config.to_dict(), "mode": mode, "traps": (dist or TrapDistribution()).to_dict()}
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def entry_seed(master: int, width: int, depth: int) -> int:
    """Independent seed per grid so entries do not depend on sweep order."""
    return int(np.random.SeedSequence([master, width, depth]).generate_state(1, np.uint64)[0] >> np.uint64(1))


def characterize_device(
    device,
    widths: Sequence[int] = (),
    depths: Sequence[int] = (),
    config: BenchmarkConfig | None = None,
    mode: str = "protocol1",
    grids: Iterable[tuple[int, int]] | None = None,
    dist: TrapDistribution | None = None,
    max_qubits: int = MAX_QUBITS,
    device_label: str | None = None,
) -> CertificationMap:
    """Benchmark every (width, depth) grid and collect the verdicts.

    ``grids`` overrides the widths x depths product.  Each grid runs on
    ``device.fresh(seed)`` with a seed derived from the master seed and the
    grid's dimensions.  Grids over ``max_qubits`` are kept as skipped entries.
    """
    if mode not in SWEEP_MODES:
        raise ValueError(f"unknown sweep mode {mode!r}")
    config = config or BenchmarkConfig()
    dims = list(grids) if grids is not None else [(w, d) for w in widths for d in depths]
    if len(dims) != len(set(dims)):
        raise ValueError("duplicate grid dimensions in sweep")
    chash = config_hash(config, mode, dist)
    entries = []
    for w, d in sorted(dims):
        seed = entry_seed(config.seed, w, d)
        if w * d > max_qubits:
            entries.append(CertificationEntry(w, d, "skipped", None, None, None, None, None, chash, seed))
            continue
        graph = grid_graph(w, d)
        dev = device.fresh(seed)
        if mode == "protocol1":
            res = run_protocol1(graph, dist, config.n, config.omega, dev, np.random.SeedSequence(seed))
            entries.append(CertificationEntry(w, d, "ok", None, None, None, res.z_fail, res.verdict, chash, seed))
        else:
            res = run_optimized_cicc(graph, _reseeded(config, seed), dev, dist)
            entries.append(CertificationEntry(w, d, "ok", res.z, res.z_t, res.gamma, None, res.verdict, chash, seed))
    label = device_label if device_label is not None else _label(device)
    return CertificationMap(entries, label, mode)


def _reseeded(config: BenchmarkConfig, seed: int) -> BenchmarkConfig:
    data = config.to_dict()
    data["seed"] = seed
    return BenchmarkConfig(**data)


def _label(device) -> str:
    describe = getattr(device, "describe", None)
    if describe is None:
        return type(device).__name__
    return json.dumps(describe(), sort_keys=True, separators=(",", ":"))


def query_pattern(cmap: CertificationMap | Sequence[CertificationEntry], dims: tuple[int, int], allow_transpose: bool = True) -> dict[str, Any]:
    fitting = fitting_entries(dims, cmap, allow_transpose)
    accepted = [e for e in getattr(cmap, "entries", cmap) if e.verdict == "Accept"]
    largest = max(accepted, key=lambda e: (e.width * e.depth, e.width, e.depth), default=None)
    return {
        "certified": fits_certified(dims, cmap, allow_transpose),
        "fitting": [e.dims for e in fitting],
        "largest": None if largest is None else largest.dims,
    }


# -- output -----------------------------------------------------------------


def render_json(cmap: CertificationMap) -> str:
    return json.dumps(cmap.to_dict(), sort_keys=True, indent=2) + "\n"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(cmap: CertificationMap) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for e in cmap.entries:
        writer.writerow([_cell(getattr(e, col)) for col in CSV_COLUMNS])
    return buf.getvalue()


_CELL = 48


def _fill(e: CertificationEntry, mode: str) -> str:
    if e.status == "skipped":
        return "#bdbdbd"
    if e.verdict != "Accept":
        return "#d7301f"
    # greener for stronger evidence
    strength = e.z if mode == "optimized_cicc" else 1.0 - (e.z_fail or 0.0)
    shade = int(round(160 - 100 * max(0.0, min(1.0, strength or 0.0))))
    return f"#{shade:02x}{170 + shade // 4:02x}{shade:02x}"


def render_svg(cmap: CertificationMap) -> str:
    widths = sorted({e.width for e in cmap.entries})
    depths = sorted({e.depth for e in cmap.entries})
    margin = 40
    w_px = margin + _CELL * max(1, len(depths)) + 10
    h_px = margin + _CELL * max(1, len(widths)) + 10
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w_px}" height="{h_px}" font-family="monospace" font-size="10">',
        f'<text x="{margin}" y="12">depth</text>',
        f'<text x="2" y="{margin - 4}">width</text>',
    ]
    for j, d in enumerate(depths):
        lines.append(f'<text x="{margin + j * _CELL + _CELL // 2}" y="{margin - 4}" text-anchor="middle">{d}</text>')
    for i, w in enumerate(widths):
        lines.append(f'<text x="{margin - 6}" y="{margin + i * _CELL + _CELL // 2 + 3}" text-anchor="end">{w}</text>')
    for e in cmap.entries:
        x = margin + depths.index(e.depth) * _CELL
        y = margin + widths.index(e.width) * _CELL
        label = "skip" if e.status == "skipped" else ("acc" if e.verdict == "Accept" else "rej")
        lines.append(
            f'<rect class="cell" data-width="{e.width}" data-depth="{e.depth}" data-verdict="{label}" '
            f'x="{x}" y="{y}" width="{_CELL - 2}" height="{_CELL - 2}" fill="{_fill(e, cmap.mode)}"/>'
        )
        lines.append(f'<text x="{x + _CELL // 2 - 1}" y="{y + _CELL // 2 + 3}" text-anchor="middle">{label}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


_RENDERERS = {"json": render_json, "csv": render_csv, "svg_heatmap": render_svg}


def emit_map(cmap: CertificationMap, fmt: str, path: str | Path) -> Path:
    """Write ``cmap`` as json, csv or an svg heatmap.  I/O errors propagate."""
    if fmt not in _RENDERERS:
        raise ValueError(f"unknown map format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_RENDERERS[fmt](cmap))
    return path


def schema_text() -> str:
    return json.dumps(CERTIFICATION_MAP_SCHEMA, indent=2, sort_keys=True) + "\n"
