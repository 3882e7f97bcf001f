"""Strict JSON run configuration for the command line."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from trapbench.bench import BenchmarkConfig
from trapbench.characterize import FORMATS, SWEEP_MODES
from trapbench.graph import MeasurementPattern, grid_pattern
from trapbench.pauli import PauliString
from trapbench.protocol.devices import STRATEGIES, AdversarialDevice, HonestDevice
from trapbench.statevector import MAX_QUBITS, NoiseModel
from trapbench.traps import TrapDistribution

BENCH_MODES = ("protocol1", "generic", "optimized")


class ConfigError(ValueError):
    """The run configuration is malformed."""


def _check_keys(section: str, data: Any, allowed: set[str]) -> None:
    if not isinstance(data, Mapping):
        raise ConfigError(f"{section} must be an object")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(unknown)}")


def _int(section: str, value: Any, low: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < low:
        raise ConfigError(f"{section} must be an integer >= {low}, got {value!r}")
    return value


@dataclass(frozen=True)
class DeviceConfig:
    kind: str = "honest"
    noise: NoiseModel = field(default_factory=NoiseModel)
    strategy: str | None = None
    error: str | None = None
    probability: float = 1.0

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> DeviceConfig:
        _check_keys("device", data, {"kind", "noise", "strategy", "error", "probability"})
        kind = data.get("kind", "honest")
        noise_data = data.get("noise", {})
        _check_keys("device.noise", noise_data, {f.name for f in fields(NoiseModel)})
        try:
            noise = NoiseModel(**{k: float(v) for k, v in noise_data.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"device.noise: {exc}") from exc
        if kind == "honest":
            extra = {"strategy", "error", "probability"} & set(data)
            if extra:
                raise ConfigError(f"honest device does not take {', '.join(sorted(extra))}")
            return cls("honest", noise)
        if kind != "adversary":
            raise ConfigError(f"device.kind must be 'honest' or 'adversary', got {kind!r}")
        strategy = data.get("strategy")
        if strategy not in STRATEGIES:
            raise ConfigError(f"device.strategy must be one of {STRATEGIES}, got {strategy!r}")
        error = data.get("error")
        if error is not None:
            try:
                PauliString.parse(error)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"device.error: {exc}") from exc
        if strategy == "targeted_pauli" and error is None:
            raise ConfigError("targeted_pauli needs device.error")
        probability = data.get("probability", 1.0)
        if isinstance(probability, bool) or not isinstance(probability, (int, float)) or not 0 <= probability <= 1:
            raise ConfigError(f"device.probability must be in [0, 1], got {probability!r}")
        return cls("adversary", noise, strategy, error, float(probability))

    def build(self, seed: int | None):
        if self.kind == "honest":
            return HonestDevice(self.noise, seed)
        error = PauliString.parse(self.error) if self.error else None
        return AdversarialDevice(self.strategy, seed, error, self.probability, self.noise)


@dataclass(frozen=True)
class SweepConfig:
    widths: tuple[int, ...] = (1, 2, 3)
    depths: tuple[int, ...] = (1, 2, 3, 4)
    mode: str = "protocol1"
    formats: tuple[str, ...] = ("json", "csv")
    max_qubits: int = MAX_QUBITS

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SweepConfig:
        _check_keys("characterize", data, {"widths", "depths", "mode", "formats", "max_qubits"})
        out = {}
        for key in ("widths", "depths"):
            if key in data:
                values = data[key]
                if not isinstance(values, list) or not values:
                    raise ConfigError(f"characterize.{key} must be a non-empty list")
                out[key] = tuple(_int(f"characterize.{key}", v, 1) for v in values)
        if "mode" in data:
            if data["mode"] not in SWEEP_MODES:
                raise ConfigError(f"characterize.mode must be one of {SWEEP_MODES}")
            out["mode"] = data["mode"]
        if "formats" in data:
            out["formats"] = parse_formats(data["formats"])
        if "max_qubits" in data:
            out["max_qubits"] = _int("characterize.max_qubits", data["max_qubits"], 1)
            if out["max_qubits"] > MAX_QUBITS:
                raise ConfigError(f"characterize.max_qubits cannot exceed {MAX_QUBITS}")
        return cls(**out)


def parse_formats(value: Any) -> tuple[str, ...]:
    items = value.split(",") if isinstance(value, str) else value
    if not isinstance(items, (list, tuple)) or not items:
        raise ConfigError("formats must be a non-empty list")
    for f in items:
        if f not in FORMATS:
            raise ConfigError(f"unknown format {f!r}; expected one of {FORMATS}")
    return tuple(dict.fromkeys(items))


_TOP_KEYS = {"mode", "grid", "phi", "bench", "seed", "device", "traps", "characterize", "output", "device_label"}
_BENCH_KEYS = {f.name for f in fields(BenchmarkConfig)} - {"seed"}


@dataclass(frozen=True)
class RunConfig:
    mode: str = "protocol1"
    grid: tuple[int, int] = (2, 3)
    phi: tuple[int, ...] | None = None
    bench: BenchmarkConfig = field(default_factory=BenchmarkConfig)
    device: DeviceConfig = field(default_factory=DeviceConfig)
    traps: TrapDistribution = field(default_factory=TrapDistribution)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: str = "out"
    device_label: str | None = None

    @property
    def seed(self) -> int:
        return self.bench.seed

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RunConfig:
        _check_keys("config", data, _TOP_KEYS)
        out: dict[str, Any] = {}
        mode = data.get("mode", "protocol1")
        if mode not in BENCH_MODES:
            raise ConfigError(f"mode must be one of {BENCH_MODES}, got {mode!r}")
        out["mode"] = mode
        if "grid" in data:
            grid = data["grid"]
            if not isinstance(grid, list) or len(grid) != 2:
                raise ConfigError("grid must be [width, depth]")
            out["grid"] = (_int("grid", grid[0], 1), _int("grid", grid[1], 1))
        if data.get("phi") is not None:
            phi = data["phi"]
            if not isinstance(phi, list):
                raise ConfigError("phi must be a list of angle indices")
            out["phi"] = tuple(_int("phi", p) for p in phi)
        bench_data = data.get("bench", {})
        _check_keys("bench", bench_data, _BENCH_KEYS)
        seed = _int("seed", data.get("seed", 0))
        try:
            out["bench"] = BenchmarkConfig(**bench_data, seed=seed)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bench: {exc}") from exc
        if "device" in data:
            out["device"] = DeviceConfig.from_dict(data["device"])
        if "traps" in data:
            _check_keys("traps", data["traps"], {"subsets", "odd_only"})
            try:
                out["traps"] = TrapDistribution.from_dict(data["traps"])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"traps: {exc}") from exc
        if "characterize" in data:
            out["sweep"] = SweepConfig.from_dict(data["characterize"])
        if "output" in data:
            if not isinstance(data["output"], str):
                raise ConfigError("output must be a path string")
            out["output"] = data["output"]
        if data.get("device_label") is not None:
            if not isinstance(data["device_label"], str):
                raise ConfigError("device_label must be a string")
            out["device_label"] = data["device_label"]
        cfg = cls(**out)
        cfg.pattern()  # validates grid/phi together
        return cfg

    def with_overrides(self, seed: int | None = None, mode: str | None = None, output: str | None = None,
                       exponent_mode: str | None = None) -> RunConfig:
        bench = self.bench.to_dict()
        if seed is not None:
            bench["seed"] = seed
        if exponent_mode is not None:
            bench["exponent_mode"] = exponent_mode
        try:
            new_bench = BenchmarkConfig(**bench)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if mode is not None and mode not in BENCH_MODES:
            raise ConfigError(f"mode must be one of {BENCH_MODES}")
        return RunConfig(
            mode or self.mode, self.grid, self.phi, new_bench, self.device, self.traps, self.sweep,
            output or self.output, self.device_label,
        )

    def pattern(self) -> MeasurementPattern:
        try:
            return grid_pattern(*self.grid, self.phi)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"grid/phi: {exc}") from exc


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON run configuration.

    Unreadable files raise OSError; malformed content raises ConfigError.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig.from_dict(data)
