"""Command line: ``trapbench bench | characterize | analyze``.

Exit codes: 0 on a completed run whatever the verdict, 2 for a bad
configuration, 3 for I/O failures and corrupt transcripts, 4 when the device
breaks the protocol.  Log verbosity comes from ``TRAPBENCH_LOG``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from trapbench.bench import (
    BenchmarkResult,
    acceptance_decomposition,
    rescore,
    run_generic_cicc,
    run_optimized_cicc,
    run_protocol1,
    warn_omega,
)
from trapbench.characterize import FORMATS, characterize_device, emit_map
from trapbench.config import BENCH_MODES, ConfigError, RunConfig, load_config, parse_formats
from trapbench.protocol.client import deterministic_output
from trapbench.protocol.devices import ProtocolViolation
from trapbench.protocol.transcript import dumps_transcripts, read_transcripts

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_PROTOCOL = 0, 2, 3, 4
CERTIFICATE = "certificate.json"
TRANSCRIPT = "transcript.jsonl"
ANALYSIS = "analysis.json"
_MAP_SUFFIX = {"json": "json", "csv": "csv", "svg_heatmap": "svg"}

log = logging.getLogger("trapbench")


def device_seed(master: int) -> int:
    return int(np.random.SeedSequence([master, 1]).generate_state(1, np.uint64)[0] >> np.uint64(1))


def _expected(cfg: RunConfig) -> tuple[int, ...] | None:
    return deterministic_output(cfg.pattern())


def certificate(cfg: RunConfig, result: BenchmarkResult, transcript_text: str) -> dict[str, Any]:
    w, d = cfg.grid
    cert: dict[str, Any] = {
        "mode": cfg.mode,
        "exponent_mode": cfg.bench.exponent_mode,
        "seed": cfg.seed,
        "grid": {"width": w, "depth": d},
        "config": cfg.bench.to_dict(),
        "device": cfg.device_label or _describe(cfg),
        "traps": cfg.traps.to_dict(),
        "counts": {
            "rounds": result.rounds,
            "accepted": result.accepted_count,
            "activated": result.activated_count,
            "aborted": sum(1 for tr in result.transcripts if tr.aborted),
        },
        "z": result.z,
        "z_t": result.z_t,
        "gamma": result.gamma,
        "z_fail": result.z_fail,
        "verdict": result.verdict,
        "transcript_sha256": hashlib.sha256(transcript_text.encode()).hexdigest(),
    }
    if cfg.mode == "generic":
        cert["acceptance"] = acceptance_decomposition(result.ledger)
    return cert


def _describe(cfg: RunConfig) -> dict[str, Any]:
    return cfg.device.build(None).describe()


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def cmd_bench(cfg: RunConfig, device=None) -> int:
    """Run the configured benchmark, then write the certificate and the JSONL transcript.

    Rounds the device aborted are scored as failures; the run still completes
    but exits with EXIT_PROTOCOL.
    """
    device = device if device is not None else cfg.device.build(device_seed(cfg.seed))
    pattern = cfg.pattern()
    if cfg.mode == "protocol1":
        warn_omega(cfg.bench.omega)
        result = run_protocol1(pattern.graph, cfg.traps, cfg.bench.n, cfg.bench.omega, device,
                               np.random.SeedSequence(cfg.seed))
    elif cfg.mode == "generic":
        result = run_generic_cicc(pattern, cfg.bench, device, cfg.traps, expected=_expected(cfg))
    else:
        result = run_optimized_cicc(pattern.graph, cfg.bench, device, cfg.traps)
    text = dumps_transcripts(result.transcripts)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / TRANSCRIPT).write_text(text, encoding="utf-8")
    cert = certificate(cfg, result, text)
    (out / CERTIFICATE).write_text(_dump(cert), encoding="utf-8")
    sys.stdout.write(_dump(cert))
    if cert["counts"]["aborted"]:
        # scored as failures, but the operator must hear about it
        log.error("device broke the protocol in %d round(s)", cert["counts"]["aborted"])
        return EXIT_PROTOCOL
    return EXIT_OK


def cmd_characterize(cfg: RunConfig, formats: Sequence[str] | None = None, device=None) -> int:
    sweep = cfg.sweep
    if sweep.mode == "protocol1":
        warn_omega(cfg.bench.omega)
    device = device if device is not None else cfg.device.build(device_seed(cfg.seed))
    cmap = characterize_device(
        device, sweep.widths, sweep.depths, cfg.bench, sweep.mode, dist=cfg.traps,
        max_qubits=sweep.max_qubits, device_label=cfg.device_label,
    )
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    for fmt in formats or sweep.formats:
        path = emit_map(cmap, fmt, out / f"map.{_MAP_SUFFIX[fmt]}")
        log.info("wrote %s", path)
    for e in cmap.entries:
        sys.stdout.write(f"{e.width}x{e.depth}\t{e.status}\t{e.verdict}\n")
    return EXIT_OK


def cmd_analyze(cfg: RunConfig, transcript: str | Path) -> int:
    """Re-score a stored transcript under ``cfg`` without simulating anything."""
    text = Path(transcript).read_text(encoding="utf-8")
    rounds = read_transcripts(transcript)
    pattern = cfg.pattern()
    expected = _expected(cfg) if cfg.mode == "generic" else None
    result = rescore(cfg.mode, pattern.graph, cfg.bench, rounds, expected)
    cert = _dump(certificate(cfg, result, text))
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / ANALYSIS).write_text(cert, encoding="utf-8")
    sys.stdout.write(cert)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--mode", choices=BENCH_MODES, help="benchmark mode (overrides the config)")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--exponent-mode", choices=("hoeffding_n", "paper_n3"))

    parser = argparse.ArgumentParser(prog="trapbench", description="Trap-based benchmarking of simulated quantum devices.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bench", parents=[common], help="run one benchmark and write a certificate")
    ch = sub.add_parser("characterize", parents=[common], help="sweep grid sizes and write a certification map")
    ch.add_argument("--format", help=f"comma separated subset of {','.join(FORMATS)}")
    an = sub.add_parser("analyze", parents=[common], help="re-score a stored transcript")
    an.add_argument("--transcript", required=True)
    return parser


def _configure_logging() -> None:
    level = os.environ.get("TRAPBENCH_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = load_config(args.config).with_overrides(args.seed, args.mode, args.out, args.exponent_mode)
        if args.command == "bench":
            return cmd_bench(cfg)
        if args.command == "characterize":
            formats = parse_formats(args.format) if args.format else None
            return cmd_characterize(cfg, formats)
        return cmd_analyze(cfg, args.transcript)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except ProtocolViolation as exc:
        log.error("protocol violation: %s", exc)
        return EXIT_PROTOCOL
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except ValueError as exc:
        if args.command == "analyze":
            log.error("corrupt transcript: %s", exc)
            return EXIT_IO
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
