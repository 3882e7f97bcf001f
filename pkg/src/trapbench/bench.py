"""Verification runs, the benchmarks built from them, and their confidence bounds.

Three ways to score a device live here:

* ``run_protocol1`` - n trap rounds, accept iff the failed-trap fraction is
  below a threshold omega.
* ``run_generic_cicc`` - repeat a full verification run m times and report
  z = #accepted/m - beta, a lower bound on the acceptance probability that
  fails with probability at most exp(-2 m beta^2).
* ``run_optimized_cicc`` - spend all m*n rounds on traps, upper-bound the
  trap activation rate by z_t = #activated/(m n) + beta_t and convert it
  into a lower bound on acceptance.

Every scorer is split into a runner that produces round transcripts and a
pure function that turns transcripts or counts into the reported numbers, so
stored transcripts can be re-scored without simulating anything.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from trapbench.graph import Graph, MeasurementPattern, standard_grid_flow
from trapbench.protocol.client import run_ubqc
from trapbench.protocol.devices import Device
from trapbench.protocol.transcript import COMPUTATION, TRAP, RoundTranscript
from trapbench.traps import TrapComputation, TrapDistribution, check_trap, sample_trap

log = logging.getLogger(__name__)

EXPONENT_MODES = ("hoeffding_n", "paper_n3")
ACC, REJ = "acc", "rej"


@dataclass(frozen=True)
class BenchmarkConfig:
    n: int = 50
    m: int = 20
    beta: float = 0.05
    beta_t: float = 0.02
    c_t: float = 0.2
    omega: float = 0.2
    trap_fraction: float = 0.5
    exponent_mode: str = "hoeffding_n"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be at least 1")
        for name in ("beta", "beta_t", "c_t", "omega", "trap_fraction"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name}={value} must lie strictly between 0 and 1")
        if self.exponent_mode not in EXPONENT_MODES:
            raise ValueError(f"exponent_mode must be one of {EXPONENT_MODES}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class BenchmarkResult:
    mode: str
    exponent_mode: str
    accepted_count: int = 0
    activated_count: int = 0
    rounds: int = 0
    z: float | None = None
    z_t: float | None = None
    gamma: float | None = None
    z_fail: float | None = None
    verdict: str | None = None
    ledger: list[dict[str, Any]] = field(default_factory=list)
    transcripts: list[RoundTranscript] = field(default_factory=list, repr=False)

    def summary(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "exponent_mode": self.exponent_mode,
            "accepted_count": self.accepted_count,
            "activated_count": self.activated_count,
            "rounds": self.rounds,
            "z": self.z,
            "z_t": self.z_t,
            "gamma": self.gamma,
            "z_fail": self.z_fail,
            "verdict": self.verdict,
        }


# -- bounds -----------------------------------------------------------------


def hoeffding_tail(trials: int, t: float) -> float:
    """exp(-2 trials t^2): chance that the mean of ``trials`` coin flips exceeds its bias by t."""
    if t < 0:
        raise ValueError("deviation must be non-negative")
    return math.exp(-2.0 * trials * t * t)


def gamma_confidence(m: int, n: int, beta_t: float) -> float:
    return hoeffding_tail(m * n, beta_t)


def gamma_generic(m: int, beta: float) -> float:
    return hoeffding_tail(m, beta)


def success_lower_bound(z_t: float, c_t: float, n: int, mode: str = "hoeffding_n") -> float:
    """Lower bound on the acceptance probability of an n-round run, given trap-rate bound z_t < c_t.

    ``hoeffding_n`` uses the exponent -2 n (c_t - z_t)^2 that Hoeffding gives
    for n rounds; ``paper_n3`` uses -2 n^3 (c_t - z_t)^2.
    """
    if z_t >= c_t:
        raise ValueError(f"z_t={z_t} must be below c_t={c_t}")
    gap = c_t - z_t
    if mode == "hoeffding_n":
        exponent = 2.0 * n * gap * gap
    elif mode == "paper_n3":
        exponent = 2.0 * n**3 * gap * gap
    else:
        raise ValueError(f"unknown exponent mode {mode!r}")
    return 1.0 - math.exp(-exponent)


def _below(count: int, total: int, threshold: float) -> bool:
    """count < threshold * total, evaluated on the decimal value of ``threshold``."""
    return Fraction(count) < Fraction(repr(threshold)) * total


# -- scoring ----------------------------------------------------------------


def generic_score(accepted: int, m: int, beta: float) -> tuple[float, float]:
    """(z, gamma) with z = #acc/m - beta clipped at 0."""
    return max(0.0, accepted / m - beta), gamma_generic(m, beta)


def optimized_score(activated: int, m: int, n: int, beta_t: float, c_t: float, mode: str) -> tuple[float, float, float]:
    """(z, z_t, gamma) for the all-trap benchmark."""
    z_t = activated / (m * n) + beta_t
    z = success_lower_bound(z_t, c_t, n, mode) if z_t < c_t else 0.0
    return z, z_t, gamma_confidence(m, n, beta_t)


def protocol1_score(failed: int, n: int, omega: float) -> tuple[float, str]:
    return failed / n, "Accept" if _below(failed, n, omega) else "Reject"


def majority_vote(outputs: Sequence[tuple[int, ...] | None]) -> tuple[int, ...] | None:
    """Bitwise strict majority over computation rounds.

    Aborted rounds (None) count against every candidate; a tie on any bit,
    or no rounds at all, gives None.
    """
    if not outputs:
        return None
    width = next((len(o) for o in outputs if o is not None), None)
    if width is None:
        return None
    total = len(outputs)
    result = []
    for k in range(width):
        ones = sum(1 for o in outputs if o is not None and o[k] == 1)
        zeros = sum(1 for o in outputs if o is not None and o[k] == 0)
        if 2 * ones > total:
            result.append(1)
        elif 2 * zeros > total:
            result.append(0)
        else:
            return None
    return tuple(result)


def vbqc_decision(rounds: Sequence[RoundTranscript], n: int, c_t: float) -> tuple[tuple[int, ...] | None, str, int]:
    """(result, flag, activated) of one verification run from its transcripts."""
    activated = sum(1 for r in rounds if r.kind == TRAP and r.verdict != "pass")
    votes = [r.result for r in rounds if r.kind == COMPUTATION]
    result = majority_vote(votes)
    flag = ACC if (_below(activated, n, c_t) and result is not None) else REJ
    return result, flag, activated


# -- runners ----------------------------------------------------------------


def _round_rngs(seed_seq: np.random.SeedSequence, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in seed_seq.spawn(count)]


def _trap_round(graph: Graph, dist: TrapDistribution, device: Device, rng: np.random.Generator, flow, round_id: int) -> RoundTranscript:
    trap = sample_trap(graph, dist, rng)
    _, tr = run_ubqc(trap, device, rng, flow=flow, round_id=round_id)
    return tr


def run_robust_vbqc(
    pattern: MeasurementPattern,
    config: BenchmarkConfig,
    device: Device,
    rng: np.random.Generator | np.random.SeedSequence | int | None = None,
    dist: TrapDistribution | None = None,
    repetition: int = 0,
) -> tuple[tuple[int, ...] | None, str, list[RoundTranscript]]:
    """n rounds of blind delegation on the pattern's graph, each a trap with probability ``trap_fraction``.

    Accepts iff fewer than c_t*n traps activate and the computation rounds
    have a strict bitwise majority.
    """
    dist = dist or TrapDistribution()
    seq = _seed_seq(rng, config.seed)
    rounds = []
    for i, r_rng in enumerate(_round_rngs(seq, config.n)):
        if r_rng.random() < config.trap_fraction:
            tr = _trap_round(pattern.graph, dist, device, r_rng, pattern.flow, i)
        else:
            _, tr = run_ubqc(pattern, device, r_rng, round_id=i)
        tr.repetition = repetition
        rounds.append(tr)
    result, flag, _ = vbqc_decision(rounds, config.n, config.c_t)
    return result, flag, rounds


def _seed_seq(rng: Any, fallback: int) -> np.random.SeedSequence:
    if isinstance(rng, np.random.SeedSequence):
        return rng
    if isinstance(rng, np.random.Generator):
        return np.random.SeedSequence(int(rng.integers(2**63)))
    return np.random.SeedSequence(fallback if rng is None else int(rng))


Verifier = Callable[[int, np.random.SeedSequence], tuple[Any, str, list[RoundTranscript]]]


def run_generic_cicc(
    pattern: MeasurementPattern,
    config: BenchmarkConfig,
    device: Device,
    dist: TrapDistribution | None = None,
    expected: tuple[int, ...] | None = None,
    verifier: Verifier | None = None,
) -> BenchmarkResult:
    """Repeat the verification run m times and report z = #acc/m - beta.

    ``verifier(repetition, seed_seq)`` replaces the robust VBQC run when
    given.  With ``expected`` set, the ledger marks each run correct/wrong.
    """
    if verifier is None:
        def verifier(rep: int, seq: np.random.SeedSequence):
            return run_robust_vbqc(pattern, config, device, seq, dist, rep)

    out = BenchmarkResult("generic", config.exponent_mode)
    for rep, seq in enumerate(np.random.SeedSequence(config.seed).spawn(config.m)):
        result, flag, rounds = verifier(rep, seq)
        out.transcripts.extend(rounds)
        out.ledger.append(_ledger_row(rep, result, flag, rounds, expected))
    _finish_generic(out, config)
    return out


def _ledger_row(rep: int, result, flag: str, rounds: Sequence[RoundTranscript], expected) -> dict[str, Any]:
    return {
        "repetition": rep,
        "flag": flag,
        "result": None if result is None else list(result),
        "activated": sum(1 for r in rounds if r.kind == TRAP and r.verdict != "pass"),
        "traps": sum(1 for r in rounds if r.kind == TRAP),
        "correct": None if expected is None or result is None else tuple(result) == tuple(expected),
    }


def _finish_generic(out: BenchmarkResult, config: BenchmarkConfig) -> None:
    out.accepted_count = sum(1 for row in out.ledger if row["flag"] == ACC)
    out.activated_count = sum(row["activated"] for row in out.ledger)
    out.rounds = len(out.transcripts)
    out.z, out.gamma = generic_score(out.accepted_count, config.m, config.beta)
    out.verdict = "Accept" if out.z > 0 else "Reject"


def run_optimized_cicc(
    graph: Graph,
    config: BenchmarkConfig,
    device: Device,
    dist: TrapDistribution | None = None,
) -> BenchmarkResult:
    """Spend every one of the m*n rounds on a trap and bound acceptance from the activation count."""
    dist = dist or TrapDistribution()
    flow = standard_grid_flow(graph) if graph.shape else None
    out = BenchmarkResult("optimized", config.exponent_mode)
    for rep, seq in enumerate(np.random.SeedSequence(config.seed).spawn(config.m)):
        for i, r_rng in enumerate(_round_rngs(seq, config.n)):
            tr = _trap_round(graph, dist, device, r_rng, flow, i)
            tr.repetition = rep
            out.transcripts.append(tr)
    _finish_optimized(out, config)
    return out


def _finish_optimized(out: BenchmarkResult, config: BenchmarkConfig) -> None:
    out.rounds = len(out.transcripts)
    out.activated_count = sum(1 for r in out.transcripts if r.verdict != "pass")
    out.z, out.z_t, out.gamma = optimized_score(
        out.activated_count, config.m, config.n, config.beta_t, config.c_t, config.exponent_mode
    )
    out.verdict = "Accept" if out.z > 0 else "Reject"


def warn_omega(omega: float) -> None:
    if omega >= 0.25:
        log.warning("omega=%s is not below 1/4: the soundness guarantee of the trap test does not apply", omega)


def run_protocol1(
    graph: Graph,
    dist: TrapDistribution | None,
    n: int,
    omega: float,
    device: Device,
    rng: np.random.Generator | np.random.SeedSequence | int | None = None,
) -> BenchmarkResult:
    """n blind trap rounds; Accept iff the failed fraction z_fail is below omega."""
    warn_omega(omega)
    dist = dist or TrapDistribution()
    flow = standard_grid_flow(graph) if graph.shape else None
    out = BenchmarkResult("protocol1", "hoeffding_n")
    for i, r_rng in enumerate(_round_rngs(_seed_seq(rng, 0), n)):
        out.transcripts.append(_trap_round(graph, dist, device, r_rng, flow, i))
    _finish_protocol1(out, n, omega)
    return out


def _finish_protocol1(out: BenchmarkResult, n: int, omega: float) -> None:
    out.rounds = len(out.transcripts)
    out.activated_count = sum(1 for r in out.transcripts if r.verdict != "pass")
    out.z_fail, out.verdict = protocol1_score(out.activated_count, n, omega)


# -- offline re-scoring -------------------------------------------------------


def rescore_verdicts(graph: Graph, rounds: Sequence[RoundTranscript]) -> None:
    """Recompute every trap verdict and computation result from the raw records."""
    for tr in rounds:
        if tr.kind == TRAP:
            if tr.trap is None:
                raise ValueError(f"trap round {tr.round_id} has no trap description")
            trap = TrapComputation.from_dict(graph, tr.trap)
            if trap.expected_parity != tr.trap["expected_parity"]:
                raise ValueError(f"trap round {tr.round_id}: recorded expected parity disagrees")
            tr.verdict = check_trap(trap, tr)
        elif tr.kind == COMPUTATION:
            if tr.aborted:
                tr.result = None
            else:
                unblinded = tr.unblinded()
                outputs = sorted(graph.outputs)
                if any(o not in unblinded for o in outputs):
                    raise ValueError(f"computation round {tr.round_id} is missing output outcomes")
                tr.result = tuple(unblinded[o] for o in outputs)
        else:
            raise ValueError(f"unknown round kind {tr.kind!r}")


def rescore(
    mode: str,
    graph: Graph,
    config: BenchmarkConfig,
    rounds: Sequence[RoundTranscript],
    expected: tuple[int, ...] | None = None,
) -> BenchmarkResult:
    """Rebuild a BenchmarkResult from stored transcripts alone."""
    rounds = list(rounds)
    rescore_verdicts(graph, rounds)
    if mode == "protocol1":
        _require(len(rounds) == config.n, f"expected {config.n} rounds, found {len(rounds)}")
        out = BenchmarkResult("protocol1", "hoeffding_n", transcripts=rounds)
        _finish_protocol1(out, config.n, config.omega)
        return out
    _require(len(rounds) == config.m * config.n, f"expected {config.m * config.n} rounds, found {len(rounds)}")
    by_rep: dict[int, list[RoundTranscript]] = {}
    for tr in rounds:
        by_rep.setdefault(tr.repetition, []).append(tr)
    _require(sorted(by_rep) == list(range(config.m)), "repetition indices are incomplete")
    if mode == "optimized":
        _require(all(tr.kind == TRAP for tr in rounds), "optimized transcripts must contain trap rounds only")
        out = BenchmarkResult("optimized", config.exponent_mode, transcripts=rounds)
        _finish_optimized(out, config)
        return out
    if mode == "generic":
        out = BenchmarkResult("generic", config.exponent_mode, transcripts=rounds)
        for rep in range(config.m):
            rep_rounds = by_rep[rep]
            _require(len(rep_rounds) == config.n, f"repetition {rep} has {len(rep_rounds)} rounds")
            result, flag, _ = vbqc_decision(rep_rounds, config.n, config.c_t)
            out.ledger.append(_ledger_row(rep, result, flag, rep_rounds, expected))
        _finish_generic(out, config)
        return out
    raise ValueError(f"unknown benchmark mode {mode!r}")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


def acceptance_decomposition(ledger: Sequence[Mapping[str, Any]]) -> dict[str, int]:
    """Counts of accepted, accepted-and-correct and accepted-and-wrong runs."""
    acc = [row for row in ledger if row["flag"] == ACC]
    return {
        "acc": len(acc),
        "acc_correct": sum(1 for row in acc if row["correct"] is True),
        "acc_wrong": sum(1 for row in acc if row["correct"] is False),
        "acc_unknown": sum(1 for row in acc if row["correct"] is None),
    }
