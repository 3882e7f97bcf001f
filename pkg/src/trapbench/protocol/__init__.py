from trapbench.protocol.client import (
    deterministic_output,
    mbqc_phi_prime,
    pattern_distribution,
    run_mbqc,
    run_ubqc,
    ubqc_delta,
)
from trapbench.protocol.devices import (
    STRATEGIES,
    AdversarialDevice,
    Device,
    HonestDevice,
    Preparation,
    ProtocolViolation,
    SimulatedDevice,
)
from trapbench.protocol.transcript import RoundTranscript, VertexRecord, read_transcripts, write_transcripts

__all__ = [
    "STRATEGIES",
    "AdversarialDevice",
    "Device",
    "HonestDevice",
    "Preparation",
    "ProtocolViolation",
    "RoundTranscript",
    "SimulatedDevice",
    "VertexRecord",
    "deterministic_output",
    "mbqc_phi_prime",
    "pattern_distribution",
    "read_transcripts",
    "run_mbqc",
    "run_ubqc",
    "ubqc_delta",
    "write_transcripts",
]
