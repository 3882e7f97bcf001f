"""Trap-based benchmarking of black-box quantum devices through blind delegated MBQC."""

__version__ = "0.1.0"
