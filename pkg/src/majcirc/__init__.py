"""Bounded fan-in majority-of-majorities circuits: build, verify, search, analyze."""

from .core import (
    Assignment,
    CircuitError,
    CircuitParseError,
    LayeredCircuit,
    ThresholdGate,
    eval_circuit,
    eval_gate,
    flip,
    gate_diff,
    majority_value,
    parse_circuit,
    serialize_circuit,
)

__all__ = [
    "Assignment",
    "CircuitError",
    "CircuitParseError",
    "LayeredCircuit",
    "ThresholdGate",
    "eval_circuit",
    "eval_gate",
    "flip",
    "gate_diff",
    "majority_value",
    "parse_circuit",
    "serialize_circuit",
]

__version__ = "0.1.0"
