"""Layered threshold circuits over boolean variables.

A gate fires when a weighted sum of its inputs reaches an integer threshold.
Weights are positive integers, so every gate (and every circuit built from
them) is monotone.  Circuits are organized in layers: gates in layer 1 read
the input variables, gates in layer d read the outputs of layer d-1, and a
single designated top gate produces the circuit output.

Index conventions.  Gate input references are 0-based positions into the
layer below (for layer 1, position i means variable number i+1).  Variable
numbers in the public API and in the text format are 1-based, matching the
usual x1..xn naming.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

MAX_VARS = 10**6


class CircuitError(ValueError):
    """A structurally invalid gate or circuit."""


class CircuitParseError(CircuitError):
    """Unparseable circuit text; carries the offending 1-based line number."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


def standard_theta(fanin: int) -> int:
    """Threshold of a standard majority gate: least integer >= fanin/2."""
    return (fanin + 1) // 2


def majority_threshold(n: int) -> int:
    """Number of ones needed for the n-bit majority function to output 1."""
    return (n + 1) // 2


@dataclass(frozen=True)
class ThresholdGate:
    """[sum of weight*input >= theta] over distinct input positions.

    ``inputs`` holds (position, weight) pairs; positions are 0-based indices
    into the layer below and may not repeat (a repeat is expressed by its
    weight).  theta may be any integer: theta <= 0 gives a constant-1 gate
    and theta > fanin a constant-0 gate, both occasionally useful as
    degenerate cases.
    """

    inputs: tuple[tuple[int, int], ...]
    theta: int

    def __post_init__(self):
        inputs = tuple(sorted((int(p), int(w)) for p, w in self.inputs))
        if not inputs:
            raise CircuitError("gate has no inputs")
        seen = set()
        for p, w in inputs:
            if p < 0:
                raise CircuitError(f"negative input position {p}")
            if p in seen:
                raise CircuitError(f"duplicate input position {p}")
            seen.add(p)
            if w < 1:
                raise CircuitError(f"non-positive weight {w} on position {p}")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "theta", int(self.theta))

    @property
    def fanin(self) -> int:
        """Total fan-in counting weights (a weight-w wire counts w times)."""
        return sum(w for _, w in self.inputs)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.inputs)

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(w for _, w in self.inputs)

    @property
    def max_weight(self) -> int:
        return max(w for _, w in self.inputs)

    def is_standard(self) -> bool:
        return self.theta == standard_theta(self.fanin)


def majority_gate(refs: Iterable[int]) -> ThresholdGate:
    """Standard majority over a multiset of 0-based positions.

    Repeated positions turn into weights, and the threshold is the standard
    one for the total fan-in (multiplicities included).
    """
    counts: dict[int, int] = {}
    for r in refs:
        counts[r] = counts.get(r, 0) + 1
    fanin = sum(counts.values())
    return ThresholdGate(tuple(sorted(counts.items())), standard_theta(fanin))


def majority_gate_over_vars(var_ids: Iterable[int]) -> ThresholdGate:
    """Like majority_gate but takes 1-based variable numbers."""
    return majority_gate(v - 1 for v in var_ids)


@dataclass(frozen=True)
class Assignment:
    """An immutable 0/1 assignment to x1..xn; bits[i] is the value of x(i+1)."""

    bits: tuple[int, ...]
    weight: int = field(init=False, compare=False)

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("assignment bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "weight", sum(bits))

    @property
    def n(self) -> int:
        return len(self.bits)

    @classmethod
    def zeros(cls, n: int) -> "Assignment":
        return cls((0,) * n)

    @classmethod
    def from_ones(cls, n: int, ones: Iterable[int]) -> "Assignment":
        """Build from 1-based positions of the one-bits."""
        bits = [0] * n
        for i in ones:
            if not 1 <= i <= n:
                raise IndexError(f"variable index {i} out of range 1..{n}")
            bits[i - 1] = 1
        return cls(tuple(bits))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


def flip(a: Assignment, i: int) -> Assignment:
    """Return a with variable xi toggled (i is 1-based)."""
    if not 1 <= i <= a.n:
        raise IndexError(f"variable index {i} out of range 1..{a.n}")
    bits = list(a.bits)
    bits[i - 1] ^= 1
    return Assignment(tuple(bits))


def majority_value(a: Assignment) -> int:
    """The majority function itself: 1 iff at least half the bits are ones."""
    return int(a.weight >= majority_threshold(a.n))


def majority_diff(a: Assignment) -> int:
    """Signed margin of the majority function, weight minus its threshold."""
    return a.weight - majority_threshold(a.n)


def gate_diff(gate: ThresholdGate, values: Sequence[int]) -> int:
    """Signed margin of a gate: weighted input sum minus theta.

    values is indexed by input position (the layer below).  The gate fires
    exactly when the returned margin is >= 0.
    """
    return sum(w * values[p] for p, w in gate.inputs) - gate.theta


def eval_gate(gate: ThresholdGate, values: Sequence[int]) -> int:
    return int(gate_diff(gate, values) >= 0)


@dataclass(frozen=True)
class LayeredCircuit:
    """A depth-1..3 layered threshold circuit with a declared fan-in bound k.

    layers[0] reads the n input variables; layers[d] reads layers[d-1].
    ``top`` is an index into the last layer.  Every gate must respect the
    fan-in bound (weighted), and every input reference must resolve in the
    layer directly below.
    """

    n: int
    k: int
    layers: tuple[tuple[ThresholdGate, ...], ...]
    top: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_VARS:
            raise CircuitError(f"variable count {self.n} out of range 1..{MAX_VARS}")
        if self.k < 1:
            raise CircuitError(f"fan-in bound {self.k} must be positive")
        layers = tuple(tuple(layer) for layer in self.layers)
        if not 1 <= len(layers) <= 3:
            raise CircuitError(f"depth {len(layers)} out of range 1..3")
        width_below = self.n
        for d, layer in enumerate(layers, start=1):
            if not layer:
                raise CircuitError(f"layer {d} is empty")
            for g, gate in enumerate(layer):
                if gate.fanin > self.k:
                    raise CircuitError(
                        f"gate {d}:{g} fan-in {gate.fanin} exceeds bound k={self.k}"
                    )
                hi = gate.support[-1]
                if hi >= width_below:
                    raise CircuitError(
                        f"gate {d}:{g} references position {hi} but layer below "
                        f"has width {width_below}"
                    )
            width_below = len(layer)
        if not 0 <= self.top < len(layers[-1]):
            raise CircuitError(f"top index {self.top} out of range for last layer")
        object.__setattr__(self, "layers", layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def top_gate(self) -> ThresholdGate:
        return self.layers[-1][self.top]

    def gates(self) -> Iterator[tuple[int, int, ThresholdGate]]:
        """Yield (layer number 1-based, index in layer, gate)."""
        for d, layer in enumerate(self.layers, start=1):
            for g, gate in enumerate(layer):
                yield d, g, gate


@dataclass(frozen=True)
class CircuitStats:
    n: int
    k: int
    depth: int
    gate_count: int
    max_fanin: int
    max_weight: int
    all_standard: bool


def inspect_circuit(c: LayeredCircuit) -> CircuitStats:
    gates = [g for _, _, g in c.gates()]
    return CircuitStats(
        n=c.n,
        k=c.k,
        depth=c.depth,
        gate_count=len(gates),
        max_fanin=max(g.fanin for g in gates),
        max_weight=max(g.max_weight for g in gates),
        all_standard=all(g.is_standard() for g in gates),
    )


def eval_layers(c: LayeredCircuit, a: Assignment) -> list[tuple[int, ...]]:
    """Evaluate every gate, returning one output tuple per layer."""
    if a.n != c.n:
        raise ValueError(f"assignment has {a.n} bits, circuit expects {c.n}")
    values: Sequence[int] = a.bits
    out: list[tuple[int, ...]] = []
    for layer in c.layers:
        values = tuple(eval_gate(g, values) for g in layer)
        out.append(values)
    return out


def eval_circuit(c: LayeredCircuit, a: Assignment) -> int:
    return eval_layers(c, a)[-1][c.top]


# ---------------------------------------------------------------------------
# Text format
#
#   majcirc 1
#   n 7 k 5 depth 2
#   gate 1:0 theta 3 : x1*1 x2*1 x3*1 x4*1 x5*1
#   gate 2:0 theta 3 : g1:0*1 g1:1*1 g1:2*1 g1:3*1 g1:4*1
#   top g2:0
#
# One construct per line; '#' starts a comment.  Gate ids are arbitrary
# integers unique within their layer and are remapped to positional indices
# in file order.  References name either variables (x<i>, 1-based) for layer
# 1 or gates of the layer directly below (g<layer-1>:<id>).  Weights are
# explicit, and a reference may appear at most once per gate line.
# ---------------------------------------------------------------------------

_MAGIC = "majcirc 1"
_REF_RE = re.compile(r"^(x(\d+)|g(\d+):(\d+))\*(-?\d+)$")


def serialize_circuit(c: LayeredCircuit) -> str:
    lines = [_MAGIC, f"n {c.n} k {c.k} depth {c.depth}"]
    for d, layer in enumerate(c.layers, start=1):
        for g, gate in enumerate(layer):
            refs = " ".join(
                (f"x{p + 1}*{w}" if d == 1 else f"g{d - 1}:{p}*{w}")
                for p, w in gate.inputs
            )
            lines.append(f"gate {d}:{g} theta {gate.theta} : {refs}")
    lines.append(f"top g{c.depth}:{c.top}")
    return "\n".join(lines) + "\n"


def _parse_header(line_no: int, line: str) -> tuple[int, int, int]:
    m = re.fullmatch(r"n (\d+) k (\d+) depth (\d+)", line)
    if not m:
        raise CircuitParseError(line_no, f"bad header {line!r}")
    return int(m.group(1)), int(m.group(2)), int(m.group(3))


def parse_circuit(text: str) -> LayeredCircuit:
    """Parse the text format back into a circuit.

    Raises CircuitParseError with a line number for malformed input, and
    CircuitError for structurally invalid but well-formed text.
    """
    lines: list[tuple[int, str]] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append((no, stripped))
    if not lines:
        raise CircuitParseError(1, "empty input")
    no, magic = lines[0]
    if magic != _MAGIC:
        raise CircuitParseError(no, f"expected {_MAGIC!r}, got {magic!r}")
    if len(lines) < 2:
        raise CircuitParseError(no, "missing header line")
    n, k, depth = _parse_header(*lines[1])
    if depth < 1:
        raise CircuitParseError(lines[1][0], "depth must be at least 1")

    # First pass: collect raw gate lines so declaration order within the
    # file does not matter across layers.
    gate_rows: dict[int, list[tuple[int, int, int, str]]] = {d: [] for d in range(1, depth + 1)}
    top_ref: tuple[int, int, int] | None = None
    for no, line in lines[2:]:
        if line.startswith("gate "):
            m = re.fullmatch(r"gate (\d+):(\d+) theta (-?\d+) : (.*)", line)
            if not m:
                raise CircuitParseError(no, f"bad gate line {line!r}")
            d, gid, theta = int(m.group(1)), int(m.group(2)), int(m.group(3))
            if not 1 <= d <= depth:
                raise CircuitParseError(no, f"gate layer {d} out of range 1..{depth}")
            if any(gid == existing for _, existing, _, _ in gate_rows[d]):
                raise CircuitParseError(no, f"duplicate gate id {d}:{gid}")
            gate_rows[d].append((no, gid, theta, m.group(4)))
        elif line.startswith("top "):
            m = re.fullmatch(r"top g(\d+):(\d+)", line)
            if not m:
                raise CircuitParseError(no, f"bad top line {line!r}")
            if top_ref is not None:
                raise CircuitParseError(no, "duplicate top line")
            top_ref = (no, int(m.group(1)), int(m.group(2)))
        else:
            raise CircuitParseError(no, f"unrecognized line {line!r}")

    # Second pass: resolve ids to positional indices layer by layer.
    layers: list[tuple[ThresholdGate, ...]] = []
    id_maps: dict[int, dict[int, int]] = {}
    for d in range(1, depth + 1):
        rows = gate_rows[d]
        if not rows:
            raise CircuitParseError(lines[1][0], f"layer {d} has no gates")
        id_maps[d] = {gid: pos for pos, (_, gid, _, _) in enumerate(rows)}
        gates = []
        for no, gid, theta, body in rows:
            inputs: list[tuple[int, int]] = []
            seen: set[int] = set()
            for tok in body.split():
                m = _REF_RE.fullmatch(tok)
                if not m:
                    raise CircuitParseError(no, f"bad input reference {tok!r}")
                w = int(m.group(5))
                if w < 1:
                    raise CircuitParseError(no, f"bad weight {w} in {tok!r}")
                if m.group(2) is not None:
                    if d != 1:
                        raise CircuitParseError(
                            no, f"layer {d} gate may only reference layer {d - 1} gates"
                        )
                    v = int(m.group(2))
                    if not 1 <= v <= n:
                        raise CircuitParseError(no, f"variable x{v} out of range 1..{n}")
                    pos = v - 1
                else:
                    ref_layer = int(m.group(3))
                    if d == 1:
                        raise CircuitParseError(no, "layer 1 gate may only reference variables")
                    if ref_layer != d - 1:
                        raise CircuitParseError(
                            no, f"layer {d} gate may only reference layer {d - 1} gates"
                        )
                    ref_id = int(m.group(4))
                    if ref_id not in id_maps[d - 1]:
                        raise CircuitParseError(no, f"dangling reference g{ref_layer}:{ref_id}")
                    pos = id_maps[d - 1][ref_id]
                if pos in seen:
                    raise CircuitParseError(no, f"repeated reference {tok!r} in one gate")
                seen.add(pos)
                inputs.append((pos, w))
            if not inputs:
                raise CircuitParseError(no, "gate has no inputs")
            gates.append(ThresholdGate(tuple(inputs), theta))
        layers.append(tuple(gates))

    if top_ref is None:
        raise CircuitParseError(lines[-1][0], "missing top line")
    no, top_layer, top_id = top_ref
    if top_layer != depth:
        raise CircuitParseError(no, f"top must name a layer {depth} gate")
    if top_id not in id_maps[depth]:
        raise CircuitParseError(no, f"dangling top reference g{top_layer}:{top_id}")
    return LayeredCircuit(n=n, k=k, layers=tuple(layers), top=id_maps[depth][top_id])


def circuit_function(c: LayeredCircuit) -> Callable[[Assignment], int]:
    """Convenience closure form of eval_circuit."""
    return lambda a: eval_circuit(c, a)
