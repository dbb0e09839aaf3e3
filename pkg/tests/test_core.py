"""Gate evaluation, circuit evaluation, and the text format."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from majcirc.core import (
    Assignment,
    CircuitError,
    CircuitParseError,
    LayeredCircuit,
    ThresholdGate,
    circuit_function,
    eval_circuit,
    eval_gate,
    eval_layers,
    flip,
    gate_diff,
    inspect_circuit,
    majority_diff,
    majority_gate,
    majority_gate_over_vars,
    majority_threshold,
    majority_value,
    parse_circuit,
    serialize_circuit,
    standard_theta,
)
from majcirc.construct import published_circuit, published_rows


def brute_eval(c: LayeredCircuit, a: Assignment) -> int:
    """Gate-by-gate reference evaluation, written independently of eval_*."""
    values = list(a.bits)
    for layer in c.layers:
        nxt = []
        for g in layer:
            s = 0
            for pos, w in g.inputs:
                s += w * values[pos]
            nxt.append(1 if s >= g.theta else 0)
        values = nxt
    return values[c.top]


# -- thresholds and the majority function -----------------------------------


@pytest.mark.parametrize(
    "fanin,theta", [(1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (6, 3), (7, 4)]
)
def test_standard_theta(fanin, theta):
    assert standard_theta(fanin) == theta


def test_majority_threshold_matches_standard_theta():
    for n in range(1, 40):
        assert majority_threshold(n) == standard_theta(n)


def test_majority_value_examples():
    assert majority_value(Assignment((1, 0, 1))) == 1
    assert majority_value(Assignment((1, 0, 0))) == 0
    assert majority_value(Assignment((1, 1, 0, 0))) == 1  # ties round up
    assert majority_value(Assignment((1, 0, 0, 0))) == 0
    assert majority_value(Assignment((0,))) == 0
    assert majority_value(Assignment((1,))) == 1


@given(st.lists(st.integers(0, 1), min_size=1, max_size=64))
def test_majority_diff_sign_agrees_with_value(bits):
    a = Assignment(tuple(bits))
    assert majority_value(a) == int(majority_diff(a) >= 0)
    assert majority_diff(a) == a.weight - (a.n + 1) // 2


# -- assignments -------------------------------------------------------------


def test_assignment_basics():
    a = Assignment((1, 0, 1, 1))
    assert a.n == 4
    assert a.weight == 3
    assert str(a) == "1011"
    assert Assignment.zeros(3) == Assignment((0, 0, 0))
    assert Assignment.from_ones(5, [2, 5]) == Assignment((0, 1, 0, 0, 1))


def test_assignment_rejects_non_bits():
    with pytest.raises(ValueError):
        Assignment((0, 2, 0))
    with pytest.raises(IndexError):
        Assignment.from_ones(3, [4])


def test_flip_examples():
    a = Assignment((1, 0, 1))
    assert flip(a, 2) == Assignment((1, 1, 1))
    assert flip(a, 1) == Assignment((0, 0, 1))
    with pytest.raises(IndexError):
        flip(a, 0)
    with pytest.raises(IndexError):
        flip(a, 4)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=32), st.data())
def test_flip_is_an_involution_and_moves_weight_by_one(bits, data):
    a = Assignment(tuple(bits))
    i = data.draw(st.integers(1, a.n))
    b = flip(a, i)
    assert flip(b, i) == a
    assert abs(b.weight - a.weight) == 1
    assert b.weight - a.weight == (1 if a.bits[i - 1] == 0 else -1)


# -- single gates ------------------------------------------------------------


def test_eval_gate_majority3():
    g = majority_gate([0, 1, 2])
    assert g.theta == 2
    assert eval_gate(g, (1, 1, 0)) == 1
    assert eval_gate(g, (1, 0, 0)) == 0
    assert eval_gate(g, (0, 0, 0)) == 0
    assert eval_gate(g, (1, 1, 1)) == 1


def test_eval_gate_with_multiplicity():
    # the row 2 2 4 5 6 as a gate: x2 carries weight 2, theta is 3
    g = majority_gate_over_vars([2, 2, 4, 5, 6])
    assert g.inputs == ((1, 2), (3, 1), (4, 1), (5, 1))
    assert g.theta == 3
    values = [0] * 7
    values[1] = 1  # x2
    values[3] = 1  # x4
    assert eval_gate(g, values) == 1
    values[3] = 0
    assert eval_gate(g, values) == 0


def test_degenerate_thetas():
    g0 = ThresholdGate(((0, 1),), theta=0)
    assert eval_gate(g0, (0,)) == 1  # constant 1
    g_hi = ThresholdGate(((0, 1), (1, 1)), theta=3)
    assert eval_gate(g_hi, (1, 1)) == 0  # constant 0
    assert not g_hi.is_standard()


def test_gate_diff_examples():
    g = majority_gate([0, 1, 2])
    assert gate_diff(g, (1, 1, 0)) == 0
    assert gate_diff(g, (0, 0, 0)) == -2
    weighted = ThresholdGate(((0, 3), (1, 1)), theta=2)
    assert gate_diff(weighted, (0, 1)) == -1
    assert gate_diff(weighted, (1, 0)) == 1


@pytest.mark.parametrize("n", [1, 2, 3, 6, 7, 10, 15])
def test_gate_diff_on_all_ones(n):
    g = majority_gate(range(n))
    assert gate_diff(g, (1,) * n) == n - (n + 1) // 2


@given(
    st.lists(st.integers(1, 4), min_size=1, max_size=6),
    st.integers(-2, 8),
    st.data(),
)
def test_eval_gate_is_sign_of_diff(weights, theta, data):
    g = ThresholdGate(tuple(enumerate(weights)), theta)
    values = data.draw(
        st.lists(st.integers(0, 1), min_size=len(weights), max_size=len(weights))
    )
    assert eval_gate(g, values) == int(gate_diff(g, values) >= 0)


def test_gate_validation():
    with pytest.raises(CircuitError):
        ThresholdGate((), theta=1)
    with pytest.raises(CircuitError):
        ThresholdGate(((0, 1), (0, 1)), theta=1)  # duplicate position
    with pytest.raises(CircuitError):
        ThresholdGate(((0, 0),), theta=1)  # zero weight
    with pytest.raises(CircuitError):
        ThresholdGate(((-1, 1),), theta=1)


def test_gate_properties():
    g = majority_gate([4, 0, 0, 2])
    assert g.support == (0, 2, 4)
    assert g.weights == (2, 1, 1)
    assert g.fanin == 4
    assert g.max_weight == 2
    assert g.theta == 2
    assert g.is_standard()


# -- circuit evaluation ------------------------------------------------------


def test_eval_circuit_published_n7_spot_check():
    c = published_circuit("n7")
    a = Assignment((0, 0, 1, 1, 1, 1, 0))
    assert majority_value(a) == 1
    assert eval_circuit(c, a) == 1
    assert brute_eval(c, a) == 1


@pytest.mark.parametrize("tag", ["intro7", "n7"])
def test_eval_circuit_agrees_with_reference_everywhere(tag):
    c = published_circuit(tag)
    for bits in itertools.product((0, 1), repeat=7):
        a = Assignment(bits)
        assert eval_circuit(c, a) == brute_eval(c, a)


def test_eval_layers_by_hand():
    # two bottom gates, top takes the AND of them via theta = 2
    g1 = majority_gate([0, 1])  # x1 or x2 (theta 1)
    g2 = majority_gate([1, 2, 2])  # weight 2 on x3, theta 2
    top = ThresholdGate(((0, 1), (1, 1)), theta=2)
    c = LayeredCircuit(n=3, k=3, layers=((g1, g2), (top,)), top=0)
    layers = eval_layers(c, Assignment((0, 1, 1)))
    assert layers == [(1, 1), (1,)]
    layers = eval_layers(c, Assignment((1, 0, 0)))
    assert layers == [(1, 0), (0,)]


def test_eval_circuit_rejects_wrong_arity():
    c = published_circuit("n7")
    with pytest.raises(ValueError):
        eval_circuit(c, Assignment((1, 0, 1)))


def test_circuit_function_closure():
    c = published_circuit("n9")
    f = circuit_function(c)
    for bits in [(1,) * 9, (0,) * 9, (1, 0, 1, 0, 1, 0, 1, 0, 1)]:
        a = Assignment(bits)
        assert f(a) == eval_circuit(c, a)


# -- structural validation ---------------------------------------------------


def test_circuit_rejects_fanin_over_bound():
    gates = (majority_gate(range(4)),)
    with pytest.raises(CircuitError, match="fan-in"):
        LayeredCircuit(n=4, k=3, layers=(gates,), top=0)


def test_circuit_rejects_dangling_reference():
    g = majority_gate([0, 5])
    with pytest.raises(CircuitError, match="width"):
        LayeredCircuit(n=4, k=4, layers=((g,),), top=0)


def test_circuit_rejects_bad_top_and_empty_layer():
    g = majority_gate([0])
    with pytest.raises(CircuitError, match="top"):
        LayeredCircuit(n=1, k=1, layers=((g,),), top=1)
    with pytest.raises(CircuitError, match="empty"):
        LayeredCircuit(n=1, k=1, layers=((g,), ()), top=0)


def test_weighted_fanin_counts_toward_bound():
    g = ThresholdGate(((0, 3), (1, 1)), theta=2)
    assert g.fanin == 4
    with pytest.raises(CircuitError):
        LayeredCircuit(n=2, k=3, layers=((g,),), top=0)
    LayeredCircuit(n=2, k=4, layers=((g,),), top=0)  # fits exactly


def test_inspect_circuit_fields():
    c = published_circuit("n7")
    stats = inspect_circuit(c)
    assert stats.n == 7
    assert stats.k == 5
    assert stats.depth == 2
    assert stats.gate_count == 6  # five rows plus the top gate
    assert stats.max_fanin == 5
    assert stats.max_weight == 2  # repeated variables in two of the rows
    assert stats.all_standard


def test_inspect_circuit_flags_nonstandard():
    g = ThresholdGate(((0, 1), (1, 1), (2, 1)), theta=3)
    c = LayeredCircuit(n=3, k=3, layers=((g,),), top=0)
    stats = inspect_circuit(c)
    assert not stats.all_standard
    assert stats.gate_count == 1


# -- text format -------------------------------------------------------------


def test_serialize_round_trip_published():
    for tag in ["intro7", "n7", "n9", "n11"]:
        c = published_circuit(tag)
        assert parse_circuit(serialize_circuit(c)) == c


def test_serialized_text_shape():
    c = published_circuit("n7")
    lines = serialize_circuit(c).splitlines()
    assert lines[0] == "majcirc 1"
    assert lines[1] == "n 7 k 5 depth 2"
    assert lines[2].startswith("gate 1:0 theta 3 : x1*1")
    assert lines[-1] == "top g2:0"


def test_parse_accepts_comments_and_reordered_gates():
    text = """\
# hand-written majority of three
majcirc 1
n 3 k 3 depth 2
gate 2:7 theta 2 : g1:5*1 g1:9*1 g1:2*1   # top row first
gate 1:9 theta 2 : x1*1 x2*1 x3*1
gate 1:5 theta 1 : x2*1
gate 1:2 theta 3 : x1*1 x2*1 x3*1
top g2:7
"""
    c = parse_circuit(text)
    assert c.depth == 2
    # gate ids map to positions in file order: 9 -> 0, 5 -> 1, 2 -> 2
    assert c.layers[0][1].theta == 1
    assert c.layers[1][0].inputs == ((0, 1), (1, 1), (2, 1))
    for bits in itertools.product((0, 1), repeat=3):
        a = Assignment(bits)
        assert eval_circuit(c, a) == brute_eval(c, a)


@pytest.mark.parametrize(
    "text,line",
    [
        ("", 1),
        ("majcirc 2\nn 1 k 1 depth 1\ngate 1:0 theta 1 : x1*1\ntop g1:0\n", 1),
        ("majcirc 1\nn 1 k 1\ngate 1:0 theta 1 : x1*1\ntop g1:0\n", 2),
        ("majcirc 1\nn 1 k 1 depth 1\ngate 1:0 theta 1 : x2*1\ntop g1:0\n", 3),
        ("majcirc 1\nn 1 k 1 depth 1\ngate 1:0 theta 1 : x1*0\ntop g1:0\n", 3),
        ("majcirc 1\nn 1 k 1 depth 1\ngate 1:0 theta 1 : x1*1 x1*1\ntop g1:0\n", 3),
        ("majcirc 1\nn 1 k 1 depth 1\ngate 1:0 theta 1 : x1*1\ntop g1:3\n", 4),
        ("majcirc 1\nn 1 k 1 depth 1\ngate 1:0 theta 1 : x1*1\n", 3),
        ("majcirc 1\nn 2 k 2 depth 2\ngate 1:0 theta 1 : x1*1\n"
         "gate 2:0 theta 1 : g1:4*1\ntop g2:0\n", 4),
        ("majcirc 1\nn 1 k 1 depth 1\nwires 3\ngate 1:0 theta 1 : x1*1\ntop g1:0\n", 3),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(CircuitParseError) as err:
        parse_circuit(text)
    assert err.value.line == line


def test_parse_rejects_fanin_over_declared_bound():
    text = (
        "majcirc 1\nn 4 k 3 depth 1\n"
        "gate 1:0 theta 2 : x1*1 x2*1 x3*1 x4*1\ntop g1:0\n"
    )
    with pytest.raises(CircuitError, match="fan-in"):
        parse_circuit(text)


def test_parse_rejects_cross_layer_reference():
    text = (
        "majcirc 1\nn 2 k 2 depth 2\n"
        "gate 1:0 theta 1 : x1*1\n"
        "gate 2:0 theta 1 : x2*1\ntop g2:0\n"
    )
    with pytest.raises(CircuitParseError):
        parse_circuit(text)


def gate_strategy(width: int, k: int):
    """Random gates over a layer of the given width, fan-in at most k."""
    return st.lists(
        st.tuples(st.integers(0, width - 1), st.integers(1, 3)),
        min_size=1,
        max_size=min(width, k),
        unique_by=lambda pw: pw[0],
    ).flatmap(
        lambda inputs: st.builds(
            ThresholdGate,
            st.just(tuple(inputs)),
            st.integers(0, sum(w for _, w in inputs) + 1),
        )
        if sum(w for _, w in inputs) <= k
        else st.nothing()
    )


@st.composite
def circuit_strategy(draw):
    n = draw(st.integers(1, 5))
    k = draw(st.integers(2, 6))
    depth = draw(st.integers(1, 3))
    layers = []
    width = n
    for _ in range(depth):
        size = draw(st.integers(1, 4))
        layers.append(tuple(draw(gate_strategy(width, k)) for _ in range(size)))
        width = size
    top = draw(st.integers(0, len(layers[-1]) - 1))
    return LayeredCircuit(n=n, k=k, layers=tuple(layers), top=top)


@settings(max_examples=60, deadline=None)
@given(circuit_strategy())
def test_round_trip_random_circuits(c):
    assert parse_circuit(serialize_circuit(c)) == c


@settings(max_examples=40, deadline=None)
@given(circuit_strategy(), st.data())
def test_monotone_on_comparable_inputs(c, data):
    """Flipping a zero to a one never turns the output off."""
    bits = data.draw(st.lists(st.integers(0, 1), min_size=c.n, max_size=c.n))
    a = Assignment(tuple(bits))
    lo = eval_circuit(c, a)
    zero_positions = [i + 1 for i, b in enumerate(a.bits) if b == 0]
    if not zero_positions:
        return
    i = data.draw(st.sampled_from(zero_positions))
    assert eval_circuit(c, flip(a, i)) >= lo


def test_published_rows_are_immutable_views():
    rows = published_rows("n7")
    assert isinstance(rows, tuple)
    assert all(isinstance(r, tuple) for r in rows)
    with pytest.raises(ValueError, match="unknown circuit tag"):
        published_rows("n8")
