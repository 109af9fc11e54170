"""Round-trips for matrices, hypergraphs, colorings, and report documents."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import hypercolor as hc
from hypercolor.serialize import (
    canonical_json,
    coloring_from_text,
    coloring_to_text,
    hypergraph_from_text,
    hypergraph_to_text,
    matrix_from_csv,
    matrix_from_json_dict,
    matrix_to_csv,
    matrix_to_json_dict,
    strip_volatile,
)
from hypercolor.simulator import Coloring, Hypergraph, sample_hypergraph


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(q=st.integers(min_value=2, max_value=9), seed=st.integers(0, 2**31))
def test_matrix_json_round_trip_is_bit_exact(q, seed):
    a = hc.random_point_in_D(q, np.random.default_rng(seed))
    back = matrix_from_json_dict(matrix_to_json_dict(a))
    assert (back.entries == a.entries).all()
    assert back.q == q


@settings(max_examples=40, deadline=None)
@given(q=st.integers(min_value=2, max_value=9), seed=st.integers(0, 2**31))
def test_matrix_csv_round_trip_is_bit_exact(q, seed):
    a = hc.random_point_in_D(q, np.random.default_rng(seed))
    back = matrix_from_csv(matrix_to_csv(a))
    assert (back.entries == a.entries).all()


def test_matrix_json_dict_is_json_safe():
    a = hc.flat_overlap(3)
    text = json.dumps(matrix_to_json_dict(a))
    assert matrix_from_json_dict(json.loads(text)).entries[0][0] == pytest.approx(1 / 9)


def test_matrix_from_csv_rejects_ragged_rows():
    with pytest.raises(ValueError):
        matrix_from_csv("0.5,0.5\n0.25,0.25,0.5\n")


def test_matrix_from_csv_rejects_non_square():
    with pytest.raises(ValueError):
        matrix_from_csv("0.5,0.5\n")


def test_matrix_from_json_checks_mass():
    bad = {"q": 2, "entries": [[0.5, 0.5], [0.5, 0.6]]}
    with pytest.raises(ValueError):
        matrix_from_json_dict(bad)


# ---------------------------------------------------------------------------
# hypergraphs and colorings
# ---------------------------------------------------------------------------

def test_hypergraph_text_format_and_round_trip():
    h = Hypergraph(5, 3, [(1, 2, 3), (2, 4, 5)])
    text = hypergraph_to_text(h)
    assert text == "5 3 2\n1 2 3\n2 4 5\n"
    back = hypergraph_from_text(text)
    assert (back.n, back.k, back.edges) == (5, 3, h.edges)


def test_hypergraph_text_round_trip_on_random_instances():
    rng = np.random.default_rng(6)
    for _ in range(10):
        h = sample_hypergraph(12, 3, int(rng.integers(0, 30)), rng)
        back = hypergraph_from_text(hypergraph_to_text(h))
        assert back.edges == h.edges


def test_hypergraph_from_text_rejects_malformed_input():
    with pytest.raises(ValueError):
        hypergraph_from_text("")
    with pytest.raises(ValueError):
        hypergraph_from_text("5 3\n1 2 3\n")  # header too short
    with pytest.raises(ValueError):
        hypergraph_from_text("5 3 2\n1 2 3\n")  # edge count mismatch
    with pytest.raises(ValueError):
        hypergraph_from_text("5 3 1\n1 2\n")  # bad arity


def test_coloring_text_round_trip_and_q_inference():
    sigma = Coloring((1, 3, 2, 2, 1), q=3)
    text = coloring_to_text(sigma)
    assert text == "1 3 2 2 1\n"
    assert coloring_from_text(text).assignment == sigma.assignment
    assert coloring_from_text(text).q == 3  # inferred from the largest color
    assert coloring_from_text(text, q=5).q == 5


def test_coloring_from_text_rejects_bad_tokens():
    with pytest.raises(ValueError):
        coloring_from_text("1 2 x\n")
    with pytest.raises(ValueError):
        coloring_from_text("")
    with pytest.raises(ValueError):
        coloring_from_text("1 2 3\n", q=2)  # color above the cap


# ---------------------------------------------------------------------------
# report documents
# ---------------------------------------------------------------------------

def test_canonical_json_sorts_keys_and_is_stable():
    doc = {"b": 1, "a": [1.5, {"z": 2, "y": None}]}
    text = canonical_json(doc)
    assert text.index('"a"') < text.index('"b"')
    assert canonical_json(json.loads(text)) == text


def test_canonical_json_preserves_float_precision():
    value = 0.1234567890123456789
    text = canonical_json({"x": value})
    assert json.loads(text)["x"] == value


def test_strip_volatile_removes_only_the_timestamp_block():
    doc = {
        "schema": 1,
        "outputs": {"value": 3},
        "timestamp": {"generated_utc": "now", "elapsed_seconds": 0.5},
    }
    slim = strip_volatile(doc)
    assert "timestamp" not in slim
    assert slim["outputs"] == {"value": 3}
    # the original document is untouched
    assert "timestamp" in doc
