import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modnr import calg
from modnr.harness import gen_operator
from modnr.hmodule import random_frame
from modnr.serialize import (ParseError, dumps, element_from_json, element_to_json, frame_from_json,
                             frame_to_json, load_operator, operator_from_json, operator_to_json,
                             state_from_json, state_to_json)


@settings(max_examples=40, deadline=None)
@given(sig=st.lists(st.integers(1, 3), min_size=1, max_size=3), k=st.integers(1, 3),
       seed=st.integers(0, 2**32 - 1))
def test_operator_round_trip_is_bit_exact(sig, k, seed):
    t = gen_operator(sig, k, "generic", seed)
    back = operator_from_json(json.loads(json.dumps(operator_to_json(t))))
    assert back.signature == t.signature and back.k == t.k
    for p, q in zip(back.blocks, t.blocks):
        np.testing.assert_array_equal(p, q)


def test_other_round_trips(rng):
    a = calg.random_element([2, 3], rng)
    assert element_from_json(json.loads(json.dumps(element_to_json(a)))).allclose(a, atol=0, rtol=0)
    x = random_frame([2, 3], 2, rng)
    y = frame_from_json(json.loads(json.dumps(frame_to_json(x))))
    for p, q in zip(x.blocks, y.blocks):
        np.testing.assert_array_equal(p, q)
    rho = calg.random_state([2, 3], 3)
    back = state_from_json(json.loads(json.dumps(state_to_json(rho))))
    for p, q in zip(rho.densities, back.densities):
        np.testing.assert_array_equal(p, q)


def test_flat_and_real_entries_accepted():
    obj = {"sig": [2], "k": 1, "blocks": [[1, 0, 1, 0]]}
    t = operator_from_json(obj)
    np.testing.assert_array_equal(t.blocks[0], [[1, 0], [1, 0]])
    nested = {"sig": [2], "blocks": [[[[1, 0], [0, 0]], [[1, 0], 0]]]}
    np.testing.assert_array_equal(operator_from_json(nested).blocks[0], [[1, 0], [1, 0]])


@pytest.mark.parametrize("obj,field", [
    ({"k": 1, "blocks": []}, "sig"),
    ({"sig": [2, 0], "blocks": []}, "sig"),
    ({"sig": [2], "k": 0, "blocks": [[]]}, "k"),
    ({"sig": [2]}, "blocks"),
    ({"sig": [2], "blocks": [[[1, 0]]]}, "blocks[0]"),
    ({"sig": [2], "blocks": [[[1, 0], [0, "x"]]]}, "blocks[0][1][1]"),
    ({"sig": [2], "blocks": [[1, 0, 0, [1, 2, 3]]]}, "blocks[0][1][1]"),
    ([1, 2], "JSON object"),
])
def test_parse_errors_name_the_field(obj, field):
    with pytest.raises(ParseError, match=field.replace("[", r"\[").replace("]", r"\]")):
        operator_from_json(obj)


def test_load_operator_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ParseError, match="invalid JSON"):
        load_operator(p)


def test_non_finite_rejected():
    with pytest.raises(ParseError, match="non-finite"):
        operator_from_json({"sig": [1], "blocks": [[[[float("nan"), 0]]]]})


def test_invalid_state_is_parse_error():
    with pytest.raises(ParseError, match="densities"):
        state_from_json({"sig": [1], "densities": [[[[2, 0]]]]})


def test_dumps_is_stable():
    assert dumps({"b": 1, "a": [1.5, 2]}) == dumps({"a": [1.5, 2], "b": 1})
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})
