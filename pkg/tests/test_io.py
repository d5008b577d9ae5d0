import json
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stochastik import io as sio
from stochastik.errors import DimensionMismatch, NegativeRate, RowSumNotOne, UsageError


def test_parse_chain_fractions_and_labels():
    P, nu = sio.parse_chain({"states": ["a", "b"], "rows": [["1/2", "1/2"], [1, 0]], "initial": ["1", 0]})
    assert P.labels == ("a", "b")
    assert P[0, 0] == F(1, 2) and P[1, 0] == 1
    assert list(nu.probs) == [1, 0]


def test_parse_chain_float_backend():
    P, nu = sio.parse_chain({"rows": [[0.25, 0.75], [1, 0]]}, "float")
    assert nu is None
    assert np.allclose(P.as_float(), [[0.25, 0.75], [1, 0]])


@pytest.mark.parametrize(
    "data, err",
    [
        ({}, UsageError),
        ({"rows": [["x", 1], [1, 0]]}, UsageError),
        ({"rows": [[True, 0], [1, 0]]}, UsageError),
        ({"rows": [["1/2", "1/3"], [1, 0]]}, RowSumNotOne),
        ({"rows": [[1, 0], [1, 0]], "initial": [1]}, DimensionMismatch),
    ],
)
def test_parse_chain_errors(data, err):
    with pytest.raises(err):
        sio.parse_chain(data)


def test_load_chain_file_errors(tmp_path):
    with pytest.raises(UsageError):
        sio.load_chain(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(UsageError):
        sio.load_chain(bad)
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(UsageError):
        sio.load_chain(arr)


def test_parse_generator():
    L = sio.parse_generator({"states": ["a", "b"], "rates": {"a->b": 2, "b->a": "1/3"}})
    assert L.labels == ("a", "b")
    assert L[0, 0] == -2 and L[1, 0] == F(1, 3)


def test_parse_generator_infers_states():
    L = sio.parse_generator({"rates": {"x -> y": 1, "y->z": 1, "z->x": 1}})
    assert L.labels == ("x", "y", "z")


@pytest.mark.parametrize(
    "data, err",
    [
        ({"states": ["a"]}, UsageError),
        ({"states": ["a", "b"], "rates": {"a-b": 1}}, UsageError),
        ({"states": ["a", "b"], "rates": {"a->c": 1}}, UsageError),
        ({"states": ["a", "b"], "rates": {"a->b": -1}}, NegativeRate),
    ],
)
def test_parse_generator_errors(data, err):
    with pytest.raises(err):
        sio.parse_generator(data)


def test_load_cities(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"coords": [[0, 0], [3, 4]]}))
    assert np.allclose(sio.load_cities(f), [[0, 5], [5, 0]])
    f.write_text(json.dumps({"matrix": [[0, 2], [2, 0]]}))
    assert np.allclose(sio.load_cities(f), [[0, 2], [2, 0]])
    f.write_text(json.dumps({"points": []}))
    with pytest.raises(UsageError):
        sio.load_cities(f)


def test_parse_law():
    nu = sio.parse_law("1/4, 3/4", 2)
    assert list(nu.probs) == [F(1, 4), F(3, 4)]
    with pytest.raises(UsageError):
        sio.parse_law("a,b", 2)
    with pytest.raises(DimensionMismatch):
        sio.parse_law("1", 2)


def test_number_formats():
    assert sio.number(F(5, 12)) == {"exact": "5/12", "decimal": round(5 / 12, 12)}
    assert sio.number(F(4)) == {"exact": "4", "decimal": 4.0}
    assert sio.number(True) is True
    assert sio.number(np.int64(3)) == 3
    assert sio.number(0.5) == {"decimal": 0.5}
    assert sio.number(float("inf")) == "inf"
    assert sio.number({1: [F(1, 2)]}) == {"1": [{"exact": "1/2", "decimal": 0.5}]}
    assert sio.number(np.array([1.0])) == [{"decimal": 1.0}]


def test_text_number():
    assert sio.text_number(F(35, 6)) == "35/6 (5.833333333)"
    assert sio.text_number(F(7)) == "7"
    assert sio.text_number(0.1 + 0.2) == "0.3"


@given(st.fractions(min_value=-1000, max_value=1000))
def test_number_exact_roundtrip(x):
    out = sio.number(x)
    assert F(out["exact"]) == x
    json.dumps(out)


def test_dumps_is_sorted_and_stable():
    a = sio.dumps({"b": 1, "a": [1, 2]})
    assert a == sio.dumps({"a": [1, 2], "b": 1})
    assert a.index('"a"') < a.index('"b"')
