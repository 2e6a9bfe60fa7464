import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quantdim import io, model


def cantor_text(**override):
    data = {"n": 2, "p": [[0.5, 0.5], [0.5, 0.5]], "c": ["1/3"] * 4, "q": [0.5, 0.5]}
    data.update(override)
    return json.dumps(data)


def test_nested_and_flat_matrices_agree():
    a = io.parse_system(cantor_text()).system
    b = io.parse_system(cantor_text(p=[0.5] * 4)).system
    assert np.array_equal(a.P, b.P) and np.array_equal(a.C, b.C)
    assert a.C[0, 0] == 1 / 3


def test_fractions_are_correctly_rounded():
    s = io.parse_system(cantor_text(p=["0.1", "9/10", "1/2", "0.5"])).system
    assert s.P[0, 0] == 0.1 and s.P[0, 1] == 0.9


@pytest.mark.parametrize("text", [
    '{"n": 2, "p": [NaN, 0.5, 0.5, 0.5], "c": [0.3, 0.3, 0.3, 0.3], "q": [0.5, 0.5]}',
    '{"n": 2, "p": [1e999, 0.5, 0.5, 0.5], "c": [0.3, 0.3, 0.3, 0.3], "q": [0.5, 0.5]}',
    '{"n": 2, "p": [Infinity, 0.5, 0.5, 0.5], "c": [0.3, 0.3, 0.3, 0.3], "q": [0.5, 0.5]}',
    '[1, 2]',
    '{"n": 2}',
    '{"n": 0, "p": [], "c": [], "q": []}',
    '{"n": true, "p": [], "c": [], "q": []}',
    '{"n": 2, "p": [0.5, 0.5, 0.5], "c": [0.3, 0.3, 0.3, 0.3], "q": [0.5, 0.5]}',
    '{"n": 2, "p": [[0.5, 0.5], [0.5]], "c": [0.3, 0.3, 0.3, 0.3], "q": [0.5, 0.5]}',
    '{"n": 2, "p": ["half", 0.5, 0.5, 0.5], "c": [0.3, 0.3, 0.3, 0.3], "q": [0.5, 0.5]}',
    '{"n": 2, "p": ["1/0", 0.5, 0.5, 0.5], "c": [0.3, 0.3, 0.3, 0.3], "q": [0.5, 0.5]}',
    '{"n": 2, "p": [true, 0.5, 0.5, 0.5], "c": [0.3, 0.3, 0.3, 0.3], "q": [0.5, 0.5]}',
    '{"n": 2, "p": [0.5, 0.5, 0.5, 0.5], "c": [0.3, 0.3, 0.3, 0.3], "q": [1.0]}',
    '{"n": 2, "p": [0.5, 0.5, 0.5, 0.5], "c": [0.3, 0.3, 0.3, 0.3], "q": [0.5, 0.5], "geometry": 3}',
    'not json',
])
def test_malformed_files_are_rejected(text):
    with pytest.raises(io.SystemFileError):
        io.parse_system(text)


def test_geometry_block_is_kept():
    f = io.parse_system(cantor_text(geometry={"layout": "equal-gap"}))
    assert f.geometry == {"layout": "equal-gap"}


@given(st.integers(0, 10_000))
def test_round_trip_is_exact(seed):
    s = model.random_system(np.random.default_rng(seed))
    back = io.parse_system(io.system_to_json(s)).system
    assert np.array_equal(back.P, s.P) and np.array_equal(back.C, s.C)
    assert np.array_equal(back.q, s.q) and back.name == s.name


def test_load_system(tmp_path):
    path = tmp_path / "cantor.json"
    path.write_text(io.system_to_json(model.cantor2()))
    f = io.load_system(path)
    assert f.path == str(path) and f.system.N == 2
    with pytest.raises(OSError):
        io.load_system(tmp_path / "missing.json")


def test_value_formatting():
    assert io.format_value(None) == ""
    assert io.format_value(True) == "true" and io.format_value(np.bool_(False)) == "false"
    assert io.format_value(np.int64(7)) == "7"
    assert float(io.format_value(0.1)) == 0.1
    assert io.format_value(1 / 3) == "0.33333333333333331"
    text = io.csv_text(["a", "b"], [(1, 0.5), (2, None)])
    assert text == "a,b\n1,0.5\n2,\n"
    assert "\r" not in text


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_formatted_floats_round_trip(x):
    assert float(io.format_value(x)) == x


def test_points_and_files(tmp_path):
    assert io.points_text([0.25, 1 / 3]) == "0.25\n0.33333333333333331\n"
    target = tmp_path / "deep" / "out.csv"
    io.write_text(target, "x\n")
    assert target.read_bytes() == b"x\n"
    assert math.isclose(float(io.points_text([math.pi]).strip()), math.pi, rel_tol=0)


def test_text_cells_pass_through():
    assert io.format_value("RowNotStochastic") == "RowNotStochastic"
    assert io.csv_text(["k"], [("a,b",)]) == 'k\n"a,b"\n'
