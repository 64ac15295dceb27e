from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from itp import ItpInstance, ParseError, parse_instance, parse_solution, write_instance, write_solution
from itp.io import dumps_instance, loads_instance

from pathlib import Path

DATA = Path(__file__).parent / "data"


@pytest.mark.parametrize("name", ["golden_1x1", "golden_2x1", "golden_2x2_eq"])
def test_golden_round_trip(tmp_path, name):
    src = DATA / f"{name}.json"
    inst = parse_instance(src)
    out = tmp_path / "out.json"
    write_instance(inst, out)
    assert "".join(out.read_text().split()) == "".join(src.read_text().split())
    assert parse_instance(out) == inst


def doc(**kw):
    base = {"mode": "le", "m": 1, "n": 1, "cost": [[[3, 5]]], "supply": [[1, 2]], "demand": [[1, 2]]}
    base.update(kw)
    return base


def test_reversed_interval(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc(cost=[[[5, 3]]])))
    with pytest.raises(ParseError) as err:
        parse_instance(p)
    assert err.value.kind == "InvalidInterval"
    assert err.value.field.startswith("cost")


def test_missing_field(tmp_path):
    d = doc()
    del d["demand"]
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    with pytest.raises(ParseError) as err:
        parse_instance(p)
    assert err.value.kind == "MissingField" and err.value.field == "demand"


def test_malformed_json_reports_line():
    with pytest.raises(ParseError) as err:
        loads_instance('{\n  "mode": "le",\n  "m": 1,,\n}')
    assert err.value.line == 3


@pytest.mark.parametrize("bad", [{"mode": "ge"}, {"m": 1.5}, {"cost": [[[3, "x"]]]}, {"supply": [[1, 2, 3]]},
                                 {"demand": [[-1, 2]]}])
def test_invalid_values(bad):
    with pytest.raises(ParseError):
        loads_instance(json.dumps(doc(**bad)))


def test_solution_files(tmp_path):
    p = tmp_path / "x.json"
    write_solution(np.array([[1.0, 0.5], [0.0, 2.0]]), p)
    assert parse_solution(p, (2, 2)).tolist() == [[1.0, 0.5], [0.0, 2.0]]
    with pytest.raises(ParseError):
        parse_solution(p, (1, 2))
    p.write_text('{"plan": [[3]]}')
    assert parse_solution(p).tolist() == [[3.0]]


finite = st.floats(0, 1e6, allow_nan=False, allow_infinity=False)


@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_round_trip_is_bit_exact(m, n, data):
    def pair():
        a, b = data.draw(finite), data.draw(finite)
        return [min(a, b), max(a, b)]
    inst = ItpInstance.from_bounds([[pair() for _ in range(n)] for _ in range(m)], [pair() for _ in range(m)],
                                   [pair() for _ in range(n)], mode=data.draw(st.sampled_from(["le", "eq"])))
    again = loads_instance(dumps_instance(inst))
    assert again == inst
