import io
import json
import math

import numpy as np
import pytest

from curved_two_body.reduced_core import Geometry
from curved_two_body.serializer import (
    format_float,
    json_line,
    write_csv,
    write_rows,
)


def test_format_float():
    assert format_float(0.1) == "0.10000000000000001"
    assert float(format_float(math.pi)) == math.pi


def test_json_line():
    record = {
        "geometry": Geometry.LOBACHEVSKY,
        "q": np.float64(1.5),
        "n": np.int64(3),
        "ok": np.bool_(True),
        "missing": math.nan,
        "sig": (2, 2, 0),
        "nested": {"x": np.array([0.5, 1.0])},
    }
    line = json_line(record)
    assert "\n" not in line
    assert json.loads(line) == {
        "geometry": "l2",
        "q": 1.5,
        "n": 3,
        "ok": True,
        "missing": None,
        "sig": [2, 2, 0],
        "nested": {"x": [0.5, 1.0]},
    }


def test_json_line_rejects_objects():
    with pytest.raises(TypeError):
        json_line({"x": object()})


def test_write_rows():
    handle = io.StringIO()
    write_rows([[1, 0.5, Geometry.SPHERE, None]], ("a", "b", "c", "d"), handle)
    assert handle.getvalue() == "a,b,c,d\n1,0.5,s2,\n"


def test_write_csv(tmp_path):
    path = write_csv([[0.25, 2]], ("x", "y"), tmp_path / "out.csv")
    assert path.read_text() == "x,y\n0.25,2\n"

