import json
import math

import numpy as np

from harmonia.reporting import dumps, fmt, write_json


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, 1e-300, -2.5e17, 0.0):
        assert float(fmt(x)) == x
    assert fmt(math.nan) == '"nan"'
    assert fmt(-math.inf) == '"-inf"'


def test_dumps_labels_and_containers():
    obj = {(1, -2): 0.5, "a": [np.float64(0.25), np.int64(3), True, None],
           "cells": {(0, 1), (0, 0)}, "arr": np.array([1.0, 2.0]), "empty": {}}
    data = json.loads(dumps(obj))
    assert data["1:-2"] == 0.5
    assert data["a"] == [0.25, 3, True, None]
    assert data["cells"] == ["0:0", "0:1"]
    assert data["arr"] == [1.0, 2.0]
    assert data["empty"] == {}


def test_dumps_is_deterministic(tmp_path):
    obj = {"x": 0.1 + 0.2, "y": [1 / 7]}
    p = write_json(tmp_path / "sub" / "r.json", obj)
    assert p.read_text() == dumps(obj)
    assert "0.30000000000000004" in p.read_text()
