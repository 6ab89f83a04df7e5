import os
from pathlib import Path

import numpy as np
import pytest

import zdm

DATA = Path(os.environ.get("ZDM_DATA", Path(__file__).resolve().parents[2] / "data"))
FIB = {"type": "substitution", "alphabet": ["0", "1"], "rules": {"0": "01", "1": "0"}}


def test_fibonacci_language_and_marker():
    assert zdm.language(FIB, 2) == ["00", "01", "10"]
    m = zdm.find_marker(FIB, 2)
    assert (m["L"], m["W"], m["N"]) == (1, ["1"], 3)


def test_marker_command_reports():
    out = zdm.marker(DATA / "fib.json", n=2)
    assert out["W"] == ["1"]
    assert out["report"]["passed"]
    assert out["report"]["inputs"][0]["role"] == "system"


def test_periodic_system_has_no_marker():
    with pytest.raises(zdm.ZdmError) as info:
        zdm.find_marker({"type": "sft", "alphabet": ["0", "1"], "forbidden": ["11"]}, 2)
    assert info.value.kind == "NotFound"


def test_embed_dense_inside():
    out = zdm.embed_dense(DATA / "tm.json", DATA / "fib.json", eps=0.25)
    assert out["inside"]
    assert out["worst_deviation"] < 0.25


def test_encode_equivariance_and_array_name():
    out = zdm.encode(DATA / "rotation.json", window=4, levels=2)
    assert out["report"]["passed"]
    name = zdm.array_name({"type": "circle_rotation", "alpha": "sqrt2-1"}, t=0.2, x=0.0, levels=2, window=4)
    assert len(name["rows"]) == 2 and len(name["rows"][0]) == 9


def test_selector_and_glue():
    assert zdm.selector(DATA / "measures.json")["report"]["passed"]
    g = zdm.glue(DATA / "K.json", DATA / "groups.json")
    assert g["passed"] and g["tail_bound"] == pytest.approx(0.125)


def test_geometry():
    tri = [np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    np.testing.assert_allclose(zdm.barycentric(tri, np.array([0.25, 0.25])), [0.5, 0.25, 0.25], atol=1e-12)
    point, weights, distance = zdm.nearest_point(tri, np.array([1.0, 1.0]))
    np.testing.assert_allclose(point, [0.5, 0.5], atol=1e-12)
    assert distance == pytest.approx(np.sqrt(0.5))
    thin = [np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([0.5, 0.05])]
    images = zdm.retract(thin, [0, 1], 0.1)
    np.testing.assert_allclose(images[2], [0.5, 0.0], atol=1e-12)
    with pytest.raises(zdm.ZdmError) as info:
        zdm.retract(thin, [0, 2], 0.1)
    assert info.value.kind == "NotDense"
    assert zdm.simplex_retract(DATA / "triangle.json", [0, 1])["sup_displacement"] == pytest.approx(0.05)
