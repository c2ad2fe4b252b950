import json
import math

import numpy as np
import pytest

from fockcis import io as fio
from fockcis.exceptions import SequenceError
from fockcis.geometry import PointSequence
from fockcis.product import CoefficientVector
from fockcis.reference import build_reference


def test_sequence_roundtrip(tmp_path):
    g = PointSequence([0.5, 2.0, 1.0], [0.1, -3.0, math.pi])
    path = tmp_path / "g.csv"
    fio.write_sequence(path, g)
    back = fio.read_sequence(path)
    np.testing.assert_array_equal(back.t, g.t)
    np.testing.assert_array_equal(back.theta, g.theta)


def test_sequence_unsorted_and_blank_lines(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text("t,theta\n2.0,0\n\n1.0,0.5\n")
    assert fio.read_sequence(path).t.tolist() == [1.0, 2.0]


@pytest.mark.parametrize("body,match", [
    ("", "empty file"),
    ("x,y\n1,2\n", "expected header"),
    ("t,theta\n", "no points"),
    ("t,theta\n1,2\n3\n", ":3: expected 2 fields"),
    ("t,theta\n1,abc\n", ":2: non-numeric"),
    ("t,theta\nnan,0\n", ":2: invalid point"),
    ("t,theta\ninf,0\n", ":2: invalid point"),
])
def test_sequence_errors(tmp_path, body, match):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(SequenceError, match=match):
        fio.read_sequence(path)


def test_coefficients(tmp_path):
    v = CoefficientVector([3, 0], [1 - 2j, 0.5])
    path = tmp_path / "v.csv"
    fio.write_coefficients(path, v)
    back = fio.read_coefficients(path)
    assert back.index.tolist() == [0, 3]
    assert back.values.tolist() == [0.5, 1 - 2j]
    path.write_text("n,re,im\n1.5,0,0\n")
    with pytest.raises(SequenceError, match="non-negative integer"):
        fio.read_coefficients(path)
    path.write_text("n,re,im\n1,0,0\n1,1,0\n")
    with pytest.raises(SequenceError, match="repeated index"):
        fio.read_coefficients(path)


def test_reference_csv(w2, p2):
    text = fio.reference_csv(build_reference(w2, p2, 3), w2, p2)
    lines = text.strip().split("\n")
    assert lines[0] == "n,y,log_sigma_norm"
    assert [float(x.split(",")[1]) for x in lines[1:]] == [0.5, 1.0, 1.5, 2.0]


def test_gram_csv():
    text = fio.gram_csv(np.array([[1, 0.5j], [-0.5j, 1]]))
    rows = text.strip().split("\n")
    assert rows[0] == "re_0,im_0,re_1,im_1"
    assert rows[1] == "1.0,0.0,0.0,0.5"


def test_json_non_finite():
    text = fio.dumps_json({"b": math.inf, "a": [np.float64(1.5), np.int64(2), np.bool_(True)],
                           "c": complex(1, -1), "d": np.array([math.nan])})
    data = json.loads(text)
    assert list(data) == ["a", "b", "c", "d"]
    assert data["b"] == "inf" and data["d"] == ["nan"]
    assert data["a"] == [1.5, 2, True] and data["c"] == {"re": 1.0, "im": -1.0}
