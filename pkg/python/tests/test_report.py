"""Tests for deterministic JSON/CSV output and plot data."""

import json

import numpy as np
import pytest
from dirac_spectra import DiracSpectraError, emit_plotdata
from dirac_spectra.report import csv_text, dumps_json, format_float, to_jsonable, write_csv, write_json


def test_format_float_round_trips():
    """17 significant digits round-trip every double."""
    for value in (0.1, 1 / 3, np.pi * 1e10, -2.5e-300):
        assert float(format_float(value)) == value


def test_to_jsonable_complex_and_non_finite():
    """Complex values become pairs and non-finite values null."""
    out = to_jsonable({"z": 1 + 2j, "bad": float("inf"), "arr": np.array([1.0, 2.0]), "flag": np.bool_(True)})
    assert out == {"z": [1.0, 2.0], "bad": None, "arr": [1.0, 2.0], "flag": True}


def test_dumps_json_sorted_and_stable():
    """Key order does not change the JSON text."""
    a = dumps_json({"b": 1, "a": [0.1, 2j]})
    b = dumps_json({"a": [0.1, 2j], "b": 1})
    assert a == b
    assert list(json.loads(a)) == ["a", "b"]


def test_write_files_atomically(tmp_path):
    """JSON and CSV writers create parents and leave complete files."""
    path = write_json(tmp_path / "sub" / "r.json", {"x": 1})
    assert json.loads(path.read_text()) == {"x": 1}
    csv_path = write_csv(tmp_path / "t.csv", ("n", "v"), [(1, 0.5), (2, None)])
    assert csv_path.read_text() == "n,v\n1,0.5\n2,\n"
    assert not list(tmp_path.rglob("*.tmp"))


def test_csv_text_uses_17_digits():
    """CSV cells use 17 significant digits."""
    text = csv_text(("v",), [(1 / 3,)])
    assert text.splitlines()[1] == "0.33333333333333331"


def test_emit_plotdata_kinds():
    """Each plot kind has its own CSV header."""
    spectrum = {"points": [{"strip_index": 1, "lambda": [3.14, 0.0]}]}
    assert emit_plotdata(spectrum, "spectrum").splitlines()[0] == "n,re_lambda,im_lambda"
    asym = {"indices": [5, -5], "scaled_errors": [0.1, 0.2]}
    assert emit_plotdata(asym, "asymptotics").splitlines() == ["n,e_n", "5,0.10000000000000001", "-5,0.20000000000000001"]
    riesz = {"tail": {"K": [0, 1], "partial_sums": [0.0, 0.0]}}
    assert emit_plotdata(riesz, "riesz-tail").splitlines()[0] == "K,S_K"


def test_emit_plotdata_unknown_kind():
    """Unknown plot kinds are rejected."""
    with pytest.raises(DiracSpectraError):
        emit_plotdata({}, "histogram")
