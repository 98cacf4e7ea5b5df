from __future__ import annotations

import io
import json
import math
import subprocess
import sys

import pytest

from orbitcount.cli import parse_grid, run


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), stdout=buf)
    return code, buf.getvalue()


def test_counts_example():
    code, out = call("counts", "--ell", "2", "--n", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["A"] == ["0", "8", "9", "1"]
    assert doc["schema"] == 1
    assert doc["config"]["ell"] == 2 and doc["config"]["n"] == 3


def test_oracle_agrees_with_counts():
    for ell, n in ((1, 5), (2, 3), (2, 5), (3, 3)):
        a = json.loads(call("counts", "--ell", str(ell), "--n", str(n))[1])
        b = json.loads(call("oracle", "--ell", str(ell), "--n", str(n))[1])
        assert a["A"] == b["A"]
        assert b["method"] == "enumeration"


def test_clt_schema():
    code, out = call("clt", "--ell", "2", "--x", "1", "--n", "1024")
    assert code == 0
    doc = json.loads(out)
    for key in ("mean", "variance", "kolmogorov", "schema", "config"):
        assert key in doc
    assert doc["config"]["x"] == "1"


def test_big_integers_are_strings():
    doc = json.loads(call("counts", "--ell", "3", "--n", "40")[1])
    assert all(isinstance(a, str) for a in doc["A"])
    assert int(doc["A"][1]) > 2**64


def test_repeated_runs_are_identical():
    argv = [sys.executable, "-m", "orbitcount.cli", "sweep", "--ell", "2", "--n-grid", "64:512:2", "--format", "csv"]

    def once():
        return subprocess.run(argv, capture_output=True, check=True).stdout

    first = once()
    assert first.count(b"\n") == 6
    assert first == once()
    code1, a = call("contour", "--ell", "3", "--x", "1/2", "--n", "50")
    code2, b = call("contour", "--ell", "3", "--x", "1/2", "--n", "50")
    assert code1 == code2 == 0 and a == b


def test_exit_codes(capsys):
    assert call("bogus")[0] == 2
    assert call("counts", "--ell", "2")[0] == 2
    assert call("counts", "--ell", "2", "--n", "3", "--bogus-flag")[0] == 2
    assert call("counts", "--x", "-1", "--n", "3")[0] == 2
    assert call("zeval", "--t", "0.1")[0] == 2
    # enumeration beyond the budget is a computation failure
    assert call("oracle", "--ell", "3", "--n", "8")[0] == 1
    # a tolerance below the rounding floor cannot be certified
    assert call("zeval", "--m", "2", "--t", "0.1", "--tol", "1e-30")[0] == 1
    assert "usage" in capsys.readouterr().err


def test_out_file(tmp_path):
    path = tmp_path / "row.json"
    code, out = call("counts", "--n", "4", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["A"] == ["0", "42", "59", "18", "1"]


def test_csv_header():
    code, out = call("counts", "--ell", "2", "--n", "3", "--format", "csv")
    lines = out.splitlines()
    assert lines[0].startswith("# config: ")
    assert json.loads(lines[0][len("# config: "):])["format"] == "csv"
    assert lines[1:] == ["ell,n,k,A", "2,3,0,0", "2,3,1,8", "2,3,2,9", "2,3,3,1"]


def test_zeval_saddle_contour():
    doc = json.loads(call("zeval", "--ell", "2", "--m", "2", "--t", "0.1")[1])
    assert doc["value"] > 0 and doc["error_bound"] >= 0
    doc = json.loads(call("zeval", "--alphas", "2,1", "--t", "0.1")[1])
    assert doc["alphas"] == [2.0, 1.0]
    doc = json.loads(call("saddle", "--ell", "2", "--n-grid", "10:1000:10")[1])
    assert [r["n"] for r in doc["rows"]] == [10, 100, 1000]
    assert all(r["residual"] <= 1e-9 * r["n"] for r in doc["rows"])
    doc = json.loads(call("contour", "--ell", "2", "--n", "50")[1])
    assert doc["rows"][0]["log_H"] == pytest.approx(math.log(204226), rel=1e-10)  # p(50) = 204226


def test_sample():
    code, out = call("sample", "--n", "20", "--samples", "5", "--seed", "3", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# config: ")
    vals = [int(v) for v in lines[1:]]
    assert len(vals) == 5 and all(1 <= v <= 20 for v in vals)
    assert call("sample", "--n", "20", "--samples", "5", "--seed", "3", "--format", "csv")[1] == out
    doc = json.loads(call("sample", "--n", "20", "--samples", "5", "--seed", "3")[1])
    assert doc["samples"] == vals and doc["prng"] == "PCG64"


def test_parse_grid():
    assert parse_grid("256:16384:4") == [256, 1024, 4096, 16384]
    with pytest.raises(Exception):
        parse_grid("1:2")
