from __future__ import annotations

import io
import json
from fractions import Fraction

import pytest

from seqspace.cli import ParseError, ingest_sequence, run, selftest
from seqspace.families import SpaceParams, identity_params, preset
from seqspace.numeric import ValidationError


def call(argv) -> tuple[int, dict | None]:
    out = io.StringIO()
    code = run([str(a) for a in argv], stdout=out)
    text = out.getvalue()
    return code, json.loads(text) if text else None


@pytest.fixture
def files(tmp_path):
    def write(name: str, obj) -> str:
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)
    return write


def test_transform_identity_params(files):
    x = files("x.json", {"values": [1, 2, 3]})
    code, rep = call(["transform", "--x", x, "--preset", "identity"])
    assert code == 0
    assert [Fraction(str(v)) for v in rep["result"]["y"]] == [1, 2, 3]
    assert rep["command"] == "transform" and rep["mode"] == "rational"
    assert Fraction(str(rep["result"]["paranorm"])) == 6


def test_inverse_transform_roundtrip(files):
    params = files("p.json", {"preset": "cesaro-alpha", "args": {"alpha": "1/2", "m": 2, "p": 2}})
    x = files("x.json", {"values": [1, -2, 3, 5]})
    code, rep = call(["transform", "--x", x, "--params", params])
    assert code == 0
    y = files("y.json", {"values": [str(v) for v in rep["result"]["y"]]})
    code, back = call(["transform", "--x", y, "--params", params, "--inverse"])
    assert code == 0
    assert [Fraction(str(v)) for v in back["result"]["x"]] == [1, -2, 3, 5]


def test_preset_ingest(files):
    params = ingest_sequence(files("p.json", {"preset": "cesaro-alpha", "args": {"alpha": 0.5}}))
    assert isinstance(params, SpaceParams)
    assert [params.r.term(n) for n in range(4)] == [1, 2, 3, 4]
    assert [params.t.term(n) for n in range(4)] == [2, Fraction(3, 2), Fraction(5, 4), Fraction(9, 8)]


def test_csv_decimals_are_exact(files):
    fam = ingest_sequence(files("x.csv", "1.5\n-2\n"))
    assert list(fam.prefix) == [Fraction(3, 2), Fraction(-2)]


def test_bad_csv_reports_position(files):
    with pytest.raises(ParseError) as info:
        ingest_sequence(files("x.csv", "1\nabc\n"))
    assert info.value.line == 2


def test_bad_json_reports_position(files):
    with pytest.raises(ParseError) as info:
        ingest_sequence(files("x.json", '{"values": [1,\n 2,, 3]}'))
    assert info.value.line == 2


def test_classify_geometric_example(files):
    A = files("A.json", {"kind": "separable", "u": {"geometric": [1, "1/2"]},
                         "v": {"ratio": "1/2"}, "p": 2, "target": "c0"})
    code, rep = call(["classify", "--A", A, "--N", 64, "--preset", "identity"])
    assert code == 0
    assert rep["result"]["verdict"] == "compact"


def test_norm_of_geometric_example(files):
    A = files("A.json", {"kind": "separable", "u": {"geometric": [1, "1/2"]},
                         "v": {"ratio": "1/2"}, "p": 2, "target": "c0"})
    code, rep = call(["norm", "--A", A, "--N", 32, "--mode", "float"])
    assert code == 0
    assert abs(float(rep["result"]["operatorNorm"]) - (4 / 3) ** 0.5) < 1e-12


def test_l1_norm_command(files):
    A = files("A.json", {"kind": "dense", "rows": [[1, 2], [3, 4]], "p": 1, "target": "l1"})
    code, rep = call(["norm", "--A", A, "--N", 1])
    assert code == 0 and Fraction(str(rep["result"]["l1Norm"])) == 6


def test_chi_writes_tail_csv(files, tmp_path):
    A = files("A.json", {"kind": "separable", "u": {"constant": 1}, "v": [1], "p": 2, "target": "c0"})
    out = tmp_path / "tail.csv"
    code, rep = call(["chi", "--A", A, "--N", 32, "--mode", "float", "--csv", out])
    assert code == 0
    assert abs(float(rep["result"]["lower"]) - 1) < 1e-12
    assert out.read_text().splitlines()[0] == "n,T"


@pytest.mark.parametrize("name", ["weighted-mean", "cesaro-alpha", "lambda", "identity"])
def test_selftest_passes(name):
    code, rep = call(["selftest", "--preset", name, "--N", 8])
    assert code == 0
    assert rep["result"]["passed"] is True


def test_selftest_function_on_identity():
    assert all(selftest(identity_params(2), 8).values())


def test_missing_file_is_a_validation_error(tmp_path):
    assert call(["transform", "--x", tmp_path / "nope.json"])[0] == 2


def test_bad_exponent_is_a_validation_error(files):
    x = files("x.json", {"values": [1, 2]})
    assert call(["paranorm", "--x", x, "--p", "0"])[0] == 2


def test_divergent_series_exits_with_numeric_code(files):
    A = files("A.json", {"kind": "separable", "u": {"constant": 1}, "v": {"ratio": "0.99999"},
                         "p": 2, "target": "c0"})
    assert call(["norm", "--A", A, "--N", 4, "--mode", "float"])[0] == 3


def test_strict_flags_inconclusive(files):
    A = files("A.json", {"kind": "separable", "u": {"constant": 1}, "v": [1], "p": 2, "target": "linf"})
    argv = ["classify", "--A", A, "--N", 32, "--mode", "float"]
    assert call(argv)[0] == 0
    assert call(argv + ["--strict"])[0] == 4


def test_reports_are_deterministic(files):
    a = files("a.json", {"values": [1, 0, 0, 0, 0, 0]})
    argv = ["duals", "--a", a, "--dual", "beta", "--preset", "identity", "--p", 2, "--N", 5]
    first, second = io.StringIO(), io.StringIO()
    assert run([str(v) for v in argv], stdout=first) == 0
    assert run([str(v) for v in argv], stdout=second) == 0
    assert first.getvalue() == second.getvalue()


def test_build_writes_json(files, tmp_path):
    out = tmp_path / "c.json"
    code, _ = call(["build", "--which", "D", "--preset", "identity", "--N", 4, "--out", out])
    assert code == 0
    rep = json.loads(out.read_text())
    assert [Fraction(str(v)) for v in rep["result"]["D"]] == [1, 1, 0, 0, 0]


def test_preset_helper_rejects_unknown():
    with pytest.raises(ValidationError):
        preset("nope")
