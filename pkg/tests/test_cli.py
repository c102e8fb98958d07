import json
import math
import subprocess
import sys

import pytest

from modnr import cli, radius
from modnr.harness import gen_operator
from modnr.oprep import zero_operator
from modnr.serialize import dump_operator


@pytest.fixture
def t2_file(tmp_path, lemma):
    p = tmp_path / "t2.json"
    dump_operator(lemma["T2"], p)
    return str(p)


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_compute_all_on_t2(t2_file, capsys):
    code, out, _ = run(["compute", "--input", t2_file], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == cli.COMPUTE_SCHEMA
    v = rep["values"]
    assert v["norm"] == pytest.approx(math.sqrt(2), abs=1e-9)
    assert v["w"] == pytest.approx(math.sqrt(2), abs=1e-9)
    assert v["wtilde"] == pytest.approx((1 + math.sqrt(2)) / 2, abs=1e-8)
    assert v["srad"] == pytest.approx(1.0, abs=1e-6)
    q = rep["quantities"]
    assert q["w"]["witness"]["frame"]["blocks"][0] == [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
    assert "theta" in q["wtilde"]["witness"]
    assert set(rep["timings"]) == {"norm", "w", "wtilde", "srad"}


@pytest.mark.parametrize("quantity", ["w", "wtilde", "norm", "srad"])
def test_compute_single_quantity(t2_file, capsys, quantity):
    code, out, _ = run(["compute", "--input", t2_file, "--quantity", quantity], capsys)
    assert code == 0
    assert set(json.loads(out)["values"]) == {quantity}


def test_compute_zero_operator(tmp_path, capsys):
    p = tmp_path / "zero.json"
    dump_operator(zero_operator([2, 3], 2), p)
    code, out, _ = run(["compute", "--input", str(p)], capsys)
    assert code == 0
    assert json.loads(out)["values"] == {"norm": 0.0, "w": 0.0, "wtilde": 0.0, "srad": 0.0}


def test_compute_output_file(tmp_path, t2_file, capsys):
    out_path = tmp_path / "rep.json"
    code, out, _ = run(["compute", "--input", t2_file, "--output", str(out_path)], capsys)
    assert code == 0 and out == ""
    assert json.loads(out_path.read_text())["operator"] == {"sig": [2], "k": 1}


def test_compute_w_uses_seed_and_restarts(tmp_path, capsys):
    p = tmp_path / "g.json"
    dump_operator(gen_operator([2, 3], 2, "generic", 1), p)
    args = ["compute", "--input", str(p), "--quantity", "w", "--restarts", "4", "--seed", "3"]
    _, out1, _ = run(args, capsys)
    _, out2, _ = run(args, capsys)
    q1, q2 = json.loads(out1)["quantities"]["w"], json.loads(out2)["quantities"]["w"]
    assert q1["value"] == q2["value"] and q1["witness"] == q2["witness"]
    assert json.loads(out1)["config"] == {"tol": 1e-8, "seed": 3, "restarts": 4}


@pytest.mark.parametrize("content,field", [
    ("{oops", "invalid JSON"),
    ('{"sig": [2], "k": 1}', "blocks"),
    ('{"sig": [2], "k": 1, "blocks": [[[1, 0]]]}', "blocks[0]"),
    ('{"sig": "two", "blocks": []}', "sig"),
])
def test_compute_parse_errors_exit_2(tmp_path, capsys, content, field):
    p = tmp_path / "bad.json"
    p.write_text(content)
    code, out, err = run(["compute", "--input", str(p)], capsys)
    assert code == 2 and out == ""
    assert field in err


def test_compute_missing_file_exit_2(tmp_path, capsys):
    code, _, err = run(["compute", "--input", str(tmp_path / "nope.json")], capsys)
    assert code == 2 and "cannot read" in err


def test_compute_cross_check_exit_3(t2_file, capsys, monkeypatch):
    def boom(*a, **kw):
        raise radius.CrossCheckError("routes disagree")

    monkeypatch.setattr(cli, "snr", boom)
    code, _, err = run(["compute", "--input", t2_file], capsys)
    assert code == 3 and "routes disagree" in err


@pytest.mark.parametrize("argv", [
    ["compute", "--input", "x.json", "--bogus"],
    ["compute", "--input", "x.json", "--quantity", "spin"],
    ["compute", "--input", "x.json", "--tol", "0"],
    ["compute", "--input", "x.json", "--restarts", "-1"],
    ["verify", "--trials", "0"],
    ["verify", "--input", "x.json"],
    [],
])
def test_bad_flags_rejected(argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2


def test_counterexample_command(capsys):
    code, out, _ = run(["counterexample"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == cli.COUNTEREXAMPLE_SCHEMA and rep["ok"]
    assert set(rep["facts"]) == {"i", "ii", "iii", "iv"}


def test_verify_small_and_deterministic(tmp_path, capsys):
    argv = ["verify", "--trials", "1", "--restarts", "4"]
    code1, out1, err1 = run(argv, capsys)
    code2, out2, _ = run(argv, capsys)
    assert code1 == code2 == 0
    assert out1 == out2
    assert "failed checks" in err1
    rep = json.loads(out1)
    assert rep["ok"] and rep["config"]["seed"] == 42


def test_verify_failure_exit_1(capsys, monkeypatch):
    from modnr import harness
    monkeypatch.setitem(harness.THRESHOLDS, "kittaneh", -1.0)
    code, out, _ = run(["verify", "--trials", "1", "--restarts", "2"], capsys)
    assert code == 1
    assert json.loads(out)["checks"]["kittaneh"]["failed"] > 0


def test_module_entry_point(t2_file):
    proc = subprocess.run([sys.executable, "-m", "modnr", "compute", "--input", t2_file, "--quantity", "norm"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["values"]["norm"] == pytest.approx(math.sqrt(2))
