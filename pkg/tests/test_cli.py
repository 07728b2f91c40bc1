import json
import subprocess
import sys

import pytest

from freedim.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    rep = json.loads(out)
    assert set(rep) >= {"command", "config", "versions", "results"}
    assert rep["config"]["seed"] is not None
    return rep["results"]


def test_parse_and_derive(capsys):
    r = report(capsys, "parse", "--poly", "X1 X2 + X2' X1'", "--n", "2")
    assert r["polynomials"][0]["self_adjoint"] is True
    r = report(capsys, "derive", "--poly", "X2 X1 - X1' X2'", "--n", "2", "--calc", "sa")
    assert r["matrix"]["rows"] == 1 and r["matrix"]["cols"] == 2
    r = report(capsys, "derive", "--poly", "X2 X1 X2 X1", "--n", "2", "--calc", "u")
    assert "X1' X2' (x) X2 X1" in r["text"]


def test_spectral_commands(capsys):
    common = ["--poly", "X2 X1 - X1' X2'", "--n", "2", "--calc", "sa",
              "--kind", "commuting_diagonal", "--k", "8"]
    r = report(capsys, "nullity", *common)
    assert r["nullity"] == pytest.approx(1.125) and r["kernel_count"] == 72
    r = report(capsys, "fkl", *common)
    assert 0 < r["fkl"] < 1
    code, out, _ = run(capsys, "spectrum", *common, "--format", "csv")
    assert code == 0 and out.startswith("index,value") and len(out.splitlines()) == 129
    code, out, _ = run(capsys, "decay", *common[:-2], "--ks", "4", "8", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "k,N,tail_sum"


def test_eval_with_input_file(capsys, tmp_path):
    f = tmp_path / "xi.json"
    f.write_text(json.dumps({"k": 2, "n": 1, "mats": [{"re": [[0, 1], [0, 0]]}]}))
    r = report(capsys, "eval", "--poly", "X1 X1", "--input", str(f))
    assert r["values"]["mats"][0]["re"] == [[0, 0], [0, 0]]


def test_covering_commands(capsys, tmp_path):
    pts = tmp_path / "p.csv"
    pts.write_text("0\n1\n")
    r = report(capsys, "cover", "--input", str(pts), "--eps", "0.6", "--restricted")
    assert (r["K"], r["S"]) == (2, 2)
    r = report(capsys, "cover", "--input", str(pts), "--eps", "0.6")
    assert r["K"] == 1
    code, out, _ = run(capsys, "dimfit", "--shape", "square", "--points", "500",
                       "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "eps,K,S"
    r = report(capsys, "rogers", "--d", "16", "--eps", "0.5")
    assert r["bound"] == 67108864.0


def test_volume_and_sequence(capsys):
    r = report(capsys, "volume", "--k", "1")
    assert r["log_volume"] == pytest.approx(1.1447298858494002)
    code, out, _ = run(capsys, "a3seq", "--kmax", "40", "--format", "csv")
    last = out.strip().splitlines()[-1].split(",")
    assert code == 0 and last[0] == "40" and abs(float(last[1]) + 0.5) < 0.05


def test_binding_and_chebproj(capsys):
    r = report(capsys, "binding", "--poly", "X1 X1", "--k", "6", "--pairs", "5")
    assert r["B"] == 128.0 and r["binding"]["holds"]
    r = report(capsys, "chebproj", "--k", "8", "--C", "2")
    assert r["holds"] and "p" not in r["certificate"]


def test_verify_and_examples(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "prop21", "--trials", "50", "--seed", "1")
    assert code == 0 and json.loads(out)["results"]["holds"]
    out_file = tmp_path / "ex.json"
    code, _, _ = run(capsys, "example", "ex4.1", "--k", "16", "--seed", "7", "--out", str(out_file))
    rep = json.loads(out_file.read_text())
    assert code == 0 and rep["results"]["results"][0]["nullity"] == 1.0625
    assert rep["results"]["decay"]["rows"]


def test_usage_errors(capsys):
    assert run(capsys, "example", "bogus")[0] == 2
    assert run(capsys, "nullity", "--poly", "X1 +")[0] == 2
    assert run(capsys, "nullity")[0] == 2
    assert run(capsys, "rogers", "--d", "3", "--eps", "-1")[0] == 2
    assert run(capsys, "binding", "--poly", "X1", "--format", "csv")[0] == 2
    assert run(capsys)[0] == 2
    code, _, err = run(capsys, "fkl", "--n", "1", "--poly", "X1", "--k", "200")
    assert code == 2 and "reduce --k" in err


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "freedim", "rogers", "--d", "16", "--eps", "0.5",
                        "--format", "csv"], capture_output=True, text=True)
    assert p.returncode == 0 and "bound,67108864.0" in p.stdout
