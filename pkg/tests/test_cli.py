import json
from importlib import resources

import pytest

from subweyl.cli import main, zeta_grid

ROW = str(resources.files("subweyl") / "data" / "tail_exp875.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_certify_tail_row(capsys):
    code, out, _ = run(capsys, "certify", "--params", ROW)
    assert code == 0 and "PASS" in out


def test_certify_json_report(capsys):
    code, out, _ = run(capsys, "certify", "--params", ROW, "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["kind"] == "certify"
    assert doc["payload"]["A_total"]["direction"] == "UP"
    assert len(doc["provenance"]["input_sha256"]) == 64


def test_certify_threshold_exceeded(capsys):
    code, out, _ = run(capsys, "certify", "--params", ROW, "--threshold", "1.0")
    assert code == 1 and "FAIL" in out


def test_certify_inadmissible(capsys):
    code, _, err = run(capsys, "certify", "--params", ROW, "--set", "h1=0.9")
    assert code == 2 and "h1 > 1" in err


def test_certify_bad_set(capsys):
    code, _, _ = run(capsys, "certify", "--params", ROW, "--set", "zz=1")
    assert code == 2


def test_malformed_scheme_file(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"version": 1, "rows": [{"log_t0": "875"}]}')
    code, _, err = run(capsys, "table", "--params", str(p))
    assert code == 2 and "missing" in err


def test_missing_file(capsys):
    code, _, _ = run(capsys, "export", "--params", "/nonexistent/x.json")
    assert code == 2


def test_verify_lemmas_reproducible(capsys):
    a = run(capsys, "verify-lemmas", "--trials", "2", "--seed", "5")
    b = run(capsys, "verify-lemmas", "--trials", "2", "--seed", "5")
    assert a[0] == 0 and a[1] == b[1]


def test_verify_lemmas_unknown(capsys):
    assert run(capsys, "verify-lemmas", "--lemmas", "nope")[0] == 2


def test_crossover_constant(capsys):
    code, out, _ = run(capsys, "crossover", "--constant", "66.7", "--against", "hpy_2022", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and abs(float(doc["payload"]["log_t"]["value"]) - 104.7228) < 2e-3


def test_crossover_none(capsys):
    code, _, err = run(capsys, "crossover", "--constant", "66.7", "--against", "patel_307")
    assert code == 1 and "no crossover" in err


def test_optimize_and_export(tmp_path, capsys):
    out = tmp_path / "s.json"
    code, _, _ = run(capsys, "optimize", "--t0", "800", "--breakpoints", "875", "--budget", "40",
                     "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["meta"]["seed"] == 0 and len(doc["rows"]) == 2
    code, csv_text, _ = run(capsys, "export", "--params", str(out))
    assert code == 0 and csv_text.count("\r\n") == 3
    code, table, _ = run(capsys, "table", "--params", str(out), "--threshold", "1000")
    assert code == 0 and "MISMATCH" not in table


def test_zeta_check_small(capsys):
    code, out, _ = run(capsys, "zeta-check", "--points", "3", "--t-max", "1e4")
    assert code == 0 and json.loads(out)["payload"]["failures"] == 0


def test_zeta_grid():
    g = zeta_grid()
    assert len(g) == 50 and g[0] == 200.0 and abs(g[-1] - 1e8) < 1e-3
