from __future__ import annotations

import json

import pytest

from superaut.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dims_sho_bar_table(capsys):
    code, out, _ = run(capsys, "dims", "--p", "5", "--m", "2", "--t", "1,1", "--algebra", "SHO-bar")
    assert code == 0
    rows = {int(a): int(b) for a, b in (line.split() for line in out.splitlines()[2:-1])}
    assert sorted(rows) == list(range(-1, 7)) and rows[6] == 1


def test_dims_w_json(capsys):
    code, out, _ = run(capsys, "dims", "--algebra", "W", "--format", "json")
    assert code == 0 and json.loads(out)["total"] == 400


def test_bad_parameters_exit_2(capsys):
    code, _, err = run(capsys, "dims", "--p", "2")
    assert code == 2 and "p must be a prime" in err
    code, _, err = run(capsys, "dims", "--t", "1,x")
    assert code == 2


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 2


def test_verify_restricted_t21(capsys):
    code, out, _ = run(capsys, "verify", "restricted", "--p", "5", "--m", "2", "--t", "2,1")
    assert code == 0
    assert "not restricted SHO" in out and "witness" in out


def test_verify_failure_exit_1_with_diagnostics(capsys):
    code, out, err = run(capsys, "verify", "lemma11", "--m", "2")
    assert code == 1
    assert "FAIL" in out and json.loads(err)["failed"][0]["item"] == "1.1(5)"


def test_verify_json_format(capsys):
    code, out, _ = run(capsys, "verify", "lemma11", "--m", "3", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and rep["suite"] == "lemma11"


def test_export_import_roundtrip(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SUPERAUT_OUTPUT_DIR", str(tmp_path))
    assert run(capsys, "export", "--algebra", "SHO", "--output", "sho.json")[0] == 0
    path = tmp_path / "sho.json"
    text = path.read_text()
    assert json.loads(text)["header"] == {"p": 5, "m": 2, "t": [1, 1], "algebra": "SHO"}
    code, out, _ = run(capsys, "import", str(path), "--format", "json")
    assert code == 0 and json.loads(out)["matches_built"]
    assert run(capsys, "export", "--algebra", "SHO", "--output", "again.json")[0] == 0
    assert (tmp_path / "again.json").read_text() == text


def test_import_rejects_corruption(capsys, tmp_path):
    code, text, _ = run(capsys, "export", "--algebra", "SHO")
    doc = json.loads(text)
    doc["structure"][3]["result"][0][1] = doc["structure"][3]["result"][0][1] % 4 + 1
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out, err = run(capsys, "import", str(path), "--format", "json")
    assert code == 1 and "import rejected" in err
    assert json.loads(out)["accepted"] is False


def test_import_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "import", str(tmp_path / "missing.json"))
    assert code == 2 and "cannot read" in err


def test_aut_sample_and_check(capsys, tmp_path):
    out = tmp_path / "s.json"
    assert run(capsys, "aut-sample", "--algebra", "SHO", "--seed", "1", "--depth", "1",
               "--output", str(out))[0] == 0
    doc = json.loads(out.read_text())
    assert doc["depth"] == 1 and len(doc["images"]) == 4
    code, text, _ = run(capsys, "aut-check", str(out), "--format", "json")
    rep = json.loads(text)
    assert code == 0 and rep["admissible"] and rep["depth"] == 1
    # same seed, same bytes
    out2 = tmp_path / "s2.json"
    run(capsys, "aut-sample", "--algebra", "SHO", "--seed", "1", "--depth", "1", "--output", str(out2))
    assert out2.read_text() == out.read_text()


def test_aut_check_matrix_and_corruption(capsys, tmp_path):
    out = tmp_path / "g.json"
    run(capsys, "aut-sample", "--algebra", "SHO", "--seed", "2", "--depth", "2", "--matrix",
        "--output", str(out))
    code, text, _ = run(capsys, "aut-check", str(out), "--format", "json")
    rep = json.loads(text)
    assert code == 0 and rep["admissible"] and rep["depth"] == 2
    doc = json.loads(out.read_text())
    doc["matrix"][5][7] = (doc["matrix"][5][7] + 1) % 5
    out.write_text(json.dumps(doc))
    code, text, _ = run(capsys, "aut-check", str(out), "--format", "json")
    assert code == 1 and not json.loads(text)["admissible"]


def test_aut_check_invalid_images(capsys, tmp_path):
    doc = {"params": {"p": 5, "m": 2, "t": [1, 1]},
           "images": [[{"alpha": [0, 0], "u": [3], "c": 1}], [{"alpha": [0, 1], "u": [], "c": 1}],
                      [{"alpha": [1, 0], "u": [], "c": 1}], [{"alpha": [0, 0], "u": [4], "c": 1}]]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "aut-check", str(path), "--algebra", "SHO")
    assert code == 1 and "NOT admissible" in out
