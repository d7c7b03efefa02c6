import json
import subprocess
import sys

import pytest

from realmaps import cli


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _export(tmp_path, capsys, entry_id, *params):
    path = tmp_path / f"{entry_id}.json"
    argv = ["gallery", "export", "--id", entry_id, "--out", str(path)]
    for p in params:
        argv += ["--param", p]
    assert cli.main(argv) == 0
    return path


def test_gallery_list(capsys):
    code, out, _ = _run(capsys, "gallery", "list")
    assert code == 0
    assert "werner" in [e["id"] for e in json.loads(out)["entries"]]


def test_gallery_run_single(capsys):
    code, out, err = _run(capsys, "gallery", "run", "--id", "idempotent-ppt")
    assert code == 0
    assert "[PASS] idempotent-ppt:" in err
    report = json.loads(out)
    assert report["failures"] == 0 and report["build"].startswith("0.1.0")
    assert report["config"]["seed"] == 20240611


def test_gallery_run_with_params(capsys):
    code, out, _ = _run(capsys, "gallery", "run", "--id", "werner", "--param", "s=0.75")
    assert code == 0 and json.loads(out)["entries"][0]["params"]["s"] == 0.75


def test_exit_code_two_for_bad_input(capsys, tmp_path):
    assert _run(capsys, "gallery", "run", "--id", "no-such")[0] == 2
    assert _run(capsys, "gallery", "run", "--id", "werner", "--param", "s=2")[0] == 2
    assert _run(capsys, "gallery", "run", "--id", "werner", "--param", "s=abc")[0] == 2
    assert _run(capsys, "gallery", "bogus")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(capsys, "classify-map", "--in", str(bad))[0] == 2
    assert _run(capsys, "classify-map", "--in", str(tmp_path / "missing.json"))[0] == 2


def test_exit_code_three_for_dimension_mismatch(capsys, tmp_path):
    m = _export(tmp_path, capsys, "reduction-q", "n=3")
    s = _export(tmp_path, capsys, "werner")
    assert _run(capsys, "witness", "--map", str(m), "--state", str(s))[0] == 3


def test_classify_map_xz_reduction(capsys, tmp_path):
    path = _export(tmp_path, capsys, "xz-reduction")
    code, out, _ = _run(capsys, "classify-map", "--in", str(path), "--p", "1")
    assert code == 0
    rep = json.loads(out)
    cplx = rep["complexificationPPositive"][0]["verdict"]
    assert cplx["status"] == "REFUTED" and abs(cplx["value"] + 0.2) < 1e-6
    assert cplx["witness"]["kind"] == "real_pair"
    assert rep["pPositive"][0]["verdict"]["status"] != "REFUTED"


def test_classify_state_and_witness(capsys, tmp_path):
    s = _export(tmp_path, capsys, "werner", "s=0.6")
    code, out, _ = _run(capsys, "classify-state", "--in", str(s), "--field", "C")
    assert code == 0 and json.loads(out)["classification"]["sep"][0]["verdict"]["status"] == "CERTIFIED"
    code, out, _ = _run(capsys, "classify-state", "--in", str(s), "--field", "R")
    assert json.loads(out)["classification"]["sep"][0]["verdict"]["status"] == "REFUTED"
    m = _export(tmp_path, capsys, "xz-reduction")
    x = _export(tmp_path, capsys, "xz-pair-state")
    code, out, _ = _run(capsys, "witness", "--map", str(m), "--state", str(x))
    rep = json.loads(out)
    assert code == 0 and rep["negative"] and abs(rep["value"] + 0.2) < 1e-12


def test_iterate_json_lines(capsys, tmp_path):
    path = _export(tmp_path, capsys, "sym-depol", "lam=0.9")
    code, out, _ = _run(capsys, "iterate", "--in", str(path), "--kmax", "8")
    assert code == 0
    rows = [json.loads(line) for line in out.strip().splitlines()]
    assert [r["k"] for r in rows] == list(range(1, 9))
    assert all(r["iptDefect"] <= 1e-12 for r in rows)
    assert rows[-1]["sepCertified"] and "surrogates" in rows[0]


def test_probe_ipt2(capsys, tmp_path):
    ok = _export(tmp_path, capsys, "sym-depol", "lam=0.4")
    assert _run(capsys, "probe-ipt2", "--in", str(ok))[0] == 0
    not_ipt = _export(tmp_path, capsys, "idempotent-ppt")
    assert _run(capsys, "probe-ipt2", "--in", str(not_ipt))[0] == 2


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("REALMAP_SEED", "7")
    _, out, _ = _run(capsys, "gallery", "run", "--id", "diag-norm-trick")
    assert json.loads(out)["config"]["seed"] == 7
    _, out, _ = _run(capsys, "gallery", "run", "--id", "diag-norm-trick", "--seed", "9")
    assert json.loads(out)["config"]["seed"] == 9


def test_reports_are_deterministic(capsys, tmp_path):
    path = _export(tmp_path, capsys, "antisymmetrizer")
    first = _run(capsys, "classify-map", "--in", str(path), "--p", "2", "--restarts", "8")[1]
    second = _run(capsys, "classify-map", "--in", str(path), "--p", "2", "--restarts", "8")[1]
    assert first == second


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "realmaps.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("realmaps 0.1.0")
