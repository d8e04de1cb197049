import json
import subprocess
import sys

import pytest

from skewseries.cli import main

IWA_DOC = {"ring": {"kind": "group_algebra", "p": 3, "p_precision": 1, "group": "cyclic:9"},
           "sigma": {"h": "h^4"}, "delta": "sigma_minus_id", "t_precision": 3, "seed": 1}


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_validate_document(tmp_path, capsys):
    assert main(["validate", write(tmp_path, "iwa.json", IWA_DOC)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["valid"] and out["sigma_nilpotent"] and out["sigma_order"] == 3


def test_validate_rejects_bad_documents(tmp_path, capsys):
    assert main(["validate", write(tmp_path, "ring.json", dict(IWA_DOC, ring={"kind": "modular", "p": 9}))]) == 1
    assert main(["validate", write(tmp_path, "kind.json", dict(IWA_DOC, ring={"kind": "lie", "p": 3}))]) == 1
    assert main(["validate", str(tmp_path / "missing.json")]) == 1
    (tmp_path / "garbled.json").write_text("{ring:")
    assert main(["validate", str(tmp_path / "garbled.json")]) == 1
    capsys.readouterr()
    # h -> h^2 is an automorphism, but on Jac^k / Jac^(k+1) it acts by (-1)^k, so
    # sigma - id is invertible in odd degrees and never lands in higher radical powers
    assert main(["validate", write(tmp_path, "sq.json", dict(IWA_DOC, sigma={"h": "h^2"}))]) == 2
    out = json.loads(capsys.readouterr().out)
    assert out["valid"] and not out["sigma_nilpotent"]


def test_validate_non_nilpotent(capsys):
    assert main(["validate", "SWAP"]) == 2
    out = json.loads(capsys.readouterr().out)
    assert out["valid"] and not out["sigma_nilpotent"]


def test_run_swap_reports_violation(tmp_path, capsys):
    out = tmp_path / "swap.json"
    assert main(["run", "--suite", "nilpotence", "--instance", "SWAP", "--seed", "1", "--out", str(out)]) == 2
    report = json.loads(out.read_text())
    rec = next(r for r in report["records"] if r["name"] == "nilpotence.sigma_nilpotent")
    assert rec["status"] == "fail" and rec["witness"]["delta_squared_equals_delta"]
    capsys.readouterr()


def test_run_argument_errors(tmp_path, capsys):
    out = str(tmp_path / "r.json")
    with pytest.raises(SystemExit) as e:
        main(["run", "--suite", "nope", "--instance", "TRIV", "--seed", "1", "--out", out])
    assert e.value.code == 1
    assert main(["run", "--suite", "arith-oracle", "--instance", "nowhere.json", "--seed", "1", "--out", out]) == 1
    assert main(["run", "--suite", "arith-oracle", "--instance", "PX", "--seed", "1", "--out", out,
                 "--t-prec", "0"]) == 1
    capsys.readouterr()


def test_reports_are_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        d.mkdir()
        assert main(["run", "--suite", "filtration", "--instance", "PX", "--seed", "7",
                     "--out", str(d / "report.json")]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    report = json.loads((a / "report.json").read_text())
    names = [r["name"] for r in report["records"]]
    assert names == sorted(names)
    assert report["figures"] == ["report_filtration.png"]
    for fig in report["figures"]:
        assert (a / fig).read_bytes() == (b / fig).read_bytes()
        assert (a / fig).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert (a / "report.timings.json").exists()
    capsys.readouterr()


def test_precision_overrides(tmp_path, capsys):
    out = tmp_path / "zpt.json"
    assert main(["run", "--suite", "exactness", "--instance", "ZPT", "--seed", "1", "--p-prec", "3",
                 "--t-prec", "5", "--out", str(out), "--no-figures"]) == 0
    spec = json.loads(out.read_text())["instance_spec"]
    assert spec["ring"]["p_precision"] == 3 and spec["t_precision"] == 5
    doc = write(tmp_path, "z.json", {"ring": {"kind": "modular", "p": 3, "p_precision": 2},
                                     "sigma": "id", "delta": "zero", "t_precision": 4})
    assert main(["run", "--suite", "exactness", "--instance", doc, "--seed", "1", "--p-prec", "3",
                 "--out", str(out), "--no-figures"]) == 0
    assert json.loads(out.read_text())["instance_spec"]["ring"]["p_precision"] == 3
    capsys.readouterr()


def test_console_script(tmp_path):
    out = tmp_path / "triv.json"
    proc = subprocess.run([sys.executable, "-m", "skewseries.cli", "run", "--suite", "arith-oracle",
                           "--instance", "TRIV", "--seed", "3", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["passed"]
