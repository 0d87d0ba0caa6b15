import json
import subprocess
import sys

import pytest

from locc_activate.cli import main
from locc_activate.protocol import shipped_protocol_files


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_construct_s1(capsys):
    code, out, _ = run(capsys, "construct", "s1")
    assert code == 0
    assert out.count("psi_") == 4
    assert "psi_1 = 1/2 |0,0> + 1/2 |0,2> + 1/2 |1,1> - 1/2 |1,3>" in out
    assert "Gram = identity" in out


def test_construct_s5_three_parties(capsys):
    code, out, _ = run(capsys, "construct", "s5", "--n", "3")
    assert code == 0
    assert "eta_0(+) = 1/2 |0,0,0> + 1/2 |1,1,1> + 1/2 |2,0,0> - 1/2 |3,1,1>" in out
    assert out.count("eta_") == 8


def test_construct_s2_renders_root_two(capsys):
    code, out, _ = run(capsys, "construct", "s2")
    assert code == 0
    assert "1/(2√2)" in out


@pytest.mark.parametrize("argv", [
    ["construct", "s5", "--n", "1"],
    ["construct", "s5", "--n", "9"],
    ["construct", "nope"],
    ["construct", "s1", "--tol", "0.1"],
    ["construct", "s1", "--tol", "-1"],
    ["construct", "s3", "--indices", "1,x"],
])
def test_construct_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_env_tolerance(capsys, monkeypatch):
    monkeypatch.setenv("LOCC_TOL", "1e-2")
    code, _, err = run(capsys, "construct", "s1")
    assert code == 2
    monkeypatch.setenv("LOCC_TOL", "1e-9")
    code, out, _ = run(capsys, "construct", "s1")
    assert code == 0 and "tol 1e-09" in out


def test_construct_doc_is_json(capsys):
    code, out, _ = run(capsys, "construct", "bell4", "--format", "doc")
    doc = json.loads(out)
    assert code == 0
    assert [m["label"] for m in doc["members"]] == ["phi+", "phi-", "psi+", "psi-"]
    assert doc["members"][0]["terms"] == [["1/√2", "|0,0>"], ["1/√2", "|1,1>"]]


def test_run_prop4_table(capsys):
    code, out, _ = run(capsys, "run", "--builtin", "prop4", "--n", "3", "--set", "s5")
    assert code == 0
    assert "8/8 identified" in out
    lines = out.splitlines()
    start = next(i for i, line in enumerate(lines) if line.strip().startswith("00"))
    body = [line.split() for line in lines[start + 2:start + 6]]
    assert [row[0] for row in body] == ["N1", "N2", "N3", "N4"]
    assert [c for c in body[2] if c.startswith("eta")] == ["eta_3(-)", "eta_2(-)", "eta_1(-)", "eta_0(-)"]


def test_run_prop1(capsys):
    code, out, _ = run(capsys, "run", "--builtin", "prop1", "--set", "s1")
    assert code == 0
    assert "4/4 identified" in out


def test_run_uses_declared_family(capsys, tmp_path):
    path = tmp_path / "p.locc"
    path.write_text(shipped_protocol_files()["prop4_n3.locc"])
    code, out, _ = run(capsys, "run", "--protocol", str(path))
    assert code == 0
    assert "8/8" in out


def test_run_broken_protocol(capsys, tmp_path):
    text = shipped_protocol_files()["prop1.locc"]
    broken = text.replace('      (case "1-3" (identify psi_1)))))', "      )))")
    assert broken != text
    path = tmp_path / "broken.locc"
    path.write_text(broken)
    code, _, err = run(capsys, "run", "--protocol", str(path), "--set", "s1")
    assert code == 2
    assert "coverage error" in err
    assert "line" in err


def test_run_syntax_error_location(capsys, tmp_path):
    path = tmp_path / "bad.locc"
    path.write_text("layout A(a:2) B(b:2)\n(measure A\n")
    code, _, err = run(capsys, "run", "--protocol", str(path), "--set", "bell4")
    assert code == 2
    assert "line 3" in err or "line 2" in err


def test_run_wrong_identification_exits_three(capsys, tmp_path):
    text = shipped_protocol_files()["prop1.locc"].replace(
        '(case "0+2" (identify psi_1))', '(case "0+2" (identify psi_2))', 1)
    path = tmp_path / "wrong.locc"
    path.write_text(text)
    code, out, _ = run(capsys, "run", "--protocol", str(path), "--set", "s1")
    assert code == 3
    assert "FAIL psi_1" in out


def test_run_needs_exactly_one_source(capsys):
    code, _, _ = run(capsys, "run", "--set", "s1")
    assert code == 2
    code, _, _ = run(capsys, "run", "--set", "s1", "--builtin", "prop1", "--protocol", "x")
    assert code == 2


def test_run_layout_mismatch(capsys):
    code, _, err = run(capsys, "run", "--builtin", "prop1", "--set", "s2")
    assert code == 2
    assert "layout" in err


def test_verify_all_single_claim(capsys):
    code, out, _ = run(capsys, "verify-all", "--claim", "th:b2")
    assert code == 0
    assert out.startswith("[PASS] th:b2")
    assert "1/1 claims pass; wall time" in out


def test_verify_all_doc_is_deterministic(capsys, tmp_path):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify-all", "--claim", "prop1", "--claim", "theo5", "--format", "doc",
                 "--out", str(p1)]) == 0
    assert main(["verify-all", "--claim", "prop1", "--claim", "theo5", "--format", "doc",
                 "--out", str(p2), "--jobs", "2"]) == 0
    assert p1.read_text() == p2.read_text()
    doc = json.loads(p1.read_text())
    assert doc["passed"] is True
    assert "seconds" not in p1.read_text()


def test_verify_all_tight_tolerance_reports_residual(capsys):
    code, out, _ = run(capsys, "verify-all", "--claim", "th:b1", "--tol", "1e-15")
    assert code in (0, 3)
    assert "max residual" in out


def test_verify_all_unknown_claim(capsys):
    code, _, _ = run(capsys, "verify-all", "--claim", "nope")
    assert code == 2


def test_scan_redundancy(capsys):
    code, out, _ = run(capsys, "scan-redundancy", "--set", "s1")
    assert code == 0
    assert "discard b1" in out
    assert "psi_3=psi_4" in out


def test_scan_redundancy_pattern_and_doc(capsys):
    code, out, _ = run(capsys, "scan-redundancy", "--set", "s2", "--pattern", "A2,B2",
                       "--format", "doc")
    assert code == 0
    ev = json.loads(out)["reports"][0]["evidence"]
    assert len(ev) == 1
    assert ev[0]["value"].startswith("orthogonal")


def test_scan_all_patterns(capsys):
    code, out, _ = run(capsys, "scan-redundancy", "--set", "s1", "--all-patterns")
    assert code == 0
    assert "(6 patterns" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "locc_activate", "construct", "ghz", "--n", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert "G_0(+) = 1/√2 |0,0> + 1/√2 |1,1>" in res.stdout
