"""Command-line behavior: exit codes, artifacts, formats, env handling.

Drives main(argv) in-process; one subprocess test covers the module
entry point.  Exit code contract: 0 success or expected outcome, 1
checked-and-failed, 2 invalid input.
"""

import json
import subprocess
import sys

import pytest

from hyptor.cli import WORKERS_ENV, main

TAU = "0/1+1/1i"
TAU_PRIME = "0/1+2/1i"


def run(capsys, argv):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


@pytest.fixture()
def cert_path(tmp_path, capsys):
    path = tmp_path / "cert.json"
    code, _, _ = run(capsys, ["construct", "--tau", TAU, "--tau-prime", TAU_PRIME, "--out", str(path)])
    assert code == 0
    return path


# ------------------------------------------------------------- construct


def test_construct_writes_artifact(tmp_path, capsys):
    path = tmp_path / "cert.json"
    code, out, err = run(
        capsys, ["construct", "--tau", TAU, "--tau-prime", TAU_PRIME, "--out", str(path)]
    )
    assert code == 0
    assert err == ""
    assert json.loads(out) == {"ok": True, "out": str(path)}
    doc = json.loads(path.read_text())
    assert doc["group"]["order"] == 8
    assert len(doc["fixed_point_witnesses"]) == 7
    assert doc["no_translations"] is True
    # no stray temp files from the atomic write
    assert [p.name for p in tmp_path.iterdir()] == ["cert.json"]


def test_construct_stdout_json(capsys):
    code, out, _ = run(capsys, ["construct", "--tau", TAU, "--tau-prime", TAU_PRIME])
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "1.0"
    assert doc["case"] == "case1"


def test_construct_text_format(capsys):
    code, out, _ = run(
        capsys, ["construct", "--tau", TAU, "--tau-prime", TAU_PRIME, "--format", "text"]
    )
    assert code == 0
    assert "constructed free action" in out
    assert "group order 8" in out
    assert "no translations" in out


def test_construct_overwrites_atomically(tmp_path, capsys):
    path = tmp_path / "cert.json"
    path.write_text("not json at all")
    code, _, _ = run(
        capsys, ["construct", "--tau", TAU, "--tau-prime", TAU_PRIME, "--out", str(path)]
    )
    assert code == 0
    assert json.loads(path.read_text())["group"]["order"] == 8


def test_construct_malformed_tau(capsys):
    code, _, err = run(capsys, ["construct", "--tau", "abc", "--tau-prime", TAU_PRIME])
    assert code == 2
    assert err.startswith("error:")


def test_construct_tau_lower_half_plane(capsys):
    code, _, err = run(capsys, ["construct", "--tau", "0/1+-1/1i", "--tau-prime", TAU_PRIME])
    assert code == 2
    assert "error:" in err


def test_construct_malformed_shift(capsys):
    code, _, err = run(
        capsys, ["construct", "--tau", TAU, "--tau-prime", TAU_PRIME, "--h", "1/2"]
    )
    assert code == 2
    assert "comma-separated" in err


def test_construct_zero_h_names_condition(capsys):
    code, _, err = run(
        capsys, ["construct", "--tau", TAU, "--tau-prime", TAU_PRIME, "--h", "0/1,0/1"]
    )
    assert code == 1
    assert "h must be a nonzero 2-torsion point" in err


def test_construct_non_two_torsion_h(capsys):
    code, _, err = run(
        capsys, ["construct", "--tau", TAU, "--tau-prime", TAU_PRIME, "--h", "1/3,0/1"]
    )
    assert code == 1
    assert "2-torsion" in err


def test_construct_unwritable_out(tmp_path, capsys):
    code, _, err = run(
        capsys,
        [
            "construct",
            "--tau",
            TAU,
            "--tau-prime",
            TAU_PRIME,
            "--out",
            str(tmp_path / "missing-dir" / "cert.json"),
        ],
    )
    assert code == 2
    assert "error:" in err


# ---------------------------------------------------------------- verify


def test_verify_fresh_certificate(cert_path, capsys):
    code, out, _ = run(capsys, ["verify", str(cert_path)])
    assert code == 0
    assert json.loads(out) == {"ok": True, "failures": []}

    code, out, _ = run(capsys, ["verify", str(cert_path), "--format", "text"])
    assert code == 0
    assert "all checks pass" in out


def test_verify_tampered_flag(cert_path, capsys):
    doc = json.loads(cert_path.read_text())
    doc["no_translations"] = False
    cert_path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, ["verify", str(cert_path)])
    assert code == 1
    payload = json.loads(out)
    assert payload["ok"] is False
    assert payload["failures"]


def test_verify_integral_obstruction_names_word(cert_path, capsys):
    doc = json.loads(cert_path.read_text())
    word = doc["fixed_point_witnesses"][0]["word"]
    doc["fixed_point_witnesses"][0]["row"] = [0] * 6
    doc["fixed_point_witnesses"][0]["value"] = "0/1"
    cert_path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, ["verify", str(cert_path)])
    assert code == 1
    failures = json.loads(out)["failures"]
    assert any(word in f and "integral" in f for f in failures)


def test_verify_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, ["verify", str(tmp_path / "nope.json")])
    assert code == 2
    assert "cannot read" in err


def test_verify_truncated_json(cert_path, capsys):
    text = cert_path.read_text()
    cert_path.write_text(text[: len(text) // 2])
    code, _, err = run(capsys, ["verify", str(cert_path)])
    assert code == 2
    assert "malformed JSON" in err


def test_verify_not_a_certificate(tmp_path, capsys):
    path = tmp_path / "x.json"
    path.write_text('{"x": 1}')
    code, _, err = run(capsys, ["verify", str(path)])
    assert code == 2
    assert "schema" in err


# -------------------------------------------------------------- classify


def test_classify_case1_finds_expected_survivors(tmp_path, capsys):
    path = tmp_path / "census.json"
    code, out, _ = run(
        capsys,
        [
            "classify",
            "--case",
            "1",
            "--max-denominator",
            "4",
            "--h-generators-max",
            "1",
            "--out",
            str(path),
            "--format",
            "text",
        ],
    )
    assert code == 0
    assert "survivors: 72" in out
    assert "expected outcome: yes" in out
    doc = json.loads(path.read_text())
    assert doc["survivor_count"] == 72
    assert doc["total"] == 225280


def test_classify_case2_refuted(capsys):
    code, out, _ = run(
        capsys,
        ["classify", "--case", "2", "--max-denominator", "2", "--h-generators-max", "1"],
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["survivor_count"] == 0
    assert doc["case"] == "case2"


def test_classify_accepts_case_aliases(capsys):
    code, out, _ = run(
        capsys,
        ["classify", "--case", "case2", "--max-denominator", "2", "--h-generators-max", "1"],
    )
    assert code == 0
    assert json.loads(out)["case"] == "case2"


def test_classify_trivial_grid_is_checked_failure(capsys):
    # denominator 1 leaves only the zero shift, so case 1 finds nothing
    code, out, _ = run(
        capsys, ["classify", "--case", "1", "--max-denominator", "1", "--format", "text"]
    )
    assert code == 1
    assert "survivors: 0" in out
    assert "expected outcome: no" in out


def test_classify_bad_flags(capsys):
    code, _, err = run(capsys, ["classify", "--case", "7"])
    assert code == 2
    assert "unknown case" in err

    code, _, err = run(capsys, ["classify", "--case", "1", "--max-denominator", "0"])
    assert code == 2

    code, _, err = run(capsys, ["classify", "--case", "1", "--workers", "0"])
    assert code == 2


def test_classify_workers_env(monkeypatch, capsys):
    monkeypatch.setenv(WORKERS_ENV, "not-a-number")
    code, _, err = run(capsys, ["classify", "--case", "2", "--max-denominator", "1"])
    assert code == 2
    assert WORKERS_ENV in err

    # explicit flag wins over a broken environment
    code, _, _ = run(
        capsys, ["classify", "--case", "2", "--max-denominator", "1", "--workers", "1"]
    )
    assert code == 0

    monkeypatch.setenv(WORKERS_ENV, "2")
    code, _, _ = run(capsys, ["classify", "--case", "2", "--max-denominator", "1"])
    assert code == 0


# ------------------------------------------------------------ invariants


def test_invariants_pipeline(cert_path, tmp_path, capsys):
    out_path = tmp_path / "inv.json"
    code, out, _ = run(capsys, ["invariants", str(cert_path), "--out", str(out_path)])
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["hodge"] == [[1, 0, 0, 1], [0, 2, 2, 0], [0, 2, 2, 0], [1, 0, 0, 1]]
    assert doc["betti"] == [1, 0, 2, 6, 2, 0, 1]

    code, out, _ = run(capsys, ["invariants", str(cert_path), "--format", "text"])
    assert code == 0
    assert "Betti numbers b_0..b_6: 1 0 2 6 2 0 1" in out


def test_invariants_refuses_tampered_certificate(cert_path, capsys):
    doc = json.loads(cert_path.read_text())
    doc["group"]["order"] = 7
    cert_path.write_text(json.dumps(doc))
    code, _, err = run(capsys, ["invariants", str(cert_path)])
    assert code == 1
    assert "refusing" in err


def test_invariants_missing_file(tmp_path, capsys):
    code, _, _ = run(capsys, ["invariants", str(tmp_path / "gone.json")])
    assert code == 2


# ------------------------------------------------------------- plumbing


def test_unknown_arguments():
    assert main(["construct", "--tau", TAU, "--tau-prime", TAU_PRIME, "--bogus"]) == 2
    assert main(["frobnicate"]) == 2
    assert main([]) == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "hyptor", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    for cmd in ("construct", "verify", "classify", "invariants"):
        assert cmd in proc.stdout
