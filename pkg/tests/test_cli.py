import hashlib
import json
import subprocess
import sys

import pytest

from crowdcov.cli import main
from crowdcov.engines import run_engine
from crowdcov.semantics import format_witness

from conftest import CORPUS, LEADER_TEXT, load


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name,code", [
    ("leader_broadcast.crowd", 1),
    ("leader_broadcast_unique.crowd", 0),
    ("rv_pair.crowd", 1),
    ("lockstore_mutex.crowd", 0),
])
def test_check_exit_codes(capsys, name, code):
    got, out, _ = run(capsys, "check", CORPUS / name)
    assert got == code
    assert out.startswith("COVERABLE" if code else "SAFE")


def test_check_oracle_bounded(capsys):
    code, out, _ = run(capsys, "check", CORPUS / "leader_broadcast_unique.crowd",
                       "--engine", "oracle", "--oracle-n", "6")
    assert code == 4
    assert out.startswith("SAFE-UP-TO(6)")


def test_check_km_on_broadcast_is_inapplicable(capsys):
    code, _, err = run(capsys, "check", CORPUS / "leader_broadcast.crowd", "--engine", "km")
    assert code == 3
    assert "not applicable" in err


def test_check_invalid_template(tmp_path, capsys):
    f = tmp_path / "raw.crowd"
    f.write_text(LEADER_TEXT)
    code, out, err = run(capsys, "check", f)
    assert code == 2
    assert "receive-totality" in err
    assert run(capsys, "check", f, "--complete-receives")[0] == 1


def test_check_parse_error_and_missing_file(tmp_path, capsys):
    f = tmp_path / "bad.crowd"
    f.write_text("semantics broadcast\nstates a\ninit a=x\ntarget a\n")
    code, _, err = run(capsys, "check", f)
    assert code == 2 and "line 3" in err
    code, _, err = run(capsys, "check", tmp_path / "nope.crowd")
    assert code == 2 and "cannot read" in err


def test_bad_arguments(capsys):
    assert main(["check"]) == 2
    assert main(["check", "x.crowd", "--engine", "magic"]) == 2
    capsys.readouterr()


def test_check_json_schema(capsys):
    path = CORPUS / "rv_leader.crowd"
    code, out, _ = run(capsys, "check", path, "--json", "--witness")
    assert code == 1
    payload = json.loads(out)
    assert set(payload) == {"verdict", "engine", "digest", "stats", "time_ms", "n", "witness"}
    assert payload["verdict"] == "COVERABLE"
    assert payload["engine"] == "backward"
    assert payload["digest"] == hashlib.sha256(path.read_bytes()).hexdigest()
    assert payload["n"] == 2


def test_check_json_invalid(tmp_path, capsys):
    f = tmp_path / "raw.crowd"
    f.write_text(LEADER_TEXT)
    code, out, _ = run(capsys, "check", f, "--json")
    payload = json.loads(out)
    assert code == 2
    assert payload["verdict"] == "INVALID"
    assert len(payload["violations"]) == 2


def test_check_text_witness(capsys):
    code, out, _ = run(capsys, "check", CORPUS / "leader_broadcast.crowd", "--engine", "backward", "--witness")
    assert code == 1
    assert out.split("witness:\n")[1] == "n 1\ninit q1=1\nstep q1 a!! q2\n"


def test_check_budget_exit(capsys):
    code, _, _ = run(capsys, "check", CORPUS / "lockstore_mutex.crowd", "--engine", "oracle",
                     "--budget", "3")
    assert code == 4


def test_explore_counts(capsys):
    code, out, _ = run(capsys, "explore", CORPUS / "leader_broadcast.crowd", 3)
    assert code == 0
    assert out.splitlines() == ["{q2:1, q3:2}", "{q1:3}", "configs=2"]
    code, out, _ = run(capsys, "explore", CORPUS / "rv_pair.crowd", 0)
    assert out.splitlines() == ["{}", "configs=1"]
    code, out, _ = run(capsys, "explore", CORPUS / "rv_pair.crowd", 2)
    assert out.splitlines()[-1] == "configs=2"


def test_explore_budget(capsys):
    code, _, err = run(capsys, "explore", CORPUS / "lockstore_mutex.crowd", 3, "--budget", 4)
    assert code == 4 and "budget" in err


def test_explore_below_fixed(capsys):
    code, _, err = run(capsys, "explore", CORPUS / "rv_leader.crowd", 0)
    assert code == 2 and "below" in err


def test_validate(tmp_path, capsys):
    assert run(capsys, "validate", CORPUS / "lockstore_leader.crowd")[:2] == (0, "valid\n")
    f = tmp_path / "raw.crowd"
    f.write_text(LEADER_TEXT)
    code, out, _ = run(capsys, "validate", f, "--json")
    assert code == 2
    assert json.loads(out)["valid"] is False


def test_compile(capsys):
    code, out, _ = run(capsys, "compile", CORPUS / "rv_pair.crowd")
    assert code == 0
    assert out.splitlines()[0] == "places q1 q3 q4"
    assert [line for line in out.splitlines() if line.startswith("ordinary")] == [
        "ordinary t0 pre {q1:2} post {q3:1, q4:1}  # q1 v! q3 + q1 v? q4"]


def test_replay(tmp_path, capsys):
    t = load("lockstore_leader_done.crowd")
    _, v = run_engine(t, witness=True)
    w = tmp_path / "w.txt"
    w.write_text(format_witness(t, v.witness))
    code, out, _ = run(capsys, "replay", CORPUS / "lockstore_leader_done.crowd", w)
    assert code == 0
    assert out.splitlines()[-1] == f"ACCEPTED: {len(v.witness.steps)} steps, n={v.witness.n}"
    # the same witness against a different target is rejected
    code, out, _ = run(capsys, "replay", CORPUS / "lockstore_leader.crowd", w)
    assert code == 1 and out.startswith("REJECTED")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "crowdcov", "check", str(CORPUS / "rv_pair.crowd")],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert proc.stdout.startswith("COVERABLE")
