import json
import subprocess
import sys
from pathlib import Path

import pytest

from hullinv.cli import main

MODELS = Path(__file__).parent / "models"


def test_valid_exit_code_and_json(capsys):
    assert main(["prove", "double_counter", "--json"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["status"] == "valid" and d["lemmas"] == ["x - y <= 4"]


def test_falsified_exit_code(capsys):
    assert main(["prove", str(MODELS / "double_counter_bad.ts")]) == 1
    assert "FALSIFIED" in capsys.readouterr().out


def test_unknown_exit_code(capsys):
    assert main(["prove", "three_timer", "--max-preimages", "1"]) == 2


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ts"
    bad.write_text("system b { state x: int; init: x = 0; trans: x' = q; property: x >= 0; }")
    assert main(["prove", str(bad)]) == 3
    assert "bad.ts:1:" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main(["prove", "no/such/model.ts"]) == 3
    with pytest.raises(SystemExit) as info:
        main(["prove", "double_counter", "--max-k", "0"])
    assert info.value.code == 3
    with pytest.raises(SystemExit) as info:
        main(["prove", "double_counter", "--set", "oops"])
    assert info.value.code == 3


def test_constant_override(capsys):
    assert main(["prove", "double_counter", "--set", "nx=100", "--set", "ny=60"]) == 0
    assert "x - y <= 40" in capsys.readouterr().out


def test_replay_round_trip(tmp_path, capsys):
    log = tmp_path / "log.json"
    assert main(["prove", "double_counter", "--json"]) == 0
    log.write_text(capsys.readouterr().out)
    assert main(["prove", "double_counter", "--replay", str(log)]) == 0
    assert "confirmed" in capsys.readouterr().out
    data = json.loads(log.read_text())
    data["certificate"]["lemmas"] = []
    log.write_text(json.dumps(data))
    assert main(["prove", "double_counter", "--replay", str(log)]) == 1


def test_dump_files(tmp_path):
    pre, hulls = tmp_path / "pre.txt", tmp_path / "hulls.txt"
    assert main(["prove", "double_counter", "--dump-preimages", str(pre), "--dump-hulls", str(hulls)]) == 0
    assert "{x = 8, y >= 0, y <= 3}" in pre.read_text()
    assert hulls.read_text().startswith("# after preimage 1")


def test_bad_solver_command(capsys):
    assert main(["prove", "double_counter", "--solver", "no-such-solver-binary"]) == 3


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "hullinv", "prove", "stutter"], capture_output=True, text=True, timeout=120
    )
    assert out.returncode == 0 and "VALID" in out.stdout
