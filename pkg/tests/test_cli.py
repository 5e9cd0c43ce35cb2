import io
import json
import subprocess
import sys

import pytest

from netmaint import serialize_instance
from netmaint.cli import run
from netmaint.instance import Instance, MaintenanceRequest
from helpers import series_network


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def series_file(tmp_path):
    p = tmp_path / "series.json"
    inst = Instance(series_network(), 3, (MaintenanceRequest(0, 2, 0, 2, 1),))
    p.write_bytes(serialize_instance(inst))
    return p


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        code, out, _ = call("generate", "--set", "2", "--seed", "5", "--nodes", "7", "--out", str(p))
        assert code == 0 and "requests" in out
    assert a.read_bytes() == b.read_bytes()


def test_solve_then_evaluate(tmp_path, series_file):
    sched, rep = tmp_path / "s.json", tmp_path / "r.json"
    code, out, _ = call("solve", "--instance", str(series_file), "--mode", "lpr",
                        "--out", str(sched), "--report", str(rep))
    assert code == 0
    assert json.loads(rep.read_text())["objective"] == 20
    code, out, _ = call("evaluate", "--instance", str(series_file), "--schedule", str(sched))
    assert (code, out.strip()) == (0, "20")
    code, out, _ = call("report", str(rep), str(rep))
    assert code == 0 and out.splitlines()[0].split() == ["mode", "lpr", "lpr"]


def test_start_outside_window(tmp_path, series_file):
    bad = tmp_path / "bad.json"
    bad.write_text('{"start": {"0": 5}}')
    code, _, err = call("evaluate", "--instance", str(series_file), "--schedule", str(bad))
    assert code == 1 and "start outside window" in err


@pytest.mark.parametrize("argv", [
    ("solve", "--instance", "x.json", "--mode", "turbo"),
    ("solve",),
    ("frobnicate",),
    ("evaluate", "--instance", "/nonexistent.json", "--schedule", "/nonexistent2.json"),
])
def test_usage_errors(argv):
    code, _, err = call(*argv)
    assert code == 1 and err.startswith("netmaint: error:")


def test_malformed_instance(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"nodes": []}')
    code, _, err = call("solve", "--instance", str(p))
    assert code == 1


def test_output_must_not_clobber_input(series_file):
    code, _, err = call("solve", "--instance", str(series_file), "--out", str(series_file))
    assert code == 1


def test_time_limit_exit_code(tmp_path):
    inst = tmp_path / "big.json"
    assert call("generate", "--set", "3", "--seed", "3", "--nodes", "11", "--density", "0.35",
                "--horizon", "200", "--jobs-per-arc", "4", "6", "--out", str(inst))[0] == 0
    code, out, _ = call("solve", "--instance", str(inst), "--mode", "dbd", "--time-limit", "0.3")
    assert code in (2, 3)  # no schedule yet, or one with an open gap


def test_module_entry_point(series_file):
    res = subprocess.run([sys.executable, "-m", "netmaint", "solve", "--instance", str(series_file)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "optimal" in res.stdout
