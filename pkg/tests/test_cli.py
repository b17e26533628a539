import csv
import hashlib
import json
import math

import numpy as np
import pytest

from doublewell import config as cfg
from doublewell.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_SOLVER, main

SMALL = {
    "spectrum": {"potential": {"variant": "infinite_box", "L": 1.0}, "grid": {"n": 300},
                 "options": {"k": 4}},
    "tunnel": {"potential": {"variant": "double_box", "L": 1.0, "barrier_width": 0.1,
                             "barrier_height": 200.0},
               "grid": {"n": 199}, "options": {"periods": 1.5, "dt": 0.002}},
    "twobody": {"potential": {"variant": "double_box", "L": 1.0, "barrier_width": 0.2,
                              "barrier_height": 500.0}, "grid": {"n": 32}},
    "leveldiagram": {"grid": {"n": 24}, "options": {"count": 4}},
    "gate": {"grid": {"n": 24}, "options": {"nodes": 9, "dt": 0.02}},
    "sweep": {"grid": {"n": 24}, "options": {"param": "barrier_height", "start": 0, "stop": 500,
                                             "count": 3}},
}


def _config(tmp_path, cmd, name="cfg.json", **extra):
    data = {"command": cmd, **json.loads(json.dumps(SMALL[cmd]))}
    data.update(extra)
    data.setdefault("output_dir", str(tmp_path / f"out_{cmd}"))
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path, data


def _digest(directory):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(directory.iterdir())}


def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_spectrum_box_ratio(tmp_path):
    path, data = _config(tmp_path, "spectrum")
    assert main(["spectrum", "--config", str(path)]) == EXIT_OK
    rows = list(csv.DictReader(open(f"{data['output_dir']}/spectrum.csv")))
    assert float(rows[1]["ratio_to_ground"]) == pytest.approx(4.0, rel=1e-3)
    assert float(rows[0]["energy"]) == pytest.approx(math.pi**2 / 2, rel=1e-4)
    assert [r["parity"] for r in rows] == ["even", "odd", "even", "odd"]


def test_tunnel_outputs(tmp_path):
    path, data = _config(tmp_path, "tunnel")
    assert main(["tunnel", "--config", str(path), "--no-figures"]) == EXIT_OK
    summary = json.load(open(f"{data['output_dir']}/tunnel.json"))
    assert summary["period_relative_error"] < 1e-3


def test_twobody_outputs(tmp_path):
    path, data = _config(tmp_path, "twobody")
    assert main(["run", "--config", str(path)]) == EXIT_OK
    levels = json.load(open(f"{data['output_dir']}/twobody.json"))
    assert [lv["label"] for lv in levels[:2]] == ["a", "b"]
    ints = json.load(open(f"{data['output_dir']}/integrals.json"))
    assert ints["J"] == pytest.approx(ints["K"], rel=1e-14)
    assert ints["swap_commutator_residual"] < 1e-12


def test_gate_report(tmp_path):
    path, data = _config(tmp_path, "gate")
    assert main(["gate", "--config", str(path)]) == EXIT_OK
    report = json.load(open(f"{data['output_dir']}/gate_report.json"))
    assert report["fidelity"] >= 0.99
    assert report["target_phase"] == pytest.approx(math.pi)
    assert report["adiabaticity_ratio"] >= 20
    for name in ("gate_trajectory.csv", "gate_levels.csv", "gate.png"):
        assert (tmp_path / "out_gate" / name).exists()


def test_level_sweep_and_empty_axis(tmp_path):
    path, data = _config(tmp_path, "sweep")
    assert main(["sweep", "--config", str(path)]) == EXIT_OK
    rows = list(csv.reader(open(f"{data['output_dir']}/sweep.csv")))
    assert rows[0] == ["barrier_height", "E_a", "E_b", "E_c", "E_d", "U"]
    assert [float(r[0]) for r in rows[1:]] == [0.0, 250.0, 500.0]
    opts = dict(SMALL["sweep"]["options"], count=0)
    path, data = _config(tmp_path, "sweep", name="empty.json", options=opts,
                         output_dir=str(tmp_path / "empty"))
    assert main(["sweep", "--config", str(path)]) == EXIT_OK
    assert (tmp_path / "empty" / "sweep.csv").read_text() == "barrier_height,E_a,E_b,E_c,E_d,U\n"


def test_hold_sweep_monotone(tmp_path):
    opts = {"param": "t_hold", "start": 0, "stop": 20, "count": 5, "quantity": "phase", "nodes": 9}
    ramp = {"V_high": 500, "V_low": 0, "t_ramp": 5}
    path, data = _config(tmp_path, "sweep", options=opts, ramp=ramp)
    assert main(["sweep", "--config", str(path), "--no-figures"]) == EXIT_OK
    rows = list(csv.reader(open(f"{data['output_dir']}/sweep.csv")))[1:]
    phases = [float(r[1]) for r in rows]
    assert all(b > a for a, b in zip(phases, phases[1:]))


def test_parallel_sweep_matches_serial(tmp_path):
    path, _ = _config(tmp_path, "sweep")
    assert main(["sweep", "--config", str(path), "--out", str(tmp_path / "s1"), "--workers", "1"]) == 0
    assert main(["sweep", "--config", str(path), "--out", str(tmp_path / "s2"), "--workers", "3"]) == 0
    assert (tmp_path / "s1" / "sweep.csv").read_bytes() == (tmp_path / "s2" / "sweep.csv").read_bytes()


def test_flags_override_file(tmp_path):
    path, data = _config(tmp_path, "spectrum", figures=True)
    assert main(["spectrum", "--config", str(path), "--out", str(tmp_path / "elsewhere"),
                 "--no-figures"]) == EXIT_OK
    assert not (tmp_path / "out_spectrum").exists()
    assert not (tmp_path / "elsewhere" / "spectrum.png").exists()
    assert (tmp_path / "elsewhere" / "spectrum.csv").exists()


@pytest.mark.parametrize("text", ["{not json", "[1, 2]"])
def test_malformed_config(tmp_path, capsys, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    assert main(["spectrum", "--config", str(path), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert _error(capsys)["exit_code"] == EXIT_CONFIG
    assert not (tmp_path / "o").exists()
    assert [p.name for p in tmp_path.iterdir()] == ["bad.json"]


@pytest.mark.parametrize("mutation", [
    {"unknown": 1},
    {"grid": {"n": "many"}},
    {"grid": {"n": 8}},
    {"potential": {"variant": "double_box", "L": 1.0, "depth": 3}},
    {"options": {"k": 0}},
    {"command": "gate"},
])
def test_schema_errors(tmp_path, capsys, mutation):
    path, data = _config(tmp_path, "spectrum", **mutation)
    assert main(["spectrum", "--config", str(path)]) == EXIT_CONFIG
    assert _error(capsys)["error"] == "config"
    assert not (tmp_path / "out_spectrum").exists()


def test_gate_rejects_single_box(tmp_path):
    path, _ = _config(tmp_path, "gate", potential={"variant": "infinite_box", "L": 1.0})
    assert main(["gate", "--config", str(path)]) == EXIT_CONFIG


def test_solver_error_leaves_nothing(tmp_path, capsys):
    path, data = _config(tmp_path, "twobody", grid={"n": 200})
    assert main(["twobody", "--config", str(path)]) == EXIT_SOLVER
    assert _error(capsys)["error"] == "SizeCapError"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["cfg.json"]


def test_io_errors(tmp_path, capsys):
    assert main(["spectrum", "--config", str(tmp_path / "missing.json")]) == EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("")
    path, _ = _config(tmp_path, "spectrum", output_dir=str(blocker / "out"))
    assert main(["spectrum", "--config", str(path)]) == EXIT_IO
    assert _error(capsys)["exit_code"] == EXIT_IO


@pytest.mark.parametrize("command", sorted(SMALL))
def test_determinism(tmp_path, command):
    path, _ = _config(tmp_path, command)
    assert main([command, "--config", str(path), "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main([command, "--config", str(path), "--out", str(tmp_path / "b")]) == EXIT_OK
    first, second = _digest(tmp_path / "a"), _digest(tmp_path / "b")
    assert first and first == second


def test_validate_builds_objects():
    rc = cfg.validate({"command": "gate", "output_dir": "x", "ramp": {"V_high": 500, "V_low": 0,
                                                                    "t_ramp": 10}})
    assert rc.grid.n == cfg.DEFAULT_N["gate"]
    assert rc.ramp.duration == 20
    assert rc.interaction.a == 0.5
    with pytest.raises(cfg.ConfigError):
        cfg.validate({"command": "sweep", "output_dir": "x",
                      "options": {"param": "t_hold", "start": 0, "stop": 1, "count": 2}})
    with pytest.raises(cfg.ConfigError):
        cfg.validate({"command": "spectrum"})
    np.testing.assert_equal(rc.options, {})


def test_shipped_configs_validate():
    from pathlib import Path
    configs = sorted((Path(__file__).parent.parent / "configs").glob("*.json"))
    assert configs
    for path in configs:
        rc = cfg.load(path)
        assert rc.command in cfg.COMMANDS
