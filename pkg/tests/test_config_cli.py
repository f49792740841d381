import json
import os
import subprocess
import sys

import numpy as np
import pytest

from spinoto import cli
from spinoto import config as C
from spinoto.output import read_table, write_table


def run_cli(tmp_path, name, *args):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, out


def read_dir(path):
    return {f: (path / f).read_bytes() for f in sorted(os.listdir(path))}


# -- config ----------------------------------------------------------------

def test_defaults_validate():
    for cmd in C.COMMANDS:
        cfg = C.resolve(cmd)
        assert cfg["master_seed"] >= 0


def test_fig3_preset():
    cfg = C.resolve("fig3")
    assert cfg["model"] == {"kind": "twisting", "N": 50, "chi": 1.0, "k": 3.0, "p": pytest.approx(np.pi / 2)}
    assert cfg["V"]["angle"] == pytest.approx(np.pi / 4)
    assert cfg["initial"]["phi"] == pytest.approx(np.pi / 2)


def test_fig4_presets():
    cfg = C.resolve("fig4a")
    assert cfg["fig4a"]["N_values"] == [50, 100, 200, 300, 400, 500]
    assert cfg["model"]["k"] == 3.0
    cfg = C.resolve("fig4b")
    assert cfg["n_traj"] == 200
    assert cfg["dissipation"]["eta"] == 100 and cfg["dissipation"]["d"] == 20
    assert cfg["model"]["N"] == 100


def test_seed_override():
    assert C.resolve("oto", seed=17)["master_seed"] == 17


@pytest.mark.parametrize(
    "user, field",
    [
        ({"model": {"N": 0}}, "model.N"),
        ({"model": {"kind": "ising"}}, "model.kind"),
        ({"times": {"start": 5, "stop": 1, "step": 1}}, "times.stop"),
        ({"times": {"start": 0, "stop": 2, "step": 0.5}}, "times"),
        ({"dissipation": {"photon_budget": -1}}, "dissipation.photon_budget"),
        ({"n_traj": 0}, "n_traj"),
        ({"V": {"axis": "w"}}, "V.axis"),
    ],
)
def test_validation_names_field(user, field):
    with pytest.raises(C.ConfigError) as info:
        C.resolve("oto", user)
    assert str(info.value).startswith(field)


def test_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(C.ConfigError):
        C.load(path)


def test_time_grid():
    cfg = C.resolve("fig3")
    grid = C.time_grid(cfg)
    assert len(grid) == 121 and grid[-1] == pytest.approx(0.12)
    assert C.time_grid(C.resolve("oto")) == list(range(21))


def test_build_dissipation_rates():
    p = C.build_dissipation(C.resolve("fig4b"))
    assert p.gamma == pytest.approx(0.1) and p.mu == pytest.approx(0.05)
    p = C.build_dissipation(C.resolve("dissipative", {"dissipation": {"mu": 0.0}}))
    assert p.mu == 0 and p.gamma == pytest.approx(0.1)


# -- output format ---------------------------------------------------------

def test_table_round_trip(tmp_path):
    path = tmp_path / "t.txt"
    rows = [(0, 0.1, 1 / 3), (1, np.pi, -2.5e-300)]
    write_table(path, ["a", "b", "c"], rows, {"key": "value"}, {"b": "something"})
    meta, cols, data = read_table(path)
    assert meta == {"key": "value"}
    assert cols == ["a", "b", "c"]
    assert np.array_equal(data, np.array(rows, dtype=float))
    with pytest.raises(ValueError):
        write_table(path, ["a"], [(1, 2)])


# -- CLI -------------------------------------------------------------------

def test_fig3_command(tmp_path):
    code, out = run_cli(tmp_path, "fig3", "fig3")
    assert code == 0
    meta, cols, data = read_table(out / "fig3.txt")
    assert cols[:3] == ["chi_t", "re_F", "im_F"]
    assert data[0, 1] == pytest.approx(1.0)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "fig3"
    assert all(c["passed"] for c in manifest["checks"].values())
    assert set(manifest["outputs"]) == {"fig3.txt"}


@pytest.mark.parametrize("cmd", ["oto", "distinguish", "time-ordered"])
def test_unitary_commands(tmp_path, cmd):
    code, out = run_cli(tmp_path, cmd, cmd, "--N", "20")
    assert code == 0
    assert (out / "manifest.json").exists()


def test_feasibility_command(tmp_path):
    code, out = run_cli(tmp_path, "feas", "feasibility")
    assert code == 0
    files = [f for f in os.listdir(out) if f != "manifest.json"]
    text = "".join((out / f).read_text() for f in files)
    assert "phi_max" in text


def test_lyapunov_command(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lyapunov": {"k": [0.0, 3.0], "n_steps": 200, "n_starts": 3}}))
    code, out = run_cli(tmp_path, "lyap", "lyapunov", "--config", str(cfg))
    assert code == 0


def test_wigner_command(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"times": {"start": 0, "stop": 2, "step": 1}}))
    code, out = run_cli(tmp_path, "w", "wigner", "--N", "10", "--config", str(cfg))
    assert code == 0


def test_dissipative_command_and_log(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"times": {"start": 0, "stop": 3, "step": 1}}))
    code, out = run_cli(tmp_path, "d", "dissipative", "--N", "6", "--n-traj", "5", "--config", str(cfg))
    assert code == 0
    lines = (out / "trajectories.jsonl").read_text().splitlines()
    assert len(lines) == 5
    manifest = json.loads((out / "manifest.json").read_text())
    assert "overflow" in manifest


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"N": -3}}))
    code, _ = run_cli(tmp_path, "x", "oto", "--config", str(cfg))
    assert code == 2
    assert "model.N" in capsys.readouterr().err


def test_failed_self_check_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "ORACLE_TOL", -1.0)
    code, out = run_cli(tmp_path, "x", "oto", "--N", "10")
    assert code == 1
    manifest = json.loads((out / "manifest.json").read_text())
    assert not manifest["checks"]["interferometric_vs_direct"]["passed"]


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "spinoto.cli", "feasibility", "--out", str(tmp_path / "m")],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr


def test_fig3_byte_identical_across_threads(tmp_path):
    _, a = run_cli(tmp_path, "a", "fig3", "--threads", "1")
    _, b = run_cli(tmp_path, "b", "fig3", "--threads", "3")
    assert read_dir(a) == read_dir(b)


def test_dissipative_byte_identical_across_threads(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"times": {"start": 0, "stop": 4, "step": 1}}))
    common = ("dissipative", "--N", "8", "--n-traj", "12", "--seed", "5", "--config", str(cfg))
    _, a = run_cli(tmp_path, "a", *common, "--threads", "1")
    _, b = run_cli(tmp_path, "b", *common, "--threads", "2")
    assert read_dir(a) == read_dir(b)
