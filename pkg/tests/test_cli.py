import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from qhydro import cli
from qhydro.config import load_config
from qhydro.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
FAST = [
    "uniform",
    "sound_wave",
    "classical_isothermal",
    "free_gaussian",
    "trap_gp",
    "kinetic_maxwellian",
    "kinetic_cold_beam",
    "linear_dispersion",
]


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def _base(**extra):
    cfg = {
        "name": "t",
        "engine": "hydro_gp",
        "grid": {"n_points": 32, "length": 6.283185307179586},
        "params": {"sound_speed": 1.0},
        "initial": {"preset": "single_mode", "j": 1, "amplitude": 0.01},
        "t_end": 0.1,
        "snapshot_every": 5,
        "output": "t",
    }
    cfg.update(extra)
    return cfg


@pytest.mark.parametrize("name", FAST)
def test_bundled_config_runs(name, tmp_path):
    out = tmp_path / name
    assert cli.main(["run", str(CONFIGS / f"{name}.json"), "--out", str(out)]) == cli.EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["name"] == name
    assert manifest["config"] == json.loads((CONFIGS / f"{name}.json").read_text())
    assert any(p.suffix == ".gp" for p in out.iterdir())


def test_every_bundled_config_parses():
    names = sorted(p.stem for p in CONFIGS.glob("*.json"))
    assert set(FAST) | {"bogoliubov"} == set(names)
    for n in names:
        assert load_config(CONFIGS / f"{n}.json").name == n


def test_negative_mass_is_a_config_error(tmp_path, capsys):
    cfg = _base(params={"mass": -1.0})
    assert cli.main(["run", str(_write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    assert "params.mass" in capsys.readouterr().err


@pytest.mark.parametrize(
    "patch",
    [
        {"engine": "magic"},
        {"grid": {"n_points": -4, "length": 1.0}},
        {"initial": {"preset": "nope"}},
        {"t_end": -1.0},
    ],
)
def test_bad_configs_exit_2(tmp_path, patch):
    path = _write(tmp_path, _base(**patch))
    assert cli.main(["run", str(path), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    with pytest.raises(ConfigError):
        load_config(path)


def test_unreadable_config_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["run", str(bad)]) == cli.EXIT_CONFIG
    assert cli.main(["run", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG


def test_solver_error_exit_3(tmp_path, capsys):
    # a fixed step far above the stability limit
    cfg = _base(step={"dt": 1.0})
    assert cli.main(["run", str(_write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == cli.EXIT_SOLVER
    assert "CflViolation" in capsys.readouterr().err


def test_output_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("QHYDRO_OUT", str(tmp_path / "root"))
    assert cli.main(["run", str(_write(tmp_path, _base()))]) == cli.EXIT_OK
    assert (tmp_path / "root" / "t" / "manifest.json").is_file()


def test_runs_are_deterministic(tmp_path):
    path = _write(tmp_path, _base())
    for tag in "ab":
        assert cli.main(["run", str(path), "--out", str(tmp_path / tag)]) == cli.EXIT_OK
    csvs = sorted(p.name for p in (tmp_path / "a").glob("*.csv"))
    assert csvs
    for name in csvs:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_plot_command(tmp_path, capsys):
    disp = tmp_path / "disp"
    assert cli.main(["run", str(CONFIGS / "linear_dispersion.json"), "--out", str(disp)]) == cli.EXIT_OK
    hyd = tmp_path / "hyd"
    assert cli.main(["run", str(_write(tmp_path, _base())), "--out", str(hyd)]) == cli.EXIT_OK
    for p in disp.glob("*.gp"):
        p.unlink()
    assert cli.main(["plot", str(disp)]) == cli.EXIT_OK
    assert (disp / "omega.gp").is_file()
    assert cli.main(["plot", str(hyd)]) == cli.EXIT_OK
    assert "snap_" in (hyd / "density.gp").read_text()


def test_plot_empty_record_exit_2(tmp_path, capsys):
    (tmp_path / "manifest.json").write_text(json.dumps({"name": "empty"}))
    assert cli.main(["plot", str(tmp_path)]) == cli.EXIT_CONFIG
    assert "missing artifact" in capsys.readouterr().err
    assert cli.main(["plot", str(tmp_path / "nowhere")]) == cli.EXIT_CONFIG


def test_verify_quick_suite(capsys):
    assert cli.main(["verify", "--suite", "quick"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "checks passed" in out


def test_console_script_entry_point(tmp_path):
    env = dict(os.environ, QHYDRO_OUT=str(tmp_path))
    res = subprocess.run(
        [sys.executable, "-m", "qhydro.cli", "run", str(_write(tmp_path, _base()))],
        capture_output=True, text=True, env=env, check=False,
    )
    assert res.returncode == 0, res.stderr
    assert "wrote" in res.stdout
