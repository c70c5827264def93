import json

import numpy as np
import pytest

from qhydro import FluidState, Grid1D, PhaseSpaceGrid, PhaseSpaceState, PhysParams, ScalarField, WaveFunction, io
from qhydro.acoustics import DispersionCurve, DispersionEntry
from qhydro.errors import MissingArtifact
from qhydro.runner import write_plot_scripts


def _noisy(grid, seed=0):
    # random values exercise every digit of the float format
    return np.random.default_rng(seed).random(grid.n_points) + 0.5


def test_field_round_trip(tmp_path, ring):
    f = ScalarField(ring, _noisy(ring))
    back = io.read_field(io.write_field(tmp_path / "f.csv", f))
    assert np.array_equal(back.values, f.values)
    assert back.grid.n_points == ring.n_points
    assert back.grid.length == pytest.approx(ring.length, rel=1e-14)


def test_fluid_round_trip(tmp_path, ring):
    st = FluidState(ScalarField(ring, _noisy(ring)), ScalarField(ring, _noisy(ring, 1) - 1.0), ScalarField(ring, _noisy(ring, 2)))
    back = io.read_fluid(io.write_fluid(tmp_path / "s.csv", st), ring)
    for a, b in ((st.rho, back.rho), (st.u, back.u), (st.temp, back.temp)):
        assert np.array_equal(a.values, b.values)


def test_wavefunction_round_trip(tmp_path, ring):
    rng = np.random.default_rng(3)
    wf = WaveFunction.from_values(ring, rng.normal(size=64) + 1j * rng.normal(size=64))
    back = io.read_wavefunction(io.write_wavefunction(tmp_path / "w.csv", wf), ring)
    assert np.array_equal(back.psi.values, wf.psi.values)


def test_phase_space_round_trip(tmp_path):
    g = PhaseSpaceGrid(Grid1D(16, 2 * np.pi), 16, 3.0)
    st = PhaseSpaceState.from_function(g, lambda x, v: np.random.default_rng(4).random(x.shape))
    back = io.read_phase_space(io.write_phase_space(tmp_path / "f.csv", st), g)
    assert np.array_equal(back.f, st.f)


def test_dispersion_round_trip(tmp_path):
    curve = DispersionCurve([DispersionEntry(k, k * 1.0000001, k, 1e-7 * k) for k in (1.0, 2.0, 3.0)], "x")
    back = io.read_dispersion(io.write_dispersion(tmp_path / "d.csv", curve))
    assert np.array_equal(back.k, curve.k)
    assert np.array_equal(back.omega_measured, curve.omega_measured)
    assert np.array_equal(back.rel_err, curve.rel_err)


def test_table_header_is_checked(tmp_path, ring):
    path = io.write_field(tmp_path / "f.csv", ScalarField(ring, _noisy(ring)))
    with pytest.raises(ValueError, match="header"):
        io.read_fluid(path)


def test_manifest_round_trip_handles_numpy(tmp_path):
    m = {"a": np.float64(1.5), "b": np.arange(3), "c": float("inf"), "d": {"e": (1, 2)}}
    back = io.read_manifest(io.write_manifest(tmp_path / "m.json", m))
    assert back == {"a": 1.5, "b": [0, 1, 2], "c": "inf", "d": {"e": [1, 2]}}


def test_missing_files_raise(tmp_path):
    with pytest.raises(MissingArtifact):
        io.read_table(tmp_path / "nope.csv")
    with pytest.raises(MissingArtifact):
        io.read_manifest(tmp_path / "nope.json")
    # MissingArtifact is also a FileNotFoundError
    with pytest.raises(FileNotFoundError):
        io.read_field(tmp_path / "nope.csv")


def test_density_script_lists_every_snapshot():
    s = io.density_script(["a.csv", "b.csv"], [0.0, 0.5])
    assert s.count("with lines") == 2
    assert "'b.csv' using 1:(0.5):'rho'" in s
    with pytest.raises(MissingArtifact):
        io.density_script([], [])


def test_dispersion_script_has_closed_form():
    s = io.dispersion_script(["hydro.csv"], 1.0, 1.0, 1.0)
    assert "omega(k) = sqrt(cs2*k**2 + q**2*k**4)" in s
    assert "q = 0.5" in s
    with pytest.raises(MissingArtifact):
        io.dispersion_script([], 1.0, 1.0, 1.0)


def _record(tmp_path, ring, manifest):
    st = FluidState.uniform(ring, 1.0)
    io.write_fluid(tmp_path / "snap_0000.csv", st)
    io.write_manifest(tmp_path / "manifest.json", manifest)
    return tmp_path


def test_plot_scripts_from_manifest(tmp_path, ring):
    rec = _record(tmp_path, ring, {"name": "r", "snapshots": [{"file": "snap_0000.csv", "time": 0.0}]})
    paths = write_plot_scripts(rec)
    assert [p.name for p in paths] == ["density.gp"]
    assert "snap_0000.csv" in paths[0].read_text()


def test_plot_scripts_missing_snapshot(tmp_path, ring):
    rec = _record(tmp_path, ring, {"snapshots": [{"file": "gone.csv", "time": 0.0}]})
    with pytest.raises(MissingArtifact, match="gone.csv"):
        write_plot_scripts(rec)


def test_plot_scripts_empty_record(tmp_path):
    (tmp_path / "manifest.json").write_text(json.dumps({"name": "empty"}))
    with pytest.raises(MissingArtifact):
        write_plot_scripts(tmp_path)
    with pytest.raises(MissingArtifact):
        write_plot_scripts(tmp_path / "absent")
