"""Run a configured experiment and write its record directory.

A record is ``manifest.json`` plus CSV snapshots, a CSV of conserved
quantities and gnuplot scripts that reference the CSVs by relative path.
"""
from __future__ import annotations

import os
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import io
from .acoustics import acoustic_dt_max, acoustic_energy, acoustic_step, measure_dispersion
from .config import ExperimentConfig
from .errors import MissingArtifact
from .gp import gp_energy, gp_step
from .hydro import HydroSystem, StepControl
from .kinetic import (
    PhaseSpaceState,
    kinetic_acceleration,
    kinetic_dt_max,
    liouville_step,
    moment_residuals,
    moments,
)

__all__ = ["output_dir", "run_experiment", "write_plot_scripts"]

OUT_ENV = "QHYDRO_OUT"


def output_dir(cfg: ExperimentConfig, root=None) -> Path:
    """Record directory: ``cfg.output`` under ``$QHYDRO_OUT`` (or the working directory)."""
    root = root or os.environ.get(OUT_ENV)
    out = Path(cfg.output)
    if root:
        return Path(root) / (out.name if out.is_absolute() else out)
    return out


def _steps(t_end, dt):
    n = int(np.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    return n, [min(dt, t_end - i * dt) for i in range(n)]


def _snap(i, n, every):
    return i == n or (every and i % every == 0)


def _run_hydro(cfg, out):
    model = "gp" if cfg.engine == "hydro_gp" else "perfect"
    system = HydroSystem(cfg.params, model, cfg.closure, cfg.external_potential(), cfg.scheme, cfg.policy)
    state = cfg.fluid_state()
    dt = cfg.dt or cfg.cfl_safety * system.dt_max(state)
    n, steps = _steps(cfg.t_end, dt)
    snaps, series = [], {"t": [], "mass": [], "momentum": []}

    def record(i, s):
        series["t"].append(s.time)
        series["mass"].append(s.mass)
        series["momentum"].append(s.momentum)
        if i == 0 or _snap(i, n, cfg.snapshot_every):
            name = f"snap_{len(snaps):05d}.csv"
            io.write_fluid(out / name, s)
            snaps.append({"file": name, "time": s.time})

    record(0, state)
    for i, h in enumerate(steps, 1):
        state = system.step(state, StepControl(h))
        record(i, state)
    mass = np.asarray(series["mass"])
    return {
        "dt": dt,
        "steps": n,
        "snapshots": snaps,
        "snapshot_column": "rho",
        "series": series,
        "max_mass_drift": float(np.max(np.abs(mass - mass[0])) / mass[0]),
    }


def _run_gp(cfg, out):
    wf, n_total = cfg.wavefunction()
    prm = cfg.params
    vext = cfg.external_potential()
    dt = cfg.dt or cfg.cfl_safety * prm.mass * cfg.grid.spacing**2 / (np.pi * prm.hbar)
    n, steps = _steps(cfg.t_end, dt)
    snaps, series = [], {"t": [], "norm": [], "energy": []}

    def record(i, w):
        series["t"].append(w.time)
        series["norm"].append(w.norm)
        series["energy"].append(gp_energy(w, prm, vext, n_total))
        if i == 0 or _snap(i, n, cfg.snapshot_every):
            name = f"psi_{len(snaps):05d}.csv"
            io.write_wavefunction(out / name, w, w.density(prm, n_total).values)
            snaps.append({"file": name, "time": w.time})

    record(0, wf)
    for i, h in enumerate(steps, 1):
        wf = gp_step(wf, prm, vext, n_total, h)
        record(i, wf)
    e = np.asarray(series["energy"])
    return {
        "dt": dt,
        "steps": n,
        "n_total": n_total,
        "snapshots": snaps,
        "snapshot_column": "density",
        "series": series,
        "max_energy_drift": float(np.max(np.abs(e - e[0])) / max(abs(e[0]), 1e-300)),
    }


def _run_linear(cfg, out):
    prm = cfg.params
    state = cfg.acoustic_state()
    dt = cfg.dt or cfg.cfl_safety * acoustic_dt_max(cfg.grid, prm)
    n, steps = _steps(cfg.t_end, dt)
    snaps, series = [], {"t": [], "energy": []}

    def record(i, s):
        series["t"].append(s.time)
        series["energy"].append(acoustic_energy(s, prm, cfg.scheme))
        if i == 0 or _snap(i, n, cfg.snapshot_every):
            name = f"snap_{len(snaps):05d}.csv"
            io.write_table(
                out / name,
                {"x": cfg.grid.x, "rho": prm.rho0 + s.rho1.values, "u": s.u1.values, "temp": np.zeros(cfg.grid.n_points)},
            )
            snaps.append({"file": name, "time": s.time})

    record(0, state)
    for i, h in enumerate(steps, 1):
        state = acoustic_step(state, prm, h, cfg.scheme)
        record(i, state)
    return {"dt": dt, "steps": n, "snapshots": snaps, "snapshot_column": "rho", "series": series}


def _run_kinetic(cfg, out):
    prm = cfg.params
    vext = cfg.external_potential()
    n_total = cfg.n_total()
    state = cfg.phase_space_state()
    interp = str(cfg.kinetic.get("interpolation", "fourier"))
    velocity_dims = int(cfg.kinetic.get("velocity_dims", 1))
    if cfg.dt is None:
        acc = kinetic_acceleration(state, prm, vext, n_total, cfg.policy, cfg.scheme)
        dt = cfg.cfl_safety * kinetic_dt_max(state.grid, float(np.max(np.abs(acc))), prm)
    else:
        dt = cfg.dt
    n, steps = _steps(cfg.t_end, dt)
    snaps, series = [], {"t": [], "norm": [], "clipped": []}
    tail = [state]

    def record(i, s):
        series["t"].append(s.time)
        series["norm"].append(s.norm)
        series["clipped"].append(s.clipped)
        if i == 0 or _snap(i, n, cfg.snapshot_every):
            k = len(snaps)
            io.write_phase_space(out / f"phase_{k:05d}.csv", s)
            m = moments(s, prm, n_total, velocity_dims, cfg.policy)
            io.write_table(
                out / f"snap_{k:05d}.csv",
                {"x": cfg.grid.x, "rho": m.rho.values, "u": m.u.values, "temp": m.temp.values},
            )
            snaps.append({"file": f"snap_{k:05d}.csv", "phase_file": f"phase_{k:05d}.csv", "time": s.time})

    record(0, state)
    for i, h in enumerate(steps, 1):
        state = liouville_step(state, prm, vext, n_total, h, policy=cfg.policy, interpolation=interp, scheme=cfg.scheme)
        tail = (tail + [state])[-3:]
        record(i, state)
    result = {
        "dt": dt,
        "steps": n,
        "n_total": n_total,
        "n_v": state.grid.n_v,
        "v_max": state.grid.v_max,
        "snapshots": snaps,
        "snapshot_column": "rho",
        "series": series,
    }
    if len(tail) == 3 and len({s.time for s in tail}) == 3:
        rep = moment_residuals(tail, prm, n_total, vext, velocity_dims=velocity_dims, policy=cfg.policy, scheme=cfg.scheme)
        result["final_residuals"] = rep.max()
    return result


def _run_dispersion(cfg, out):
    d = cfg.dispersion
    sources = d.get("sources", ["nonlinear_hydro_gp"])
    curves = {}
    files = []
    for src in sources:
        curve = measure_dispersion(
            src,
            d["modes"],
            float(d.get("amplitude", 1e-3 * cfg.params.rho0)),
            cfg.params,
            d.get("t_end"),
            cfg.dt,
            n_points=cfg.grid.n_points,
            length=cfg.grid.length,
            traveling=d.get("wave", "traveling") == "traveling",
            periods=float(d.get("periods", 5.0)),
            scheme=cfg.scheme,
            cfl_safety=cfg.cfl_safety,
            policy=cfg.policy,
        )
        name = f"dispersion_{curve.source}.csv"
        io.write_dispersion(out / name, curve)
        curves[curve.source] = curve
        files.append(name)
    result = {
        "dispersion_files": files,
        "max_rel_err": {k: c.max_rel_err() for k, c in curves.items()},
    }
    names = list(curves)
    if len(names) >= 2:
        result["max_cross_engine_diff"] = {
            f"{a}:{b}": float(np.max(curves[a].agreement(curves[b])))
            for i, a in enumerate(names) for b in names[i + 1:]
        }
    return result


_RUNNERS = {
    "hydro_perfect": _run_hydro,
    "hydro_gp": _run_hydro,
    "gp_oracle": _run_gp,
    "linear_acoustic": _run_linear,
    "kinetic": _run_kinetic,
    "dispersion": _run_dispersion,
}


def run_experiment(cfg: ExperimentConfig, out: Path | None = None) -> dict:
    """Run ``cfg``, write the record directory and return the manifest."""
    out = Path(out) if out is not None else output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    result = _RUNNERS[cfg.engine](cfg, out)
    series = result.pop("series", None)
    if series is not None:
        io.write_table(out / "series.csv", series)
        result["series_file"] = "series.csv"
    manifest = {
        "name": cfg.name,
        "engine": cfg.engine,
        "code_version": __version__,
        "config": cfg.raw,
        "params": {
            "hbar": cfg.params.hbar,
            "mass": cfg.params.mass,
            "boltzmann": cfg.params.boltzmann,
            "scatter_len": cfg.params.scatter_len,
            "rho0": cfg.params.rho0,
        },
        "closure": {"kind": cfg.closure.kind.value, "temperature": cfg.closure.temperature},
        "scheme": cfg.scheme.value,
        "grid": {"n_points": cfg.grid.n_points, "length": cfg.grid.length},
        **result,
        "wall_time": time.perf_counter() - start,
    }
    io.write_manifest(out / "manifest.json", manifest)
    write_plot_scripts(out, manifest)
    return manifest


def write_plot_scripts(record_dir, manifest: dict | None = None) -> list:
    """Emit gnuplot scripts for the record; never runs a plotter."""
    record_dir = Path(record_dir)
    manifest = manifest or io.read_manifest(record_dir / "manifest.json")
    written = []
    snaps = manifest.get("snapshots") or []
    for s in snaps:
        if not (record_dir / s["file"]).is_file():
            raise MissingArtifact(f"snapshot {s['file']} listed in the manifest is missing")
    if snaps:
        script = io.density_script(
            [s["file"] for s in snaps],
            [s["time"] for s in snaps],
            manifest.get("snapshot_column", "rho"),
            f"{manifest.get('name', '')} density",
        )
        path = record_dir / "density.gp"
        path.write_text(script)
        written.append(path)
    files = manifest.get("dispersion_files") or []
    for f in files:
        if not (record_dir / f).is_file():
            raise MissingArtifact(f"dispersion file {f} listed in the manifest is missing")
    if files:
        p = manifest["params"]
        cs2 = 4.0 * np.pi * p["hbar"] ** 2 * p["scatter_len"] * p["rho0"] / p["mass"] ** 3
        path = record_dir / "omega.gp"
        path.write_text(io.dispersion_script(files, cs2, p["hbar"], p["mass"]))
        written.append(path)
    if not written:
        raise MissingArtifact(f"{record_dir} holds no snapshots or dispersion results")
    return written
