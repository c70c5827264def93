"""CSV, manifest and gnuplot-script I/O.

Every CSV has a single header row and full-precision (``%.17g``) decimals, so
writing and reading back reproduces the arrays bit for bit.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .acoustics import DispersionCurve, DispersionEntry
from .errors import MissingArtifact
from .fields import ComplexField, Grid1D, ScalarField
from .gp import WaveFunction
from .hydro import FluidState
from .kinetic import PhaseSpaceGrid, PhaseSpaceState

__all__ = [
    "write_table",
    "read_table",
    "write_field",
    "read_field",
    "write_fluid",
    "read_fluid",
    "write_wavefunction",
    "read_wavefunction",
    "write_phase_space",
    "read_phase_space",
    "write_dispersion",
    "read_dispersion",
    "write_manifest",
    "read_manifest",
    "density_script",
    "dispersion_script",
]

FLOAT_FMT = "%.17g"


def write_table(path, columns: dict):
    """Write equal-length 1D arrays as a CSV with a header row of the keys."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, data, delimiter=",", header=",".join(names), comments="", fmt=FLOAT_FMT)
    return path


def read_table(path, expected=None) -> dict:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifact(f"{path} does not exist")
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    if expected is not None and header[: len(expected)] != list(expected):
        raise ValueError(f"{path}: header {header} does not start with {list(expected)}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, i].copy() for i, name in enumerate(header)}


def _grid_from_x(x) -> Grid1D:
    n = x.size
    spacing = x[1] - x[0]
    return Grid1D(n, spacing * n)


def write_field(path, f: ScalarField, name="value"):
    return write_table(path, {"x": f.grid.x, name: f.values})


def read_field(path, grid: Grid1D | None = None) -> ScalarField:
    cols = read_table(path)
    names = list(cols)
    if names[0] != "x" or len(names) != 2:
        raise ValueError(f"{path}: expected columns x,<name>, got {names}")
    grid = grid or _grid_from_x(cols["x"])
    return ScalarField(grid, cols[names[1]])


def write_fluid(path, state: FluidState):
    temp = np.zeros(state.grid.n_points) if state.temp is None else state.temp.values
    return write_table(path, {"x": state.grid.x, "rho": state.rho.values, "u": state.u.values, "temp": temp})


def read_fluid(path, grid: Grid1D | None = None, time=0.0) -> FluidState:
    cols = read_table(path, ["x", "rho", "u", "temp"])
    grid = grid or _grid_from_x(cols["x"])
    return FluidState(
        ScalarField(grid, cols["rho"]), ScalarField(grid, cols["u"]), ScalarField(grid, cols["temp"]), time
    )


def write_wavefunction(path, wf: WaveFunction, density=None):
    psi = wf.psi.values
    dens = np.abs(psi) ** 2 if density is None else density
    return write_table(path, {"x": wf.grid.x, "re_psi": psi.real, "im_psi": psi.imag, "density": dens})


def read_wavefunction(path, grid: Grid1D | None = None, time=0.0) -> WaveFunction:
    cols = read_table(path, ["x", "re_psi", "im_psi", "density"])
    grid = grid or _grid_from_x(cols["x"])
    psi = ComplexField(grid, cols["re_psi"] + 1j * cols["im_psi"])
    wf = WaveFunction(psi, 1.0, time)
    return WaveFunction(psi, wf.norm, time)


def write_phase_space(path, state: PhaseSpaceState):
    x, v = state.grid.mesh()
    return write_table(path, {"x": x.ravel(), "v": v.ravel(), "f": state.f.ravel()})


def read_phase_space(path, grid: PhaseSpaceGrid, time=0.0) -> PhaseSpaceState:
    cols = read_table(path, ["x", "v", "f"])
    return PhaseSpaceState(grid, cols["f"].reshape(grid.shape), time)


def write_dispersion(path, curve: DispersionCurve):
    return write_table(
        path,
        {
            "k": curve.k,
            "omega_measured": curve.omega_measured,
            "omega_analytic": curve.omega_analytic,
            "rel_err": curve.rel_err,
        },
    )


def read_dispersion(path, source="") -> DispersionCurve:
    cols = read_table(path, ["k", "omega_measured", "omega_analytic", "rel_err"])
    rows = zip(cols["k"], cols["omega_measured"], cols["omega_analytic"], cols["rel_err"])
    return DispersionCurve([DispersionEntry(*map(float, r)) for r in rows], source)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def write_manifest(path, manifest: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifact(f"{path} does not exist")
    return json.loads(path.read_text())


# ---------------------------------------------------------------------------
# gnuplot scripts

def density_script(snapshots, times, column="rho", title="density") -> str:
    """Space-time picture: every snapshot drawn at height ``t`` in a 3D line plot."""
    if not snapshots:
        raise MissingArtifact("record has no snapshots to plot")
    lines = [
        "set datafile separator ','",
        "set datafile columnheaders",
        f"set title '{title}'",
        "set xlabel 'x'",
        "set ylabel 't'",
        f"set zlabel '{column}'",
        "set key off",
        "splot \\",
    ]
    parts = [
        f"  '{name}' using 1:({float(t)!r}):'{column}' with lines"
        for name, t in zip(snapshots, times)
    ]
    lines.append(", \\\n".join(parts))
    return "\n".join(lines) + "\n"


def dispersion_script(csv_names, cs2: float, hbar: float, mass: float, labels=None) -> str:
    """omega(k) from the CSVs as points over the closed-form curve."""
    if not csv_names:
        raise MissingArtifact("record has no dispersion results to plot")
    labels = labels or [Path(n).stem for n in csv_names]
    lines = [
        "set datafile separator ','",
        "set datafile columnheaders",
        "set xlabel 'k'",
        "set ylabel 'omega'",
        "set key left top",
        f"cs2 = {float(cs2)!r}",
        f"q = {float(hbar / (2.0 * mass))!r}",
        "omega(k) = sqrt(cs2*k**2 + q**2*k**4)",
        "plot omega(x) with lines title 'closed form', \\",
    ]
    parts = [
        f"  '{name}' using 'k':'omega_measured' with points title '{label}'"
        for name, label in zip(csv_names, labels)
    ]
    lines.append(", \\\n".join(parts))
    return "\n".join(lines) + "\n"
