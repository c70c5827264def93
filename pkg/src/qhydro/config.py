"""Experiment configuration: JSON document -> validated objects and initial states."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acoustics import AcousticState, bogoliubov_omega
from .errors import ConfigError
from .fields import DiffScheme, Grid1D, ScalarField
from .gp import WaveFunction, madelung_compose
from .hydro import ClosureKind, ClosureModel, ExternalPotential, FluidState
from .kinetic import PhaseSpaceGrid, PhaseSpaceState
from .quantum_potential import PhysParams, VacuumPolicy

__all__ = ["ENGINES", "PRESETS", "ExperimentConfig", "load_config"]

ENGINES = ("hydro_perfect", "hydro_gp", "gp_oracle", "linear_acoustic", "kinetic", "dispersion")
PRESETS = ("uniform", "single_mode", "gaussian", "maxwellian", "cold_beam")

_ENGINE_ALIASES = {
    "hydroperfect": "hydro_perfect",
    "hydrogp": "hydro_gp",
    "gporacle": "gp_oracle",
    "linearacoustic": "linear_acoustic",
}


def _get(section: dict, key: str, where: str, default=None, kind=float, positive=False, nonneg=False):
    value = section.get(key, default)
    if value is None:
        return None
    try:
        value = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.{key}: expected {kind.__name__}, got {value!r}") from None
    if kind in (int, float):
        if not np.isfinite(value):
            raise ConfigError(f"{where}.{key}: must be finite")
        if positive and not value > 0:
            raise ConfigError(f"{where}.{key}: must be positive, got {value}")
        if nonneg and value < 0:
            raise ConfigError(f"{where}.{key}: must be non-negative, got {value}")
    return value


def _section(raw: dict, key: str) -> dict:
    value = raw.get(key) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"{key}: expected an object")
    return value


@dataclass
class ExperimentConfig:
    engine: str
    name: str
    grid: Grid1D
    params: PhysParams
    scheme: DiffScheme = DiffScheme.SPECTRAL
    policy: VacuumPolicy = VacuumPolicy()
    closure: ClosureModel = ClosureModel()
    external: dict | None = None
    initial: dict = field(default_factory=dict)
    t_end: float = 1.0
    dt: float | None = None
    cfl_safety: float = 1.0
    snapshot_every: int = 0
    output: str = ""
    dispersion: dict = field(default_factory=dict)
    kinetic: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    # -- parsing ----------------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        engine = str(raw.get("engine", "")).lower()
        engine = _ENGINE_ALIASES.get(engine, engine)
        if engine not in ENGINES:
            raise ConfigError(f"engine: must be one of {', '.join(ENGINES)}, got {raw.get('engine')!r}")
        name = str(raw.get("name", engine))

        g = _section(raw, "grid")
        n = _get(g, "n_points", "grid", 256, int, positive=True)
        length = _get(g, "length", "grid", 2.0 * np.pi, positive=True)
        try:
            grid = Grid1D(n, length)
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from None

        p = _section(raw, "params")
        params_kw = {}
        for key in ("hbar", "mass", "boltzmann", "scatter_len", "rho0"):
            if key in p:
                params_kw[key] = _get(p, key, "params")
        if "sound_speed" in p:
            # convenience: choose the scattering length that gives this sound speed
            cs = _get(p, "sound_speed", "params", nonneg=True)
            base = PhysParams(**{k: v for k, v in params_kw.items() if k != "scatter_len"})
            params_kw["scatter_len"] = cs**2 * base.mass**3 / (4.0 * np.pi * base.hbar**2 * base.rho0)
        try:
            params = PhysParams(**params_kw)
        except ValueError as exc:
            raise ConfigError(f"params.{str(exc).split()[0]}: {exc}") from None

        try:
            scheme = DiffScheme.parse(raw.get("scheme", "spectral"))
        except ValueError:
            raise ConfigError(f"scheme: unknown scheme {raw.get('scheme')!r}") from None

        v = _section(raw, "vacuum")
        try:
            policy = VacuumPolicy(
                epsilon=_get(v, "epsilon", "vacuum", None, nonneg=True),
                relative=_get(v, "relative", "vacuum", 1e-12, nonneg=True),
                kind=str(v.get("kind", "soft")),
                freeze=_get(v, "freeze", "vacuum", 0.0, nonneg=True),
            )
        except ValueError as exc:
            raise ConfigError(f"vacuum: {exc}") from None

        c = _section(raw, "closure")
        kind = str(c.get("kind", "pressureless")).lower()
        try:
            closure_kind = ClosureKind(kind)
        except ValueError:
            raise ConfigError(f"closure.kind: unknown closure {kind!r}") from None
        temperature = _get(c, "temperature", "closure", None, nonneg=True)
        if closure_kind is ClosureKind.ISOTHERMAL and temperature is None:
            raise ConfigError("closure.temperature: required for the isothermal closure")
        closure = ClosureModel(closure_kind, temperature or 0.0)

        external = raw.get("external")
        if external is not None:
            if not isinstance(external, dict) or external.get("kind") not in ("harmonic", "zero"):
                raise ConfigError("external.kind: must be 'harmonic' or 'zero'")
            if external["kind"] == "harmonic":
                _get(external, "omega", "external", None, positive=True) or _missing("external.omega")

        initial = _section(raw, "initial")
        preset = initial.get("preset", "uniform")
        if preset not in PRESETS:
            raise ConfigError(f"initial.preset: must be one of {', '.join(PRESETS)}, got {preset!r}")

        s = _section(raw, "step")
        cfg = cls(
            engine=engine,
            name=name,
            grid=grid,
            params=params,
            scheme=scheme,
            policy=policy,
            closure=closure,
            external=external,
            initial=initial,
            t_end=_get(raw, "t_end", "", 1.0, nonneg=True),
            dt=_get(s, "dt", "step", None, positive=True),
            cfl_safety=_get(s, "cfl_safety", "step", 1.0, positive=True),
            snapshot_every=_get(raw, "snapshot_every", "", 0, int, nonneg=True),
            output=str(raw.get("output", name)),
            dispersion=_section(raw, "dispersion"),
            kinetic=_section(raw, "kinetic"),
            raw=raw,
        )
        if cfg.cfl_safety > 1:
            raise ConfigError("step.cfl_safety: must lie in (0, 1]")
        cfg._check_engine()
        return cfg

    def _check_engine(self):
        preset = self.initial.get("preset", "uniform")
        if self.engine == "kinetic" and preset not in ("maxwellian", "cold_beam"):
            raise ConfigError("initial.preset: the kinetic engine needs 'maxwellian' or 'cold_beam'")
        if self.engine != "kinetic" and preset == "cold_beam":
            raise ConfigError("initial.preset: 'cold_beam' is only defined for the kinetic engine")
        if self.engine in ("gp_oracle", "dispersion") and self.params.hbar == 0:
            raise ConfigError("params.hbar: the wavefunction engines need hbar > 0")
        if self.engine == "dispersion":
            modes = self.dispersion.get("modes")
            if not modes or not all(isinstance(j, int) and j >= 1 for j in modes):
                raise ConfigError("dispersion.modes: need a list of positive integers")
        if self.engine == "kinetic":
            _get(self.kinetic, "n_v", "kinetic", 128, int, positive=True)
            _get(self.kinetic, "v_max", "kinetic", None, positive=True) or _missing("kinetic.v_max")

    # -- builders -----------------------------------------------------------

    def external_potential(self) -> ExternalPotential | None:
        ext = self.external
        if ext is None or ext["kind"] == "zero":
            return None
        return ExternalPotential.harmonic(
            self.grid, float(ext["omega"]), self.params.mass, ext.get("center")
        )

    def _mode_omega(self, k):
        """Linear frequency used to phase-lock a traveling single-mode start."""
        prm = self.params
        if self.engine == "hydro_perfect":
            c = self.closure
            if c.kind is ClosureKind.ISOTHERMAL:
                t = c.temperature
            else:
                t = float(self.initial.get("temperature", 0.0))
            cs2 = prm.boltzmann * t / prm.mass
            return float(np.sqrt(cs2 * k**2 + (prm.hbar * k**2 / (2 * prm.mass)) ** 2))
        return bogoliubov_omega(k, prm)

    def fluid_state(self) -> FluidState:
        grid, prm, ini = self.grid, self.params, self.initial
        preset = ini.get("preset", "uniform")
        x = grid.x
        temp = None
        if self.engine == "hydro_perfect" and self.closure.needs_temperature:
            t0 = _get(ini, "temperature", "initial", None, nonneg=True)
            if t0 is None:
                _missing("initial.temperature")
            temp = np.full(grid.n_points, t0)
        if preset in ("uniform", "maxwellian"):
            rho = np.full(grid.n_points, _get(ini, "rho", "initial", prm.rho0, positive=True))
            u = np.full(grid.n_points, _get(ini, "u", "initial", 0.0))
            if preset == "maxwellian" and temp is not None:
                temp = np.full(grid.n_points, _get(ini, "T0", "initial", 0.0, nonneg=True))
        elif preset == "single_mode":
            j = _get(ini, "j", "initial", 1, int, positive=True)
            amp = _get(ini, "amplitude", "initial", 1e-3 * prm.rho0, nonneg=True)
            if amp >= prm.rho0:
                raise ConfigError("initial.amplitude: must stay below rho0 to keep the density positive")
            wave = ini.get("wave", "traveling")
            if wave not in ("traveling", "standing"):
                raise ConfigError("initial.wave: must be 'traveling' or 'standing'")
            k = grid.mode_k(j)
            rho1 = amp * np.cos(k * x)
            rho = prm.rho0 + rho1
            u = self._mode_omega(k) / (k * prm.rho0) * rho1 if wave == "traveling" else np.zeros_like(x)
        elif preset == "gaussian":
            sigma = _get(ini, "sigma", "initial", None, positive=True) or _missing("initial.sigma")
            center = _get(ini, "center", "initial", grid.length / 2)
            k0 = _get(ini, "k0", "initial", 0.0)
            background = _get(ini, "background", "initial", 0.0, nonneg=True)
            images = np.arange(-3, 4)[:, None] * grid.length
            bump = np.exp(-((x - center + images) ** 2) / (2 * sigma**2)).sum(axis=0)
            bump /= bump.sum() * grid.spacing
            rho = background + (prm.rho0 * grid.length - background * grid.length) * bump
            u = np.full(grid.n_points, prm.hbar * k0 / prm.mass)
        else:
            raise ConfigError(f"initial.preset: {preset!r} does not define a fluid state")
        return FluidState(
            ScalarField(grid, rho), ScalarField(grid, u), None if temp is None else ScalarField(grid, temp)
        )

    def wavefunction(self):
        state = self.fluid_state()
        n_total = state.mass / self.params.mass
        return madelung_compose(state, self.params, n_total), n_total

    def acoustic_state(self) -> AcousticState:
        state = self.fluid_state()
        rho1 = state.rho.values - self.params.rho0
        return AcousticState(ScalarField(self.grid, rho1), state.u)

    def phase_space_grid(self) -> PhaseSpaceGrid:
        kin = self.kinetic
        return PhaseSpaceGrid(self.grid, int(kin.get("n_v", 128)), float(kin["v_max"]))

    def n_total(self) -> float:
        default = self.params.rho0 * self.grid.length / self.params.mass
        return _get(self.kinetic, "n_total", "kinetic", default, positive=True)

    def phase_space_state(self) -> PhaseSpaceState:
        grid, prm, ini = self.phase_space_grid(), self.params, self.initial
        if ini.get("preset") == "maxwellian":
            t0 = _get(ini, "T0", "initial", None, positive=True) or _missing("initial.T0")
            return PhaseSpaceState.maxwellian(grid, t0, prm)
        width = _get(ini, "width", "initial", None, positive=True) or _missing("initial.width")
        j = _get(ini, "j", "initial", 1, int, positive=True)
        da = _get(ini, "density_amplitude", "initial", 0.0, nonneg=True)
        va = _get(ini, "velocity_amplitude", "initial", 0.0)
        if da >= 1:
            raise ConfigError("initial.density_amplitude: must be below 1")
        k = self.grid.mode_k(j)
        return PhaseSpaceState.cold_beam(
            grid, width, lambda x: 1.0 + da * np.cos(k * x), lambda x: va * np.sin(k * x)
        )


def _missing(name):
    raise ConfigError(f"{name}: required")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return ExperimentConfig.from_dict(raw)
