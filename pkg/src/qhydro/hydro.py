"""Nonlinear quantum fluid equations in velocity form.

Two systems share one RK4 driver:

* perfect fluid: continuity, quantum Euler with pressure from a closure, and
  the temperature equation (zero heat flux);
* Gross-Pitaevskii fluid: continuity and quantum Euler where the mean-field
  term ``(4 pi hbar^2 a / m^3) d rho/dx`` replaces the pressure.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUp, CflViolation, ClosureMismatch, NegativeDensity
from .fields import (
    DiffScheme,
    Grid1D,
    ScalarField,
    gradient_array,
    integrate,
    laplacian_array,
    spectral_multiplier,
)
from .quantum_potential import PhysParams, VacuumPolicy, quantum_acceleration_array

__all__ = [
    "ClosureKind",
    "ClosureModel",
    "ExternalPotential",
    "FluidState",
    "FluidRates",
    "StepControl",
    "HydroSystem",
    "SimulationRecord",
    "rhs_perfect",
    "rhs_gp",
    "step",
    "run_simulation",
    "max_stable_dt",
]

BLOWUP_LIMIT = 1e12
CLAMP_TOLERANCE = 1e-12


class ClosureKind(enum.Enum):
    PRESSURELESS = "pressureless"
    ISOTHERMAL = "isothermal"
    IDEAL_GAS_HEAT = "ideal_gas_heat"


@dataclass(frozen=True)
class ClosureModel:
    kind: ClosureKind = ClosureKind.PRESSURELESS
    temperature: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ClosureKind(self.kind))
        if not self.temperature >= 0:
            raise ValueError("isothermal temperature must be >= 0")

    @classmethod
    def pressureless(cls):
        return cls(ClosureKind.PRESSURELESS)

    @classmethod
    def isothermal(cls, temperature: float):
        return cls(ClosureKind.ISOTHERMAL, temperature)

    @classmethod
    def ideal_gas_heat(cls):
        return cls(ClosureKind.IDEAL_GAS_HEAT)

    @property
    def needs_temperature(self) -> bool:
        return self.kind is ClosureKind.IDEAL_GAS_HEAT


@dataclass(frozen=True)
class ExternalPotential:
    """Time-independent external potential energy V(x).

    ``force`` optionally carries the exact ``-dV/dx``; it is used instead of
    differentiating ``v_of_x``, which matters for potentials such as a
    harmonic trap that are not smooth across the periodic seam.
    """

    v_of_x: ScalarField
    force: ScalarField | None = None

    @classmethod
    def zero(cls, grid: Grid1D) -> "ExternalPotential":
        return cls(grid.zeros(), grid.zeros())

    @classmethod
    def harmonic(cls, grid: Grid1D, omega: float, mass: float = 1.0, center=None):
        """``V = m omega^2 d^2 / 2`` with ``d`` the minimum-image distance to ``center``."""
        center = grid.length / 2 if center is None else center
        d = grid.x - center
        d = d - grid.length * np.round(d / grid.length)
        return cls(
            ScalarField(grid, 0.5 * mass * omega**2 * d**2),
            ScalarField(grid, -mass * omega**2 * d),
        )

    def accel_array(self, params: PhysParams, scheme=DiffScheme.SPECTRAL) -> np.ndarray:
        if self.force is not None:
            return self.force.values / params.mass
        grid = self.v_of_x.grid
        return -gradient_array(self.v_of_x.values, grid.length, scheme) / params.mass


@dataclass(frozen=True)
class FluidState:
    rho: ScalarField
    u: ScalarField
    temp: ScalarField | None = None
    time: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.rho.grid or (self.temp is not None and self.temp.grid != self.rho.grid):
            raise ValueError("fields live on different grids")
        if np.any(self.rho.values < 0):
            raise NegativeDensity(f"density has negative values (min {self.rho.values.min():.3e})")
        if self.temp is not None and np.any(self.temp.values < 0):
            raise ValueError("temperature must be >= 0")

    @property
    def grid(self) -> Grid1D:
        return self.rho.grid

    @property
    def mass(self) -> float:
        return integrate(self.rho)

    @property
    def momentum(self) -> float:
        return float(np.sum(self.rho.values * self.u.values) * self.grid.spacing)

    @classmethod
    def uniform(cls, grid: Grid1D, rho0: float, u0: float = 0.0, temp=None) -> "FluidState":
        t = None if temp is None else grid.constant(temp)
        return cls(grid.constant(rho0), grid.constant(u0), t)


@dataclass(frozen=True)
class FluidRates:
    """Time derivatives of the fluid fields."""

    rho: np.ndarray
    u: np.ndarray
    temp: np.ndarray | None = None


@dataclass(frozen=True)
class StepControl:
    dt: float
    integrator: str = "RK4"
    cfl_safety: float = 1.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.integrator.upper() != "RK4":
            raise ValueError(f"unsupported integrator {self.integrator!r}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")


def max_stable_dt(grid: Grid1D, params: PhysParams, max_speed: float, signal_speed: float) -> float:
    """Smaller of the advective-acoustic and the quantum-dispersion limits."""
    dx = grid.spacing
    limits = [np.inf]
    if max_speed + signal_speed > 0:
        limits.append(dx / (max_speed + signal_speed))
    if params.hbar > 0:
        limits.append(params.mass * dx**2 / (np.pi * params.hbar))
    return float(min(limits))


# ---------------------------------------------------------------------------
# right-hand sides on raw arrays (last axis is space)

def _accel(parts, rho, length, params, eps, weight, scheme, derivs=None):
    """Sum the acceleration terms, add the quantum force, apply the vacuum weight."""
    acc = parts + quantum_acceleration_array(rho, length, params, eps, scheme, derivs)
    return acc if weight is None else acc * weight


def _derivatives(rho, u, length, scheme):
    """d(rho u), du, drho, d2rho; one batched transform for the spectral scheme."""
    if scheme is not DiffScheme.SPECTRAL:
        d = gradient_array(np.stack([rho * u, u, rho]), length, scheme)
        return d[0], d[1], d[2], laplacian_array(rho, length, scheme)
    n = rho.shape[-1]
    ik = spectral_multiplier(n, length, 1)
    spec = np.fft.rfft(np.stack([rho * u, u, rho]), axis=-1)
    k2 = spectral_multiplier(n, length, 2)
    out = np.fft.irfft(
        np.concatenate([ik * spec, (k2 * spec[2])[None]]), n=n, axis=-1
    )
    return out[0], out[1], out[2], out[3]


def _gp_rates(rho, u, length, params, ext_accel, eps, scheme, weight=None):
    d_ru, du_dx, drho_dx, d2rho = _derivatives(rho, u, length, scheme)
    parts = -u * du_dx - params.interaction * drho_dx + ext_accel
    return -d_ru, _accel(parts, rho, length, params, eps, weight, scheme, (drho_dx, d2rho))


def _pressure(rho, temp, params, closure):
    if closure.kind is ClosureKind.PRESSURELESS:
        return None
    t = closure.temperature if closure.kind is ClosureKind.ISOTHERMAL else temp
    return rho * params.boltzmann * t / params.mass


def _perfect_rates(rho, u, temp, length, params, closure, ext_accel, eps, scheme, weight=None):
    d_ru, du_dx, drho_dx, d2rho = _derivatives(rho, u, length, scheme)
    drho = -d_ru
    parts = -u * du_dx + ext_accel
    p = _pressure(rho, temp, params, closure)
    if p is not None:
        parts = parts - gradient_array(p, length, scheme) / (rho + eps)
    du = _accel(parts, rho, length, params, eps, weight, scheme, (drho_dx, d2rho))
    dtemp = None
    if closure.needs_temperature:
        # zero heat flux: the divergence of q drops out of the temperature equation
        dtemp = -gradient_array(temp * u, length, scheme)
    return drho, du, dtemp


def _check_state(state: FluidState, closure: ClosureModel | None):
    if closure is not None and closure.needs_temperature and state.temp is None:
        raise ClosureMismatch(f"closure {closure.kind.value} needs a temperature field")


def rhs_perfect(
    state: FluidState,
    params: PhysParams,
    closure: ClosureModel,
    vext: ExternalPotential | None = None,
    scheme=DiffScheme.SPECTRAL,
    policy: VacuumPolicy = VacuumPolicy(),
) -> FluidRates:
    """Rates of the perfect-fluid system: continuity, quantum Euler, temperature.

    ``p = rho * kappa * T / m`` is formed pointwise and differentiated.  The
    scattering length is ignored here; pairwise interaction belongs to
    :func:`rhs_gp`.
    """
    _check_state(state, closure)
    grid = state.grid
    vext = vext or ExternalPotential.zero(grid)
    rho = state.rho.values
    temp = None if state.temp is None else state.temp.values
    eps = policy.floor(rho)
    drho, du, dtemp = _perfect_rates(
        rho, state.u.values, temp, grid.length, params, closure,
        vext.accel_array(params, scheme), eps, scheme, policy.weight(rho),
    )
    if dtemp is None and state.temp is not None:
        dtemp = np.zeros_like(rho)
    return FluidRates(drho, du, dtemp)


def rhs_gp(
    state: FluidState,
    params: PhysParams,
    vext: ExternalPotential | None = None,
    scheme=DiffScheme.SPECTRAL,
    policy: VacuumPolicy = VacuumPolicy(),
) -> FluidRates:
    """Rates of continuity plus the Euler equation with the GP mean-field term."""
    grid = state.grid
    vext = vext or ExternalPotential.zero(grid)
    rho = state.rho.values
    eps = policy.floor(rho)
    drho, du = _gp_rates(
        rho, state.u.values, grid.length, params, vext.accel_array(params, scheme), eps, scheme,
        policy.weight(rho),
    )
    dtemp = None if state.temp is None else np.zeros_like(rho)
    return FluidRates(drho, du, dtemp)


# ---------------------------------------------------------------------------
# time stepping

@dataclass(frozen=True)
class HydroSystem:
    """Everything except the state that a hydro run needs.

    ``model`` is ``"gp"`` (Gross-Pitaevskii fluid) or ``"perfect"``.
    """

    params: PhysParams
    model: str = "gp"
    closure: ClosureModel = ClosureModel()
    vext: ExternalPotential | None = None
    scheme: DiffScheme = DiffScheme.SPECTRAL
    policy: VacuumPolicy = VacuumPolicy()

    def __post_init__(self):
        if self.model not in ("gp", "perfect"):
            raise ValueError(f"model must be 'gp' or 'perfect', got {self.model!r}")
        object.__setattr__(self, "scheme", DiffScheme.parse(self.scheme))

    def signal_speed(self, state: FluidState) -> float:
        if self.model == "gp":
            rho_max = float(np.max(state.rho.values))
            return float(np.sqrt(self.params.interaction * rho_max))
        c = self.closure
        if c.kind is ClosureKind.ISOTHERMAL:
            t = c.temperature
        elif c.kind is ClosureKind.IDEAL_GAS_HEAT:
            t = float(np.max(state.temp.values))
        else:
            t = 0.0
        return float(np.sqrt(self.params.boltzmann * t / self.params.mass))

    def dt_max(self, state: FluidState) -> float:
        return max_stable_dt(
            state.grid, self.params, float(np.max(np.abs(state.u.values))), self.signal_speed(state)
        )

    def rates_array(self, rho, u, temp, length, ext_accel, eps):
        weight = self.policy.weight(rho)
        if self.model == "gp":
            drho, du = _gp_rates(rho, u, length, self.params, ext_accel, eps, self.scheme, weight)
            return drho, du, None if temp is None else np.zeros_like(temp)
        drho, du, dtemp = _perfect_rates(
            rho, u, temp, length, self.params, self.closure, ext_accel, eps, self.scheme, weight
        )
        if dtemp is None and temp is not None:
            dtemp = np.zeros_like(temp)
        return drho, du, dtemp

    def rhs(self, state: FluidState) -> FluidRates:
        if self.model == "gp":
            return rhs_gp(state, self.params, self.vext, self.scheme, self.policy)
        return rhs_perfect(state, self.params, self.closure, self.vext, self.scheme, self.policy)

    def step(self, state: FluidState, control: StepControl) -> FluidState:
        if self.model == "perfect":
            _check_state(state, self.closure)
        limit = control.cfl_safety * self.dt_max(state)
        if control.dt > limit * (1 + 1e-12):
            raise CflViolation(f"dt={control.dt:.4g} exceeds stable limit {limit:.4g}")
        grid = state.grid
        vext = self.vext or ExternalPotential.zero(grid)
        ext = vext.accel_array(self.params, self.scheme)
        eps = self.policy.floor(state.rho.values)
        temp = None if state.temp is None else state.temp.values
        rho, u, temp = rk4(
            lambda r, v, t: self.rates_array(r, v, t, grid.length, ext, eps),
            state.rho.values, state.u.values, temp, control.dt,
        )
        rho = clamp_density(rho, tolerance=max(eps, CLAMP_TOLERANCE * float(np.max(rho))))
        for name, arr in (("rho", rho), ("u", u), ("temp", temp)):
            if arr is not None and not (np.all(np.isfinite(arr)) and np.max(np.abs(arr)) < BLOWUP_LIMIT):
                raise BlowUp(f"{name} exceeded {BLOWUP_LIMIT:g} at t={state.time + control.dt:.6g}")
        if temp is not None:
            temp = clamp_density(temp, "temperature")
        return FluidState(
            ScalarField(grid, rho),
            ScalarField(grid, u),
            None if temp is None else ScalarField(grid, temp),
            state.time + control.dt,
        )


def clamp_density(rho, name="density", tolerance=None):
    """Zero out negative round-off; anything deeper than ``tolerance`` is an error."""
    low = np.min(rho)
    if tolerance is None:
        tolerance = CLAMP_TOLERANCE * float(np.max(rho))
    if low < -tolerance:
        raise NegativeDensity(f"{name} dropped to {low:.3e}")
    return np.maximum(rho, 0.0) if low < 0 else rho


def rk4(rates, rho, u, temp, dt):
    """Classical RK4 on the tuple (rho, u, temp); ``temp`` may be None."""
    def add(base, k, h):
        return tuple(None if b is None else b + h * kk for b, kk in zip(base, k))

    y0 = (rho, u, temp)
    k1 = rates(*y0)
    k2 = rates(*add(y0, k1, 0.5 * dt))
    k3 = rates(*add(y0, k2, 0.5 * dt))
    k4 = rates(*add(y0, k3, dt))
    out = []
    for y, a, b, c, d in zip(y0, k1, k2, k3, k4):
        out.append(None if y is None else y + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d))
    return tuple(out)


def step(state: FluidState, system: HydroSystem, control: StepControl) -> FluidState:
    return system.step(state, control)


@dataclass
class SimulationRecord:
    times: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    momentum: list = field(default_factory=list)
    snapshot_times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    def add(self, state: FluidState, snapshot: bool):
        self.times.append(state.time)
        self.mass.append(state.mass)
        self.momentum.append(state.momentum)
        if snapshot:
            self.snapshot_times.append(state.time)
            self.snapshots.append(state)

    @property
    def final(self) -> FluidState:
        return self.snapshots[-1]

    def max_mass_drift(self) -> float:
        m = np.asarray(self.mass)
        return float(np.max(np.abs(m - m[0])) / abs(m[0]))


def run_simulation(
    initial: FluidState,
    system: HydroSystem,
    control: StepControl,
    t_end: float,
    snapshot_every: int = 0,
) -> SimulationRecord:
    """Step from ``initial`` to ``t_end``; the last step is shortened to land on it.

    ``snapshot_every=0`` keeps only the first and last states.
    """
    record = SimulationRecord()
    record.add(initial, snapshot=True)
    state = initial
    span = t_end - initial.time
    n_steps = int(np.ceil(span / control.dt - 1e-9)) if span > 0 else 0
    for i in range(n_steps):
        dt = min(control.dt, t_end - state.time) if i == n_steps - 1 else control.dt
        state = system.step(state, StepControl(dt, control.integrator, control.cfl_safety))
        last = i == n_steps - 1
        record.add(state, snapshot=last or (snapshot_every and (i + 1) % snapshot_every == 0))
    return record
