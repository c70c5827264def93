"""Reference experiments behind ``qhydro verify`` and the acceptance tests.

Each ``measure_*`` function runs one experiment and returns plain numbers;
:data:`CHECKS` pairs them with tolerances.  The quick suite runs in well
under a minute; the full suite adds the long dispersion, oracle and
phase-space refinement runs.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .acoustics import HELIUM4, heisenberg_product, heisenberg_scale, measure_dispersion
from .fields import DiffScheme, Grid1D, ScalarField, gradient_array, laplacian_array
from .gp import WaveFunction, gp_energy, gp_step, madelung_compose, madelung_decompose
from .hydro import ExternalPotential, FluidState, HydroSystem, StepControl, run_simulation
from .kinetic import PhaseSpaceGrid, PhaseSpaceState, liouville_step, moment_residuals
from .quantum_potential import (
    PhysParams,
    VacuumPolicy,
    bohm_potential,
    quantum_force,
    quantum_force_direct,
)

__all__ = [
    "CheckResult",
    "CHECKS",
    "run_suite",
    "measure_quantum_identities",
    "measure_operator_orders",
    "measure_hydro_conservation",
    "measure_gp_conservation",
    "measure_kinetic_normalization",
    "measure_stationary_states",
    "measure_helium_scale",
    "measure_linear_dispersion",
    "measure_bogoliubov",
    "measure_sound_speed",
    "measure_oracle_equivalence",
    "measure_kinetic_consistency",
]

UNIT_GP = PhysParams(scatter_len=1.0 / (4.0 * np.pi))
TRAP_POLICY = VacuumPolicy(freeze=1e-2)


def perturbed_condensate(grid: Grid1D, rho0=1.0) -> FluidState:
    """Smooth, node-free condensate with density and velocity ripples."""
    x = 2.0 * np.pi * grid.x / grid.length
    rho = rho0 * (1.0 + 0.1 * np.cos(x) + 0.05 * np.sin(2 * x))
    u = 0.05 * np.sin(x) + 0.02 * np.cos(3 * x)
    return FluidState(ScalarField(grid, rho), ScalarField(grid, u))


def trap_ground_state(grid: Grid1D, params: PhysParams, omega=1.0) -> FluidState:
    """Harmonic-oscillator ground-state density centred in the box, at rest."""
    width2 = params.hbar / (params.mass * omega)
    d = grid.x - grid.length / 2
    rho = np.exp(-(d**2) / width2) / np.sqrt(np.pi * width2)
    return FluidState(ScalarField(grid, rho), grid.zeros())


def _l2_rel(a, b) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


# ---------------------------------------------------------------------------
# measurements

def measure_quantum_identities(n=128, length=2.0 * np.pi) -> dict:
    grid = Grid1D(n, length)
    prm = PhysParams()
    const = grid.constant(2.5)
    x = 2.0 * np.pi * grid.x / length
    rho = grid.field(lambda _: (1.0 + 0.3 * np.cos(x) + 0.1 * np.sin(2 * x)) ** 2)
    q = bohm_potential(rho, prm).values
    q_scaled = bohm_potential(rho.with_values(7.3 * rho.values), prm).values
    f_grad = quantum_force(rho, prm).values
    f_direct = quantum_force_direct(rho, prm).values
    return {
        "q_constant_max": float(np.max(np.abs(bohm_potential(const, prm).values))),
        "scale_invariance_rel": float(np.max(np.abs(q_scaled - q)) / np.max(np.abs(q))),
        "force_consistency": float(np.max(np.abs(f_grad - f_direct)) / np.max(np.abs(f_direct))),
    }


def measure_hydro_conservation(n=128, t_end=1.0) -> dict:
    grid = Grid1D(n, 2.0 * np.pi)
    state = perturbed_condensate(grid)
    system = HydroSystem(UNIT_GP)
    rec = run_simulation(state, system, StepControl(system.dt_max(state)), t_end)
    mom = np.asarray(rec.momentum)
    scale = float(np.sum(np.abs(state.rho.values * state.u.values)) * grid.spacing)
    return {
        "mass_drift": rec.max_mass_drift(),
        "momentum_drift": float(np.max(np.abs(mom - mom[0])) / scale),
    }


def measure_gp_conservation(n=128, t_end=1.0, dt=None) -> dict:
    """Norm drift over 1000 steps and energy drift per unit time at the default step."""
    grid = Grid1D(n, 2.0 * np.pi)
    state = perturbed_condensate(grid)
    n_total = state.mass / UNIT_GP.mass
    wf = madelung_compose(state, UNIT_GP, n_total)
    wf = WaveFunction(wf.psi, wf.norm, 0.0)
    dt = dt or UNIT_GP.mass * grid.spacing**2 / (np.pi * UNIT_GP.hbar)
    e0, norm0 = gp_energy(wf, UNIT_GP, None, n_total), wf.norm
    steps = max(1000, int(np.ceil(t_end / dt)))
    norm_drift = energy_drift = 0.0
    for i in range(steps):
        wf = gp_step(wf, UNIT_GP, None, n_total, dt)
        if i == 999:
            norm_drift = abs(wf.norm - norm0) / norm0
        if (i + 1) % 100 == 0 or i == steps - 1:
            e = gp_energy(wf, UNIT_GP, None, n_total)
            energy_drift = max(energy_drift, abs(e - e0) / abs(e0))
    return {"norm_drift_1000": norm_drift, "energy_drift_per_time": energy_drift / wf.time}


def measure_kinetic_normalization(nx=64, nv=32, steps=1000) -> dict:
    grid = PhaseSpaceGrid(Grid1D(nx, 2.0 * np.pi), nv, 6.0)
    prm = PhysParams()
    state = PhaseSpaceState.maxwellian(grid, 1.0, prm, density=lambda x: 1.0 + 0.2 * np.cos(x))
    dt = 0.5 * (grid.dx**2) / np.pi
    for _ in range(steps):
        state = liouville_step(state, prm, None, 1.0, dt)
    return {"norm_drift_1000": abs(state.norm - 1.0), "clipped": state.clipped}


def measure_stationary_states(t_end=1.0) -> dict:
    """Density change per unit time for uniform and trapped ground states, both engines."""
    out = {}
    grid = Grid1D(64, 2.0 * np.pi)
    uniform = FluidState.uniform(grid, 1.0)
    system = HydroSystem(UNIT_GP)
    rec = run_simulation(uniform, system, StepControl(system.dt_max(uniform)), t_end)
    out["uniform_hydro"] = _l2_rel(rec.final.rho.values, uniform.rho.values) / t_end
    n_total = uniform.mass
    wf = madelung_compose(uniform, UNIT_GP, n_total)
    d0 = wf.density(UNIT_GP, n_total).values
    # Strang splitting perturbs an exact eigenstate at O(dt^2)
    dt = 1e-4
    for _ in range(int(round(t_end / dt))):
        wf = gp_step(wf, UNIT_GP, None, n_total, dt)
    out["uniform_gp"] = _l2_rel(wf.density(UNIT_GP, n_total).values, d0) / t_end

    prm = PhysParams()
    grid = Grid1D(256, 20.0)
    trap = ExternalPotential.harmonic(grid, 1.0)
    ground = trap_ground_state(grid, prm)
    system = HydroSystem(prm, vext=trap, policy=TRAP_POLICY)
    rec = run_simulation(ground, system, StepControl(0.5 * system.dt_max(ground)), t_end)
    out["trap_hydro"] = _l2_rel(rec.final.rho.values, ground.rho.values) / t_end
    n_total = ground.mass
    wf = madelung_compose(ground, prm, n_total)
    d0 = wf.density(prm, n_total).values
    for _ in range(int(round(t_end / dt))):
        wf = gp_step(wf, prm, trap, n_total, dt)
    out["trap_gp"] = _l2_rel(wf.density(prm, n_total).values, d0) / t_end
    return out


def measure_helium_scale() -> dict:
    product = heisenberg_product(HELIUM4)
    return {"hbar_over_m": product, "scale_at_product": heisenberg_scale(product, 1.0, HELIUM4)}


def measure_linear_dispersion(modes=range(1, 9)) -> dict:
    curve = measure_dispersion("linear_acoustic", modes, 1e-3, UNIT_GP)
    return {"max_rel_err": curve.max_rel_err()}


def measure_bogoliubov(modes=range(1, 9), n=256, length=2.0 * np.pi, amplitude=1e-3, periods=3.0) -> dict:
    """Nonlinear fluid and wavefunction engines against the closed form."""
    kw = dict(n_points=n, length=length, periods=periods)
    hydro = measure_dispersion("nonlinear_hydro_gp", modes, amplitude, UNIT_GP, **kw)
    gp = measure_dispersion("gp_oracle", modes, amplitude, UNIT_GP, **kw)
    return {
        "hydro": hydro,
        "gp": gp,
        "hydro_max_rel_err": hydro.max_rel_err(),
        "gp_max_rel_err": gp.max_rel_err(),
        "cross_max": float(np.max(hydro.agreement(gp))),
    }


def measure_sound_speed(n=256, length=20.0 * np.pi) -> dict:
    """Phase velocity of the longest mode, and the free branch without interaction."""
    curve = measure_dispersion("nonlinear_hydro_gp", [1], 1e-3, UNIT_GP, n_points=n, length=length)
    k = curve.k[0]
    phase_velocity = curve.omega_measured[0] / k
    free = PhysParams()
    fcurve = measure_dispersion("nonlinear_hydro_gp", [1, 2, 3, 4], 1e-3, free, n_points=64)
    exact = free.hbar * fcurve.k**2 / (2 * free.mass)
    return {
        "k_min": float(k),
        "phase_velocity": float(phase_velocity),
        "sound_speed": UNIT_GP.sound_speed,
        "sound_rel_err": float(abs(phase_velocity - UNIT_GP.sound_speed) / UNIT_GP.sound_speed),
        "free_max_rel_err": float(np.max(np.abs(fcurve.omega_measured - exact) / exact)),
    }


def measure_oracle_equivalence(n=128, t_end=1.0, gp_dt=1e-4) -> dict:
    grid = Grid1D(n, 2.0 * np.pi)
    state = perturbed_condensate(grid)
    system = HydroSystem(UNIT_GP)
    rec = run_simulation(state, system, StepControl(system.dt_max(state)), t_end)
    n_total = state.mass / UNIT_GP.mass
    wf = madelung_compose(state, UNIT_GP, n_total)
    steps = int(round(t_end / gp_dt))
    for _ in range(steps):
        wf = gp_step(wf, UNIT_GP, None, n_total, gp_dt)
    fluid = madelung_decompose(wf, UNIT_GP, n_total)
    return {
        "density_l2_rel": _l2_rel(rec.final.rho.values, fluid.rho.values),
        "velocity_max_abs": float(np.max(np.abs(rec.final.u.values - fluid.u.values))),
    }


def _cold_beam_residuals(nx, nv, dt, t_end, width=0.15):
    prm = PhysParams()
    grid = PhaseSpaceGrid(Grid1D(nx, 2.0 * np.pi), nv, 2.0)
    state = PhaseSpaceState.cold_beam(grid, width, lambda x: 1 + 0.2 * np.cos(x), lambda x: 0.2 * np.sin(x))
    traj = [state]
    for _ in range(int(round(t_end / dt))):
        state = liouville_step(state, prm, None, 1.0, dt)
        traj.append(state)
    return moment_residuals(traj, prm, 1.0).max()


def measure_kinetic_consistency(coarse=(128, 64), t_end=0.5) -> dict:
    """Moment residuals under 2x refinement of dx, dv and dt, plus a uniform Maxwellian."""
    nx, nv = coarse
    dt_fine = (2.0 * np.pi / (2 * nx)) ** 2 / np.pi
    a = _cold_beam_residuals(nx, nv, 2 * dt_fine, t_end)
    b = _cold_beam_residuals(2 * nx, 2 * nv, dt_fine, t_end)
    prm = PhysParams()
    grid = PhaseSpaceGrid(Grid1D(64, 2.0 * np.pi), 64, 6.0)
    state = PhaseSpaceState.maxwellian(grid, 1.0, prm)
    traj = [state]
    for _ in range(4):
        state = liouville_step(state, prm, None, 1.0, 0.5 * grid.dx**2 / np.pi)
        traj.append(state)
    uni = moment_residuals(traj, prm, 1.0).max()
    return {
        "coarse": a,
        "fine": b,
        "order_continuity": float(np.log2(a["continuity"] / b["continuity"])),
        "order_momentum": float(np.log2(a["momentum"] / b["momentum"])),
        "maxwellian_max": max(uni.values()),
    }


def measure_operator_orders() -> dict:
    """Observed convergence order of the FD2/FD4 gradient and Laplacian on a smooth field."""
    out = {}
    for scheme in (DiffScheme.FD2, DiffScheme.FD4):
        for name, op, exact in (
            ("gradient", gradient_array, lambda x: np.cos(x) * np.exp(np.sin(x))),
            ("laplacian", laplacian_array, lambda x: (np.cos(x) ** 2 - np.sin(x)) * np.exp(np.sin(x))),
        ):
            errs = []
            for n in (32, 64):
                x = np.arange(n) * 2.0 * np.pi / n
                errs.append(np.max(np.abs(op(np.exp(np.sin(x)), 2.0 * np.pi, scheme) - exact(x))))
            out[f"{scheme.value}_{name}"] = float(np.log2(errs[0] / errs[1]))
    return out


# ---------------------------------------------------------------------------
# suites

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _le(value, tol):
    return value <= tol, f"{value:.3e} <= {tol:.0e}"


def _check_identities():
    m = measure_quantum_identities()
    ok = m["q_constant_max"] == 0.0 and m["scale_invariance_rel"] <= 1e-12 and m["force_consistency"] <= 1e-8
    return ok, ", ".join(f"{k}={v:.2e}" for k, v in m.items())


def _check_orders():
    m = measure_operator_orders()
    ok = all(abs(v - (2 if k.startswith("fd2") else 4)) <= 0.1 * (2 if k.startswith("fd2") else 4) for k, v in m.items())
    return ok, ", ".join(f"{k}={v:.2f}" for k, v in m.items())


def _check_hydro_conservation():
    m = measure_hydro_conservation()
    return m["mass_drift"] <= 1e-8 and m["momentum_drift"] <= 1e-8, ", ".join(f"{k}={v:.2e}" for k, v in m.items())


def _check_gp_conservation():
    m = measure_gp_conservation()
    ok = m["norm_drift_1000"] <= 1e-10 and m["energy_drift_per_time"] <= 1e-6
    return ok, ", ".join(f"{k}={v:.2e}" for k, v in m.items())


def _check_kinetic_norm():
    m = measure_kinetic_normalization()
    return _le(m["norm_drift_1000"], 1e-8)


def _check_stationary():
    m = measure_stationary_states()
    return max(m.values()) <= 1e-8, ", ".join(f"{k}={v:.2e}" for k, v in m.items())


def _check_helium():
    m = measure_helium_scale()
    ok = 1.5e-8 <= m["hbar_over_m"] <= 1.7e-8 and abs(m["scale_at_product"] - 1) < 1e-12
    return ok, f"hbar/m = {m['hbar_over_m']:.4e} m^2/s"


def _check_linear_dispersion():
    return _le(measure_linear_dispersion()["max_rel_err"], 1e-4)


def _check_bogoliubov():
    m = measure_bogoliubov()
    ok = m["hydro_max_rel_err"] <= 1e-2 and m["gp_max_rel_err"] <= 1e-2 and m["cross_max"] <= 5e-3
    return ok, f"hydro {m['hydro_max_rel_err']:.2e}, gp {m['gp_max_rel_err']:.2e}, cross {m['cross_max']:.2e}"


def _check_sound_speed():
    m = measure_sound_speed()
    ok = m["sound_rel_err"] <= 2e-2 and m["free_max_rel_err"] <= 1e-2
    return ok, f"omega/k - c_s: {m['sound_rel_err']:.2e}, free branch {m['free_max_rel_err']:.2e}"


def _check_oracle():
    return _le(measure_oracle_equivalence()["density_l2_rel"], 1e-3)


def _check_kinetic_consistency():
    m = measure_kinetic_consistency()
    ok = min(m["order_continuity"], m["order_momentum"]) >= 1.5 and m["maxwellian_max"] <= 1e-10
    return ok, (
        f"orders {m['order_continuity']:.2f}/{m['order_momentum']:.2f}, "
        f"maxwellian {m['maxwellian_max']:.1e}"
    )


QUICK = [
    ("quantum potential identities", _check_identities),
    ("finite-difference convergence orders", _check_orders),
    ("hydro mass and momentum", _check_hydro_conservation),
    ("GP norm and energy", _check_gp_conservation),
    ("kinetic normalization", _check_kinetic_norm),
    ("stationary states", _check_stationary),
    ("helium hbar/m", _check_helium),
    ("linear acoustic dispersion", _check_linear_dispersion),
]

FULL = QUICK + [
    ("Bogoliubov spectrum, hydro and GP", _check_bogoliubov),
    ("sound speed and free branch", _check_sound_speed),
    ("GP <-> hydro oracle equivalence", _check_oracle),
    ("kinetic moment consistency", _check_kinetic_consistency),
]

CHECKS = {"quick": QUICK, "full": FULL}


def run_suite(suite="quick", echo=None) -> list:
    results = []
    for name, check in CHECKS[suite]:
        start = time.perf_counter()
        try:
            ok, detail = check()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        res = CheckResult(name, bool(ok), detail, time.perf_counter() - start)
        results.append(res)
        if echo is not None:
            echo(f"[{'PASS' if res.passed else 'FAIL'}] {name}: {detail} ({res.seconds:.1f} s)")
    return results
