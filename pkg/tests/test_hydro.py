import numpy as np
import pytest

from qhydro import (
    ClosureKind,
    ClosureModel,
    DiffScheme,
    ExternalPotential,
    FluidState,
    Grid1D,
    HydroSystem,
    PhysParams,
    ScalarField,
    StepControl,
    VacuumPolicy,
    bogoliubov_omega,
    quantum_force_stress,
    rhs_gp,
    rhs_perfect,
    run_simulation,
    step,
)
from qhydro.errors import BlowUp, CflViolation, ClosureMismatch, NegativeDensity
from qhydro.verification import TRAP_POLICY, perturbed_condensate, trap_ground_state


def _state(grid, rho, u=None, temp=None):
    u = np.zeros(grid.n_points) if u is None else u
    t = None if temp is None else ScalarField(grid, temp)
    return FluidState(ScalarField(grid, rho), ScalarField(grid, u), t)


# -- right-hand sides ------------------------------------------------------

def test_uniform_equilibrium_has_zero_rates(ring):
    p = PhysParams(scatter_len=0.1)
    s = FluidState.uniform(ring, 1.0, temp=2.0)
    for closure in (ClosureModel.pressureless(), ClosureModel.isothermal(2.0), ClosureModel.ideal_gas_heat()):
        r = rhs_perfect(s, p, closure)
        assert np.all(r.rho == 0) and np.all(r.u == 0) and np.all(r.temp == 0)
    r = rhs_gp(s, p)
    assert np.all(r.rho == 0) and np.all(r.u == 0)


def test_pressureless_gaussian_accelerates_by_quantum_force():
    g = Grid1D(256, 20.0)
    rho = np.exp(-((g.x - 10.0) ** 2))
    s = _state(g, rho)
    p = PhysParams()
    r = rhs_perfect(s, p, ClosureModel.pressureless())
    oracle = quantum_force_stress(s.rho, p).values
    assert np.max(np.abs(r.u - oracle)) <= 1e-12 * np.max(np.abs(oracle))
    assert np.all(r.rho == 0)


def test_isothermal_classical_restoring_force(ring):
    # hbar = 0: du/dt = -(kappa T0/m) d(rho1)/dx / rho0 to first order
    t0, amp = 1.7, 1e-6
    p = PhysParams(hbar=0.0, mass=2.0, boltzmann=1.3)
    rho = 1.0 + amp * np.cos(ring.x)
    r = rhs_perfect(_state(ring, rho), p, ClosureModel.isothermal(t0))
    expected = (p.boltzmann * t0 / p.mass) * amp * np.sin(ring.x)
    assert np.max(np.abs(r.u - expected)) <= 1e-5 * amp


def test_gp_linearised_single_mode(ring, unit_gp):
    k, amp = 3.0, 1e-2
    rho = 1.0 + amp * np.cos(k * ring.x)
    r = rhs_gp(_state(ring, rho), unit_gp)
    # the dispersive term enters with +(hbar^2/4m^2 rho0) d(lap rho1)/dx
    expected = (unit_gp.interaction * amp * k + amp * k**3 / 4.0) * np.sin(k * ring.x)
    # second-order corrections in the amplitude
    assert np.max(np.abs(r.u - expected)) <= 3 * amp**2 * k**3


def test_trap_ground_state_is_stationary():
    g = Grid1D(256, 20.0)
    p = PhysParams()
    s = trap_ground_state(g, p)
    trap = ExternalPotential.harmonic(g, 1.0)
    r = rhs_gp(s, p, trap, policy=TRAP_POLICY)
    assert np.max(np.abs(r.rho)) <= 1e-8
    assert np.max(np.abs(r.u)) <= 1e-8


def test_closure_mismatch(ring):
    s = FluidState.uniform(ring, 1.0)
    with pytest.raises(ClosureMismatch):
        rhs_perfect(s, PhysParams(), ClosureModel.ideal_gas_heat())


def test_ideal_gas_heat_advects_temperature(ring):
    # q = 0: dT/dt = -d(T u)/dx
    temp = 1.0 + 0.2 * np.cos(ring.x)
    u = 0.1 * np.sin(ring.x)
    r = rhs_perfect(_state(ring, np.ones(ring.n_points), u, temp), PhysParams(hbar=0.0), ClosureModel.ideal_gas_heat())
    expected = -(-0.2 * np.sin(ring.x) * u + temp * 0.1 * np.cos(ring.x))
    assert np.max(np.abs(r.temp - expected)) < 1e-13


# -- stepping ---------------------------------------------------------------

def test_uniform_state_unchanged(ring, unit_gp):
    s = FluidState.uniform(ring, 1.0)
    system = HydroSystem(unit_gp)
    out = step(s, system, StepControl(system.dt_max(s)))
    assert np.max(np.abs(out.rho.values - 1.0)) <= 1e-14
    assert np.max(np.abs(out.u.values)) <= 1e-14
    assert out.time == pytest.approx(system.dt_max(s))


def test_one_period_returns_in_phase(unit_gp):
    g = Grid1D(64, 2 * np.pi)
    k, amp = 2.0, 1e-3
    omega = bogoliubov_omega(k, unit_gp)
    rho1 = amp * np.cos(k * g.x)
    s = _state(g, 1.0 + rho1, omega / k * rho1)
    system = HydroSystem(unit_gp)
    period = 2 * np.pi / omega
    rec = run_simulation(s, system, StepControl(0.9 * system.dt_max(s)), period)
    c = np.fft.rfft(rec.final.rho.values - 1.0)[2]
    # residual phase of the travelling wave, converted into a frequency error
    phase = np.angle(c / np.fft.rfft(rho1)[2])
    assert abs(phase) / (2 * np.pi) <= 0.01


def test_cfl_violation(ring, unit_gp):
    s = FluidState.uniform(ring, 1.0)
    system = HydroSystem(unit_gp)
    with pytest.raises(CflViolation):
        system.step(s, StepControl(2 * system.dt_max(s)))
    with pytest.raises(CflViolation):
        system.step(s, StepControl(0.8 * system.dt_max(s), cfl_safety=0.5))


def test_step_control_validation():
    for kw in ({"dt": 0.0}, {"dt": 1.0, "cfl_safety": 1.5}, {"dt": 1.0, "integrator": "euler"}):
        with pytest.raises(ValueError):
            StepControl(**kw)


def test_negative_density_beyond_clamp(ring):
    # a kinked profile advected spectrally rings below zero in the empty half
    rho = np.maximum(np.cos(ring.x), 0.0)
    s = _state(ring, rho, np.ones(ring.n_points))
    system = HydroSystem(PhysParams(hbar=0.0))
    with pytest.raises(NegativeDensity):
        system.step(s, StepControl(0.5 * system.dt_max(s)))


def test_clamp_zeroes_roundoff():
    from qhydro.hydro import clamp_density

    out = clamp_density(np.array([1.0, -1e-14, 0.5]))
    assert out[1] == 0.0
    with pytest.raises(NegativeDensity):
        clamp_density(np.array([1.0, -1e-6, 0.5]))


def test_blow_up_detected(ring):
    s = _state(ring, np.ones(ring.n_points), np.full(ring.n_points, 1e13))
    system = HydroSystem(PhysParams(hbar=0.0))
    with pytest.raises(BlowUp):
        system.step(s, StepControl(1e-20))


def test_run_simulation_t_end_zero(ring, unit_gp):
    s = perturbed_condensate(ring)
    rec = run_simulation(s, HydroSystem(unit_gp), StepControl(1e-3), 0.0)
    assert rec.times == [0.0] and len(rec.snapshots) == 1 and rec.final is s


def test_snapshot_cadence(ring, unit_gp):
    s = perturbed_condensate(ring)
    system = HydroSystem(unit_gp)
    dt = 0.5 * system.dt_max(s)
    rec = run_simulation(s, system, StepControl(dt), 10.5 * dt, snapshot_every=4)
    assert len(rec.times) == 12
    assert rec.snapshot_times[-1] == pytest.approx(10.5 * dt)
    assert len(rec.snapshots) == 1 + 2 + 1


@pytest.mark.parametrize("model", ["gp", "perfect"])
def test_mass_and_momentum_conservation(model, unit_gp):
    g = Grid1D(128, 2 * np.pi)
    s = perturbed_condensate(g)
    if model == "perfect":
        s = FluidState(s.rho, s.u, g.constant(0.5))
        system = HydroSystem(unit_gp, "perfect", ClosureModel.ideal_gas_heat())
    else:
        system = HydroSystem(unit_gp)
    rec = run_simulation(s, system, StepControl(system.dt_max(s)), 1.0)
    assert rec.max_mass_drift() <= 1e-8
    mom = np.asarray(rec.momentum)
    scale = np.sum(np.abs(s.rho.values * s.u.values)) * g.spacing
    assert np.max(np.abs(mom - mom[0])) <= 1e-8 * scale


def test_galilean_shift(unit_gp):
    g = Grid1D(128, 2 * np.pi)
    s = perturbed_condensate(g)
    system = HydroSystem(unit_gp)
    t_end, shift = 0.5, 4
    ub = shift * g.spacing / t_end
    boosted = FluidState(s.rho, s.u.with_values(s.u.values + ub))
    dt = 0.5 * system.dt_max(boosted)
    a = run_simulation(s, system, StepControl(dt), t_end).final
    b = run_simulation(boosted, system, StepControl(dt), t_end).final
    assert np.max(np.abs(np.roll(a.rho.values, shift) - b.rho.values)) <= 1e-6
    assert np.max(np.abs(np.roll(a.u.values, shift) + ub - b.u.values)) <= 1e-6


def test_classical_limit_scales_as_hbar_squared():
    g = Grid1D(64, 2 * np.pi)
    rho = 1.0 + 0.1 * np.cos(g.x)
    s = _state(g, rho)
    closure = ClosureModel.isothermal(1.0)

    def run(hbar):
        system = HydroSystem(PhysParams(hbar=hbar), "perfect", closure)
        return run_simulation(s, system, StepControl(0.01), 0.5).final.rho.values

    ref = run(0.0)
    d1 = np.max(np.abs(run(0.1) - ref))
    d2 = np.max(np.abs(run(0.05) - ref))
    assert d1 > 0
    assert np.log2(d1 / d2) == pytest.approx(2.0, abs=0.1)


def test_stationary_uniform_and_trap():
    g = Grid1D(64, 2 * np.pi)
    p = PhysParams(scatter_len=1 / (4 * np.pi))
    s = FluidState.uniform(g, 1.0)
    system = HydroSystem(p)
    rec = run_simulation(s, system, StepControl(system.dt_max(s)), 1.0)
    assert np.linalg.norm(rec.final.rho.values - 1.0) / np.linalg.norm(s.rho.values) <= 1e-8

    g = Grid1D(256, 20.0)
    p = PhysParams()
    s = trap_ground_state(g, p)
    system = HydroSystem(p, vext=ExternalPotential.harmonic(g, 1.0), policy=TRAP_POLICY)
    rec = run_simulation(s, system, StepControl(0.5 * system.dt_max(s)), 1.0)
    assert np.linalg.norm(rec.final.rho.values - s.rho.values) / np.linalg.norm(s.rho.values) <= 1e-8


def _free_packet(L=8.0, n=64):
    g = Grid1D(n, L)
    d = g.x - L / 2
    images = np.arange(-3, 4)[:, None] * L
    rho = np.exp(-((d + images) ** 2) / 2).sum(axis=0) / np.sqrt(2 * np.pi)
    return g, d, rho


def _width2(rho, d):
    return np.sum(rho * d**2) / np.sum(rho)


@pytest.mark.parametrize("t_end", [0.5, 0.7])
def test_free_gaussian_spreading(t_end):
    # sigma0 = hbar = m = 1: width^2 = 1 + (t/2)^2
    g, d, rho = _free_packet()
    s = _state(g, rho)
    system = HydroSystem(PhysParams())
    policy = system.policy
    state = s
    while state.time < t_end - 1e-12:
        dt = min(0.3 * system.dt_max(state), t_end - state.time)
        state = system.step(state, StepControl(dt))
        assert np.min(state.rho.values) > policy.floor(state.rho.values)
    exact = 1.0 + (t_end / 2) ** 2
    w2 = _width2(state.rho.values, d)
    assert abs(w2 - exact) / exact <= 5e-3

    # the same packet under the exact free propagator on the ring
    k = 2 * np.pi * np.fft.fftfreq(g.n_points, g.spacing)
    psi = np.fft.ifft(np.exp(-0.5j * k**2 * t_end) * np.fft.fft(np.sqrt(rho)))
    ring_w2 = _width2(np.abs(psi) ** 2, d)
    assert abs(w2 - ring_w2) / ring_w2 <= 1e-6


@pytest.mark.parametrize("scheme", [DiffScheme.FD2, DiffScheme.FD4])
def test_fd_schemes_conserve_mass(scheme, unit_gp):
    g = Grid1D(64, 2 * np.pi)
    s = perturbed_condensate(g)
    system = HydroSystem(unit_gp, scheme=scheme)
    rec = run_simulation(s, system, StepControl(system.dt_max(s)), 0.5)
    assert rec.max_mass_drift() <= 1e-12


def test_harmonic_potential_force_is_exact():
    g = Grid1D(32, 10.0)
    v = ExternalPotential.harmonic(g, 2.0, mass=3.0)
    d = g.x - 5.0
    assert np.allclose(v.accel_array(PhysParams(mass=3.0)), -4.0 * d)
    z = ExternalPotential.zero(g)
    assert np.all(z.accel_array(PhysParams()) == 0)
