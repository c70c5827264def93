"""A harmonic-trap ground state stays put under the quantum fluid equations,
because the Bohm force balances the trap exactly.  Displaced by d, the same
cloud sloshes rigidly with its centre at d cos(omega t); that part runs on the
wavefunction engine, since the fluid engine cannot carry a moving cloud whose
Gaussian tails sit at roundoff level.

python3 demos/trap_ground_state.py
"""
import numpy as np

from qhydro import (
    ExternalPotential,
    Grid1D,
    HydroSystem,
    PhysParams,
    StepControl,
    VacuumPolicy,
    WaveFunction,
    gp_step,
    run_simulation,
)
from qhydro.verification import trap_ground_state

grid = Grid1D(256, 20.0)
params = PhysParams()
trap = ExternalPotential.harmonic(grid, 1.0)
ground = trap_ground_state(grid, params)
system = HydroSystem(params, vext=trap, policy=VacuumPolicy(freeze=1e-2))
d = grid.x - grid.length / 2


def centre_width(rho):
    c = np.sum(rho * d) / np.sum(rho)
    return c, np.sqrt(np.sum(rho * (d - c) ** 2) / np.sum(rho))


rec = run_simulation(ground, system, StepControl(0.5 * system.dt_max(ground)), 1.0)
w0, w1 = centre_width(ground.rho.values)[1], centre_width(rec.final.rho.values)[1]
print(f"fluid engine, ground state t = 0 -> 1: width {w0:.8f} -> {w1:.8f}")

shift, dt = 1.0, 1e-3
wf = WaveFunction.from_values(grid, np.exp(-((d - shift) ** 2) / 2))
print("\nwavefunction engine, displaced ground state")
print("    t   centre  d cos t    width")
for t in np.linspace(0, np.pi, 5):
    while wf.time < t - dt / 2:
        wf = gp_step(wf, params, trap, 1.0, dt)
    c, w = centre_width(np.abs(wf.psi.values) ** 2)
    print(f"{t:5.3f} {c:8.4f} {shift * np.cos(t):8.4f} {w:8.4f}")
