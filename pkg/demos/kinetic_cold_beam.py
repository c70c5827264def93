"""Phase-space evolution of a narrow beam with the self-consistent Bohm force,
compared with the pressureless quantum fluid it should reduce to.

python3 demos/kinetic_cold_beam.py
"""
import numpy as np

from qhydro import (
    ClosureModel,
    FluidState,
    Grid1D,
    HydroSystem,
    PhaseSpaceGrid,
    PhaseSpaceState,
    PhysParams,
    ScalarField,
    StepControl,
    liouville_step,
    moment_residuals,
    moments,
    run_simulation,
)

params = PhysParams()
grid = PhaseSpaceGrid(Grid1D(64, 2 * np.pi), 256, 2.0)
x = grid.x_grid.x
density = lambda x: 1 + 0.2 * np.cos(x)  # noqa: E731
velocity = lambda x: 0.2 * np.sin(x)  # noqa: E731
dt = 0.5 * grid.dx**2 / np.pi
fluid = FluidState(ScalarField(grid.x_grid, density(x) / (2 * np.pi)), ScalarField(grid.x_grid, velocity(x)))
system = HydroSystem(params, "perfect", ClosureModel.pressureless())

for width in (0.2, 0.1, 0.05):
    state = PhaseSpaceState.cold_beam(grid, width, density, velocity)
    traj = [state]
    for _ in range(int(round(0.3 / dt))):
        state = liouville_step(state, params, None, 1.0, dt)
        traj.append(state)
    ref = run_simulation(fluid, system, StepControl(dt), state.time).final
    m = moments(state, params, 1.0)
    gap = np.max(np.abs(m.rho.values - ref.rho.values)) / np.max(ref.rho.values)
    res = moment_residuals(traj[-3:], params, 1.0).max()
    print(
        f"width {width:4.2f}: |rho_kin - rho_fluid| / max {gap:.2e}, "
        f"continuity residual {res['continuity']:.1e}, momentum residual {res['momentum']:.1e}"
    )
