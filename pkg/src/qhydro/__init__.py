"""Quantum hydrodynamics: Bohm potential, fluid and wavefunction solvers, acoustics and kinetics."""

__version__ = "0.1.0"

from .acoustics import (
    HELIUM4,
    AcousticState,
    DispersionCurve,
    DispersionSource,
    acoustic_energy,
    acoustic_step,
    bogoliubov_omega,
    heisenberg_product,
    heisenberg_scale,
    measure_dispersion,
    sound_speed,
)
from .errors import *  # noqa: F401,F403
from .fields import ComplexField, DiffScheme, Grid1D, ScalarField, biharmonic, gradient, integrate, laplacian
from .gp import WaveFunction, gp_energy, gp_step, madelung_compose, madelung_decompose
from .hydro import (
    ClosureKind,
    ClosureModel,
    ExternalPotential,
    FluidState,
    HydroSystem,
    SimulationRecord,
    StepControl,
    rhs_gp,
    rhs_perfect,
    run_simulation,
    step,
)
from .kinetic import PhaseSpaceGrid, PhaseSpaceState, liouville_step, moment_residuals, moments
from .quantum_potential import (
    PhysParams,
    VacuumPolicy,
    bohm_potential,
    quantum_force,
    quantum_force_direct,
    quantum_force_stress,
)
