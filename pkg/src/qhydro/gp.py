"""Split-step Fourier solver for the Gross-Pitaevskii equation and the Madelung map.

The wavefunction is normalized to one; the particle number ``n_total`` only
scales the mean-field potential ``V_GP = g * n_total * |psi|^2`` with
``g = 4 pi hbar^2 a / m``, so that ``rho = m * n_total * |psi|^2`` is the
same mass density the hydro solver evolves.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivisionNearVacuum, NormDrift, PhaseWindingMismatch
from .fields import ComplexField, Grid1D, ScalarField, _fft_k, antiderivative_array, gradient_array
from .hydro import ExternalPotential, FluidState
from .quantum_potential import PhysParams, VacuumPolicy

__all__ = [
    "WaveFunction",
    "gp_step",
    "gp_evolve",
    "gp_energy",
    "madelung_decompose",
    "madelung_compose",
    "NORM_TOLERANCE",
]

NORM_TOLERANCE = 1e-10


@dataclass(frozen=True)
class WaveFunction:
    psi: ComplexField
    norm_target: float = 1.0
    time: float = 0.0

    @property
    def grid(self) -> Grid1D:
        return self.psi.grid

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi.values) ** 2) * self.grid.spacing)

    def density(self, params: PhysParams, n_total: float) -> ScalarField:
        return ScalarField(self.grid, params.mass * n_total * np.abs(self.psi.values) ** 2)

    @classmethod
    def from_values(cls, grid: Grid1D, values, normalize=True) -> "WaveFunction":
        values = np.asarray(values, dtype=complex)
        if normalize:
            values = values / np.sqrt(np.sum(np.abs(values) ** 2) * grid.spacing)
        return cls(ComplexField(grid, values))


def _require_quantum(params: PhysParams):
    if params.hbar <= 0:
        raise ValueError("the wavefunction solver needs hbar > 0")


def split_step_array(psi, length, params, v_ext, n_total, dt):
    """One Strang step on raw arrays; ``psi`` may carry leading batch axes."""
    n = psi.shape[-1]
    k = _fft_k(n, length)
    hbar, m = params.hbar, params.mass
    gn = params.coupling * n_total

    def potential_half(p):
        return p * np.exp(-0.5j * dt / hbar * (v_ext + gn * (p.real**2 + p.imag**2)))

    psi = potential_half(psi)
    psi = np.fft.ifft(np.exp(-0.5j * hbar * dt / m * k**2) * np.fft.fft(psi, axis=-1), axis=-1)
    return potential_half(psi)


def gp_step(
    wf: WaveFunction,
    params: PhysParams,
    vext: ExternalPotential | None,
    n_total: float,
    dt: float,
) -> WaveFunction:
    """Advance by ``dt``: half potential kick, exact kinetic drift in Fourier space, half kick.

    The mean-field part of each kick uses the density at the start of that
    kick; the kick leaves ``|psi|`` unchanged, so this is exact for the
    potential sub-problem.
    """
    _require_quantum(params)
    if not dt > 0:
        raise ValueError("dt must be positive")
    grid = wf.grid
    v = 0.0 if vext is None else vext.v_of_x.values
    psi = split_step_array(wf.psi.values, grid.length, params, v, n_total, dt)
    out = WaveFunction(ComplexField(grid, psi), wf.norm_target, wf.time + dt)
    drift = abs(out.norm - wf.norm_target) / wf.norm_target
    if drift > NORM_TOLERANCE:
        raise NormDrift(f"norm drifted by {drift:.3e} at t={out.time:.6g}")
    return out


def gp_evolve(wf, params, vext, n_total, dt, t_end, callback=None) -> WaveFunction:
    """Repeated :func:`gp_step` up to ``t_end``; the last step is shortened to land on it."""
    n_steps = int(np.ceil((t_end - wf.time) / dt - 1e-9))
    for i in range(n_steps):
        h = min(dt, t_end - wf.time) if i == n_steps - 1 else dt
        wf = gp_step(wf, params, vext, n_total, h)
        if callback is not None:
            callback(wf)
    return wf


def gp_energy(wf: WaveFunction, params: PhysParams, vext: ExternalPotential | None, n_total: float) -> float:
    """Energy per particle: kinetic + external + half the mean-field energy."""
    grid = wf.grid
    psi = wf.psi.values
    dpsi = gradient_array(psi, grid.length)
    dens = np.abs(psi) ** 2
    v = 0.0 if vext is None else vext.v_of_x.values
    integrand = (
        params.hbar**2 / (2 * params.mass) * np.abs(dpsi) ** 2
        + v * dens
        + 0.5 * params.coupling * n_total * dens**2
    )
    return float(np.sum(integrand) * grid.spacing)


def madelung_decompose(
    wf: WaveFunction,
    params: PhysParams,
    n_total: float,
    policy: VacuumPolicy = VacuumPolicy(),
) -> FluidState:
    """rho = m N |psi|^2 and u = (hbar/m) Im(psi* dpsi/dx) / |psi|^2."""
    _require_quantum(params)
    grid = wf.grid
    psi = wf.psi.values
    dens = np.abs(psi) ** 2
    rho = params.mass * n_total * dens
    eps = policy.floor(rho) / (params.mass * n_total)
    if eps == 0 and np.any(dens == 0):
        raise DivisionNearVacuum("wavefunction has a node and no vacuum floor is set")
    current = np.imag(np.conj(psi) * gradient_array(psi, grid.length))
    u = params.hbar / params.mass * current / (dens + eps)
    return FluidState(ScalarField(grid, rho), ScalarField(grid, u), None, wf.time)


def madelung_compose(
    state: FluidState,
    params: PhysParams,
    n_total: float | None = None,
    winding_tol: float = 1e-6,
) -> WaveFunction:
    """Inverse Madelung map: amplitude from rho, phase from integrating m u / hbar.

    The phase must wind by a whole multiple of 2 pi around the ring; the
    periodic part of the phase has zero mean.
    """
    _require_quantum(params)
    grid = state.grid
    if n_total is None:
        n_total = state.mass / params.mass
    grad_phase = params.mass * state.u.values / params.hbar
    winding = float(np.sum(grad_phase) * grid.spacing / (2 * np.pi))
    if abs(winding - round(winding)) > winding_tol:
        raise PhaseWindingMismatch(
            f"phase winds by {winding:.9f} turns; the velocity circulation must be quantized"
        )
    mean = np.mean(grad_phase)
    phase = 2 * np.pi * round(winding) * grid.x / grid.length
    phase = phase + antiderivative_array(grad_phase - mean, grid.length)
    amp = np.sqrt(state.rho.values / (params.mass * n_total))
    psi = amp * np.exp(1j * phase)
    norm = float(np.sum(amp**2) * grid.spacing)
    return WaveFunction(ComplexField(grid, psi), norm, state.time)
