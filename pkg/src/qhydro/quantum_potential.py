"""Bohm quantum potential and the quantum force it exerts on the fluid."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivisionNearVacuum, NegativeDensity, NonFiniteInput
from .fields import (
    DiffScheme,
    ScalarField,
    gradient_array,
    laplacian_array,
)

__all__ = [
    "PhysParams",
    "VacuumPolicy",
    "bohm_potential",
    "quantum_force",
    "quantum_force_direct",
    "quantum_force_stress",
    "quantum_stress_array",
    "quantum_acceleration_array",
]


@dataclass(frozen=True)
class PhysParams:
    """Physical constants.  Nondimensional defaults: hbar = mass = rho0 = 1.

    ``hbar = 0`` is accepted and switches the quantum terms off (classical
    limit); every other constant except ``scatter_len`` must be positive.
    """

    hbar: float = 1.0
    mass: float = 1.0
    boltzmann: float = 1.0
    scatter_len: float = 0.0
    rho0: float = 1.0

    def __post_init__(self):
        for name in ("mass", "boltzmann", "rho0"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        for name in ("hbar", "scatter_len"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be non-negative, got {value}")

    @property
    def interaction(self) -> float:
        """Coefficient ``4 pi hbar^2 a / m^3`` multiplying grad(rho) in the Euler equation."""
        return 4.0 * np.pi * self.hbar**2 * self.scatter_len / self.mass**3

    @property
    def coupling(self) -> float:
        """GP coupling ``g = 4 pi hbar^2 a / m`` (V_GP = g * N * |psi|^2)."""
        return 4.0 * np.pi * self.hbar**2 * self.scatter_len / self.mass

    @property
    def sound_speed(self) -> float:
        return float(np.sqrt(self.interaction * self.rho0))

    def replace(self, **changes) -> "PhysParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class VacuumPolicy:
    """Density floor used wherever the equations divide by sqrt(rho).

    ``epsilon=None`` selects the relative floor ``1e-12 * max(rho)``;
    ``epsilon=0`` disables the floor and requires ``rho > 0`` everywhere.

    ``kind="hard"`` floors as ``sqrt(max(rho, eps))``.  The kink this puts in
    the amplitude rings through every spectral derivative, so the default
    ``kind="soft"`` uses the analytic ``sqrt(rho + eps)`` instead.

    ``freeze > 0`` makes the hydro solvers treat fluid with density well
    below ``freeze * max(rho)`` as a static atmosphere: its acceleration is
    multiplied by ``rho^2 / (rho^2 + (freeze * max(rho))^2)``.  Needed for
    states with Gaussian vacuum tails; leave at 0 otherwise.
    """

    epsilon: float | None = None
    relative: float = 1e-12
    kind: str = "soft"
    freeze: float = 0.0

    def __post_init__(self):
        if not self.freeze >= 0:
            raise ValueError(f"freeze must be >= 0, got {self.freeze}")
        if self.epsilon is not None and not (self.epsilon >= 0):
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.kind not in ("soft", "hard"):
            raise ValueError(f"kind must be 'soft' or 'hard', got {self.kind!r}")

    def floor(self, rho) -> float:
        if self.epsilon is None:
            return self.relative * float(np.max(rho))
        return float(self.epsilon)

    def weight(self, rho):
        """Acceleration weight, 1 away from vacuum; None when freezing is off."""
        if self.freeze == 0:
            return None
        scale = (self.freeze * float(np.max(rho))) ** 2
        r2 = rho * rho
        return r2 / (r2 + scale)


def _amplitude(rho, eps, kind="soft"):
    rho = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(rho)):
        raise NonFiniteInput("density contains NaN or Inf")
    if np.any(rho < 0):
        raise NegativeDensity(f"density has negative values (min {rho.min():.3e})")
    if eps == 0 and np.any(rho <= 0):
        raise DivisionNearVacuum("density reaches zero and no vacuum floor is set")
    if kind == "hard":
        return np.sqrt(np.maximum(rho, eps))
    return np.sqrt(rho + eps)


def bohm_potential_array(rho, length, params, eps, scheme=DiffScheme.SPECTRAL, kind="soft"):
    amp = _amplitude(rho, eps, kind)
    if params.hbar == 0:
        return np.zeros_like(amp)
    return -(params.hbar**2 / (2.0 * params.mass)) * laplacian_array(amp, length, scheme) / amp


def quantum_force_array(rho, length, params, eps, scheme=DiffScheme.SPECTRAL, kind="soft"):
    """Acceleration ``-(1/m) dQ/dx`` (force per unit mass)."""
    q = bohm_potential_array(rho, length, params, eps, scheme, kind)
    return -gradient_array(q, length, scheme) / params.mass


def quantum_stress_array(rho, length, params, eps, scheme=DiffScheme.SPECTRAL, derivs=None):
    """Quantum momentum flux ``(hbar^2/4m^2) (rho'' - rho'^2/rho)``.

    ``rho * d/dx(-Q/m) = d(stress)/dx``, and the stress carries no
    ``1/sqrt(rho)`` so roundoff stays small where the density is tiny.
    """
    rho = np.asarray(rho, dtype=float)
    if params.hbar == 0:
        return np.zeros_like(rho)
    if derivs is None:
        d1 = gradient_array(rho, length, scheme)
        d2 = laplacian_array(rho, length, scheme)
    else:
        d1, d2 = derivs
    return (params.hbar**2 / (4.0 * params.mass**2)) * (d2 - d1 * d1 / (rho + eps))


def quantum_acceleration_array(rho, length, params, eps, scheme=DiffScheme.SPECTRAL, derivs=None):
    """Quantum force per unit mass in conservative form; shared by every engine.

    ``derivs`` may carry precomputed ``(rho', rho'')`` to save transforms.
    """
    rho = np.maximum(rho, 0.0)
    if params.hbar == 0:
        return np.zeros_like(rho)
    stress = quantum_stress_array(rho, length, params, eps, scheme, derivs)
    return gradient_array(stress, length, scheme) / (rho + eps)


def bohm_potential(
    rho: ScalarField,
    params: PhysParams,
    policy: VacuumPolicy = VacuumPolicy(),
    scheme=DiffScheme.SPECTRAL,
) -> ScalarField:
    """Q = -(hbar^2/2m) * lap(A)/A with A the floored amplitude sqrt(rho).

    Q depends on rho only through the curvature of its square root, so it is
    unchanged by a constant rescaling of rho and vanishes for uniform rho.
    """
    eps = policy.floor(rho.values)
    return rho.with_values(
        bohm_potential_array(rho.values, rho.grid.length, params, eps, scheme, policy.kind)
    )


def quantum_force(
    rho: ScalarField,
    params: PhysParams,
    policy: VacuumPolicy = VacuumPolicy(),
    scheme=DiffScheme.SPECTRAL,
) -> ScalarField:
    """Quantum acceleration as the gradient of the Bohm potential, -(1/m) dQ/dx."""
    eps = policy.floor(rho.values)
    return rho.with_values(
        quantum_force_array(rho.values, rho.grid.length, params, eps, scheme, policy.kind)
    )


def quantum_force_stress(
    rho: ScalarField,
    params: PhysParams,
    policy: VacuumPolicy = VacuumPolicy(),
    scheme=DiffScheme.SPECTRAL,
) -> ScalarField:
    """Quantum acceleration as the divergence of the quantum stress over rho.

    This is the form the time steppers integrate: its density-weighted
    integral vanishes identically, so it never changes the total momentum.
    """
    eps = policy.floor(rho.values)
    _amplitude(rho.values, eps, policy.kind)
    return rho.with_values(quantum_acceleration_array(rho.values, rho.grid.length, params, eps, scheme))


def quantum_force_direct(
    rho: ScalarField,
    params: PhysParams,
    policy: VacuumPolicy = VacuumPolicy(),
    scheme=DiffScheme.SPECTRAL,
) -> ScalarField:
    """Quantum acceleration ``(hbar^2/2m^2) d/dx(A''/A)`` expanded by the quotient rule.

    Uses ``(A''' A - A'' A') / A^2`` so it shares no intermediate with
    :func:`quantum_force`; the two agree to discretization error.
    """
    eps = policy.floor(rho.values)
    amp = _amplitude(rho.values, eps, policy.kind)
    if params.hbar == 0:
        return rho.with_values(np.zeros_like(amp))
    length = rho.grid.length
    d1 = gradient_array(amp, length, scheme)
    d2 = laplacian_array(amp, length, scheme)
    d3 = gradient_array(d2, length, scheme)
    coeff = params.hbar**2 / (2.0 * params.mass**2)
    return rho.with_values(coeff * (d3 * amp - d2 * d1) / amp**2)
