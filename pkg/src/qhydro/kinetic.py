"""One-particle phase-space solver with the self-consistent Bohm force.

The distribution ``f(x, v)`` lives on a periodic ring in ``x`` and on a
symmetric velocity window ``[-v_max, v_max)`` with cell-centred nodes.  Each
step is a Strang split: half a free-streaming shift in ``x``, a full
acceleration shift in ``v`` with the force rebuilt from the current density,
half a shift in ``x``.  Shifts are done in Fourier space by default, which
keeps every row sum (hence the normalization) exact.

Velocity moments give the fluid fields; :func:`moment_residuals` checks
that they satisfy continuity, momentum and heat balance.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import CflViolation, CutoffBreach, DivisionNearVacuum, InsufficientTrajectory
from .fields import DiffScheme, Grid1D, ScalarField, gradient_array
from .hydro import ExternalPotential
from .quantum_potential import PhysParams, VacuumPolicy, quantum_acceleration_array

__all__ = [
    "PhaseSpaceGrid",
    "PhaseSpaceState",
    "Moments",
    "ResidualReport",
    "kinetic_acceleration",
    "kinetic_dt_max",
    "liouville_step",
    "moments",
    "moment_residuals",
    "NORMALIZATION_TOLERANCE",
    "CUTOFF_TOLERANCE",
]

NORMALIZATION_TOLERANCE = 1e-8
CUTOFF_TOLERANCE = 1e-6
CUTOFF_FRACTION = 0.9
CLIP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PhaseSpaceGrid:
    x_grid: Grid1D
    n_v: int
    v_max: float

    def __post_init__(self):
        if int(self.n_v) != self.n_v or self.n_v < 16 or self.n_v % 2:
            raise ValueError(f"n_v must be an even integer >= 16, got {self.n_v}")
        if not (np.isfinite(self.v_max) and self.v_max > 0):
            raise ValueError(f"v_max must be positive, got {self.v_max}")
        object.__setattr__(self, "n_v", int(self.n_v))

    @property
    def dv(self) -> float:
        return 2.0 * self.v_max / self.n_v

    @property
    def v(self) -> np.ndarray:
        return -self.v_max + (np.arange(self.n_v) + 0.5) * self.dv

    @property
    def dx(self) -> float:
        return self.x_grid.spacing

    @property
    def shape(self) -> tuple:
        return (self.x_grid.n_points, self.n_v)

    def mesh(self):
        """``(x, v)`` arrays of shape ``(n_x, n_v)``."""
        return np.meshgrid(self.x_grid.x, self.v, indexing="ij")


@dataclass(frozen=True)
class PhaseSpaceState:
    """``f[i, j] = f(x_i, v_j)``; non-negative and normalized to one.

    ``clipped`` accumulates the mass removed by positivity clipping.
    """

    grid: PhaseSpaceGrid
    f: np.ndarray
    time: float = 0.0
    clipped: float = 0.0

    def __post_init__(self):
        f = np.array(self.f, dtype=float)
        if f.shape != self.grid.shape:
            raise ValueError(f"f has shape {f.shape}, grid expects {self.grid.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError("f contains NaN or Inf")
        if f.min() < -CLIP_TOLERANCE * max(f.max(), 1.0):
            raise ValueError(f"f has negative values (min {f.min():.3e})")
        norm = float(f.sum()) * self.grid.dx * self.grid.dv
        if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"f integrates to {norm:.12g}, expected 1")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)

    @property
    def norm(self) -> float:
        return float(self.f.sum()) * self.grid.dx * self.grid.dv

    def spatial_density(self) -> np.ndarray:
        """``int f dv`` at each x node."""
        return self.f.sum(axis=1) * self.grid.dv

    def cutoff_mass(self) -> float:
        """Fraction of the mass sitting at ``|v| > 0.9 v_max``."""
        outer = np.abs(self.grid.v) > CUTOFF_FRACTION * self.grid.v_max
        return float(self.f[:, outer].sum()) * self.grid.dx * self.grid.dv

    @classmethod
    def from_function(cls, grid: PhaseSpaceGrid, func, time=0.0) -> "PhaseSpaceState":
        """Sample ``func(x, v)`` on the mesh and normalize."""
        x, v = grid.mesh()
        f = np.asarray(func(x, v), dtype=float)
        return cls(grid, f / (f.sum() * grid.dx * grid.dv), time)

    @classmethod
    def maxwellian(cls, grid: PhaseSpaceGrid, temperature, params: PhysParams, density=None, velocity=None):
        """Local Maxwellian with the given temperature; ``density`` and
        ``velocity`` are optional callables of ``x`` (uniform and at rest by default)."""
        vt2 = params.boltzmann * temperature / params.mass
        return cls.from_function(grid, _local_gaussian(density, velocity, vt2))

    @classmethod
    def cold_beam(cls, grid: PhaseSpaceGrid, width: float, density=None, velocity=None):
        """``n(x)`` times a narrow Gaussian of standard deviation ``width`` around ``u(x)``."""
        return cls.from_function(grid, _local_gaussian(density, velocity, width**2))


def _local_gaussian(density, velocity, var):
    def func(x, v):
        n = np.ones_like(x) if density is None else density(x)
        u = np.zeros_like(x) if velocity is None else velocity(x)
        return n * np.exp(-((v - u) ** 2) / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)

    return func


# ---------------------------------------------------------------------------
# stepping

def _acceleration(n0, length, params, vext, n_total, policy, scheme):
    rho = params.mass * n_total * n0
    acc = quantum_acceleration_array(rho, length, params, policy.floor(rho), scheme)
    if vext is not None:
        acc = acc + vext.accel_array(params, scheme)
    return acc


def kinetic_acceleration(
    state: PhaseSpaceState,
    params: PhysParams,
    vext: ExternalPotential | None = None,
    n_total: float = 1.0,
    policy: VacuumPolicy = VacuumPolicy(),
    scheme=DiffScheme.SPECTRAL,
) -> np.ndarray:
    """Force per unit mass from the external and the Bohm potential.

    The Bohm part goes through the same routine the fluid solvers use.
    """
    scheme = DiffScheme.parse(scheme)
    length = state.grid.x_grid.length
    return _acceleration(state.spatial_density(), length, params, vext, n_total, policy, scheme)


def kinetic_dt_max(grid: PhaseSpaceGrid, max_accel: float, params: PhysParams | None = None) -> float:
    """Transport limits in x and v, plus the quantum-dispersion limit when hbar > 0.

    The Bohm force turns a density ripple of wavenumber k into a velocity
    kick growing like k^3, so the split step is only stable while the free
    branch hbar k^2 / 2m is resolved, as in the fluid solvers.
    """
    limits = [grid.dx / grid.v_max]
    if max_accel > 0:
        limits.append(grid.dv / max_accel)
    if params is not None and params.hbar > 0:
        limits.append(params.mass * grid.dx**2 / (np.pi * params.hbar))
    return float(min(limits))


def _shift_x(f, grid: PhaseSpaceGrid, dt):
    """f(x - v dt, v) for every velocity column."""
    n = grid.x_grid.n_points
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=grid.dx)
    spec = np.fft.rfft(f, axis=0)
    spec *= np.exp(-1j * np.outer(k, grid.v) * dt)
    return np.fft.irfft(spec, n=n, axis=0)


def _shift_v(f, grid: PhaseSpaceGrid, shift):
    """f(x, v - shift(x)) treating v as periodic; the cutoff check keeps the wrap harmless."""
    k = 2.0 * np.pi * np.fft.rfftfreq(grid.n_v, d=grid.dv)
    spec = np.fft.rfft(f, axis=1)
    spec *= np.exp(-1j * np.outer(shift, k))
    return np.fft.irfft(spec, n=grid.n_v, axis=1)


def _shift_x_spline(f, grid: PhaseSpaceGrid, dt):
    ix, iv = np.indices(f.shape, dtype=float)
    ix = ix - grid.v[None, :] * dt / grid.dx
    return ndimage.map_coordinates(f, [ix, iv], order=3, mode="grid-wrap")


def _shift_v_spline(f, grid: PhaseSpaceGrid, shift):
    ix, iv = np.indices(f.shape, dtype=float)
    iv = iv - shift[:, None] / grid.dv
    return ndimage.map_coordinates(f, [ix, iv], order=3, mode="constant", cval=0.0)


_SHIFTS = {
    "fourier": (_shift_x, _shift_v),
    "spline": (_shift_x_spline, _shift_v_spline),
}


def liouville_step(
    state: PhaseSpaceState,
    params: PhysParams,
    vext: ExternalPotential | None,
    n_total: float,
    dt: float,
    *,
    policy: VacuumPolicy = VacuumPolicy(),
    interpolation: str = "fourier",
    scheme=DiffScheme.SPECTRAL,
) -> PhaseSpaceState:
    """Advance the phase-space density by ``dt`` (Strang: x/2, v, x/2).

    ``interpolation="spline"`` swaps the Fourier shifts for cubic-spline
    semi-Lagrangian interpolation; it is not exactly mass conserving.
    """
    if interpolation not in _SHIFTS:
        raise ValueError(f"interpolation must be one of {sorted(_SHIFTS)}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    grid = state.grid
    shift_x, shift_v = _SHIFTS[interpolation]

    scheme = DiffScheme.parse(scheme)
    length = grid.x_grid.length
    acc0 = kinetic_acceleration(state, params, vext, n_total, policy, scheme)
    limit = kinetic_dt_max(grid, float(np.max(np.abs(acc0))), params)
    if dt > limit * (1 + 1e-12):
        raise CflViolation(f"dt={dt:.4g} exceeds transport limit {limit:.4g}")

    f = shift_x(state.f, grid, 0.5 * dt)
    # force rebuilt once from the half-streamed density
    acc = _acceleration(f.sum(axis=1) * grid.dv, length, params, vext, n_total, policy, scheme)
    f = shift_v(f, grid, acc * dt)
    f = shift_x(f, grid, 0.5 * dt)

    negative = f < 0
    clipped = -float(f[negative].sum()) * grid.dx * grid.dv
    f[negative] = 0.0
    out = PhaseSpaceState(grid, f, state.time + dt, state.clipped + clipped)

    breach = out.cutoff_mass()
    if breach > CUTOFF_TOLERANCE:
        raise CutoffBreach(
            f"mass {breach:.3e} beyond 0.9 v_max at t={out.time:.6g}; raise v_max"
        )
    return out


# ---------------------------------------------------------------------------
# moments

@dataclass(frozen=True)
class Moments:
    rho: ScalarField
    u: ScalarField
    p: ScalarField
    temp: ScalarField
    q: ScalarField


def moments(
    state: PhaseSpaceState,
    params: PhysParams,
    n_total: float,
    velocity_dims: int = 1,
    policy: VacuumPolicy = VacuumPolicy(),
) -> Moments:
    """Mass density, mean velocity, pressure, temperature and heat flux.

    ``p = c N m int dv^2 f`` with ``c = 1`` for one velocity dimension and
    ``c = 1/3`` under ``velocity_dims=3``; ``q = (1/2) N m int dv^3 f``.
    """
    if velocity_dims not in (1, 3):
        raise ValueError("velocity_dims must be 1 or 3")
    grid = state.grid
    xg = grid.x_grid
    v, dv = grid.v, grid.dv
    f = state.f
    n0 = f.sum(axis=1) * dv
    eps = policy.floor(n0)
    if np.any(n0 <= eps):
        raise DivisionNearVacuum("velocity-integrated density vanishes somewhere")
    u = (f @ v) * dv / n0
    dev = v[None, :] - u[:, None]
    scale = n_total * params.mass
    rho = scale * n0
    p = scale * (f * dev**2).sum(axis=1) * dv / velocity_dims
    q = 0.5 * scale * (f * dev**3).sum(axis=1) * dv
    temp = p * params.mass / (rho * params.boltzmann)
    return Moments(*(ScalarField(xg, a) for a in (rho, u, p, temp, q)))


@dataclass
class ResidualReport:
    """Max-norm residuals of the balance laws at the interior trajectory times."""

    times: np.ndarray
    continuity: np.ndarray
    momentum: np.ndarray
    heat: np.ndarray
    heat_form: str = "1d"
    details: dict = field(default_factory=dict)

    def max(self) -> dict:
        return {
            "continuity": float(np.max(self.continuity)),
            "momentum": float(np.max(self.momentum)),
            "heat": float(np.max(self.heat)),
        }


def moment_residuals(
    trajectory,
    params: PhysParams,
    n_total: float,
    vext: ExternalPotential | None = None,
    *,
    heat_form: str = "1d",
    velocity_dims: int = 1,
    policy: VacuumPolicy = VacuumPolicy(),
    scheme=DiffScheme.SPECTRAL,
) -> ResidualReport:
    """Residuals of the fluid equations evaluated on the moments of a trajectory.

    Time derivatives are centred differences between neighbouring states, so
    the trajectory needs at least three states (uniform spacing not required).

    * continuity: ``d_t rho + d_x(rho u)``
    * momentum: ``d_t u + u d_x u + d_x p / rho - a`` with ``a`` the external
      plus Bohm acceleration of the moment density
    * heat, ``heat_form="1d"``: ``(rho k / 2m)(d_t T + u d_x T + 2 T d_x u) + d_x q``,
      the exact balance for one velocity dimension;
      ``heat_form="paper"``: ``d_t T + d_x(T u) + (2m / 3 rho k) d_x q``.
    """
    if heat_form not in ("1d", "paper"):
        raise ValueError("heat_form must be '1d' or 'paper'")
    states = list(trajectory)
    if len(states) < 3:
        raise InsufficientTrajectory(f"need at least 3 states, got {len(states)}")
    scheme = DiffScheme.parse(scheme)
    xg = states[0].grid.x_grid
    length = xg.length
    mom = [moments(s, params, n_total, velocity_dims, policy) for s in states]
    t = np.array([s.time for s in states])
    ext = 0.0 if vext is None else vext.accel_array(params, scheme)

    def d(a):
        return gradient_array(a, length, scheme)

    cont, momentum, heat = [], [], []
    for i in range(1, len(states) - 1):
        h = t[i + 1] - t[i - 1]
        if not h > 0:
            raise InsufficientTrajectory("trajectory times must increase")
        prev, cur, nxt = mom[i - 1], mom[i], mom[i + 1]
        rho, u, p, temp, q = (a.values for a in (cur.rho, cur.u, cur.p, cur.temp, cur.q))
        dt_rho = (nxt.rho.values - prev.rho.values) / h
        dt_u = (nxt.u.values - prev.u.values) / h
        dt_temp = (nxt.temp.values - prev.temp.values) / h
        cont.append(np.max(np.abs(dt_rho + d(rho * u))))
        eps = policy.floor(rho)
        acc = ext + quantum_acceleration_array(rho, length, params, eps, scheme)
        momentum.append(np.max(np.abs(dt_u + u * d(u) + d(p) / rho - acc)))
        kappa, m = params.boltzmann, params.mass
        if heat_form == "1d":
            r = 0.5 * rho * kappa / m * (dt_temp + u * d(temp) + 2.0 * temp * d(u)) + d(q)
        else:
            r = dt_temp + d(temp * u) + 2.0 * m / (3.0 * rho * kappa) * d(q)
        heat.append(np.max(np.abs(r)))
    return ResidualReport(t[1:-1], np.array(cont), np.array(momentum), np.array(heat), heat_form)
