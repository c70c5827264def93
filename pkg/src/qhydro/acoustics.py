"""Linear acoustics of a condensate, the Bogoliubov law and frequency measurement.

The measurement pipeline excites one Fourier mode per run, evolves it with one
of three engines and reads the frequency off the phase of that mode's Fourier
coefficient.  All requested modes run together as rows of a ``(modes, n)``
batch, so a whole curve costs little more than its slowest mode.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import constants
from scipy.signal import hilbert

from .errors import BlowUp, CflViolation, FitFailed
from .fields import DiffScheme, Grid1D, ScalarField, gradient_array, laplacian_array, spectral_multiplier
from .gp import madelung_compose, split_step_array
from .hydro import BLOWUP_LIMIT, FluidState, _gp_rates, clamp_density, max_stable_dt, rk4
from .quantum_potential import PhysParams, VacuumPolicy

__all__ = [
    "HELIUM4",
    "bogoliubov_omega",
    "sound_speed",
    "heisenberg_scale",
    "heisenberg_product",
    "AcousticState",
    "acoustic_rates",
    "acoustic_step",
    "acoustic_energy",
    "acoustic_dt_max",
    "DispersionSource",
    "DispersionEntry",
    "DispersionCurve",
    "measure_dispersion",
    "fit_frequency",
]

# helium-4 atom in SI units; only the ratio hbar/m matters here
HELIUM4 = PhysParams(hbar=constants.hbar, mass=4.002602 * constants.atomic_mass, boltzmann=constants.k)

LINEAR_REGIME = 0.05


def sound_speed(params: PhysParams) -> float:
    """c_s = sqrt(4 pi hbar^2 a rho0 / m^3); zero without interaction."""
    return params.sound_speed


def bogoliubov_omega(k, params: PhysParams):
    """omega(k) = sqrt(c_s^2 k^2 + hbar^2 k^4 / 4 m^2); accepts scalars or arrays."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("k must be non-negative")
    k2 = k * k
    w = np.sqrt(params.interaction * params.rho0 * k2 + (params.hbar / (2.0 * params.mass)) ** 2 * k2 * k2)
    return float(w) if w.ndim == 0 else w


def heisenberg_scale(u0: float, r0: float, params: PhysParams) -> float:
    """u0 r0 m / hbar; of order one when the quantum force competes with inertia."""
    if not (u0 > 0 and r0 > 0):
        raise ValueError("u0 and r0 must be positive")
    return u0 * r0 * params.mass / params.hbar


def heisenberg_product(params: PhysParams) -> float:
    """hbar / m: the velocity-length product u0 r0 at which the scale ratio is one."""
    return params.hbar / params.mass


# ---------------------------------------------------------------------------
# linear engine

@dataclass(frozen=True)
class AcousticState:
    rho1: ScalarField
    u1: ScalarField
    time: float = 0.0

    def __post_init__(self):
        if self.rho1.grid != self.u1.grid:
            raise ValueError("rho1 and u1 live on different grids")

    @property
    def grid(self) -> Grid1D:
        return self.rho1.grid

    def in_linear_regime(self, params: PhysParams) -> bool:
        return float(np.max(np.abs(self.rho1.values))) <= LINEAR_REGIME * params.rho0


def _third_derivative(values, length, scheme):
    if scheme is DiffScheme.SPECTRAL:
        n = values.shape[-1]
        mult = spectral_multiplier(n, length, 3)
        return np.fft.irfft(mult * np.fft.rfft(values, axis=-1), n=n, axis=-1)
    return gradient_array(laplacian_array(values, length, scheme), length, scheme)


def acoustic_rates(rho1, u1, length, params: PhysParams, scheme=DiffScheme.SPECTRAL):
    """Right-hand side of the linearized continuity and quantum Euler equations."""
    scheme = DiffScheme.parse(scheme)
    rho0 = params.rho0
    drho = -rho0 * gradient_array(u1, length, scheme)
    du = -(params.interaction * gradient_array(rho1, length, scheme))
    if params.hbar > 0:
        du = du + (params.hbar**2 / (4.0 * params.mass**2 * rho0)) * _third_derivative(rho1, length, scheme)
    return drho, du


def acoustic_dt_max(grid: Grid1D, params: PhysParams) -> float:
    return max_stable_dt(grid, params, 0.0, params.sound_speed)


def acoustic_step(
    state: AcousticState,
    params: PhysParams,
    dt: float,
    scheme=DiffScheme.SPECTRAL,
) -> AcousticState:
    """One RK4 step of the linear system."""
    grid = state.grid
    limit = acoustic_dt_max(grid, params)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > limit * (1 + 1e-12):
        raise CflViolation(f"dt={dt:.4g} exceeds stable limit {limit:.4g}")
    if not state.in_linear_regime(params):
        warnings.warn("density perturbation exceeds 5% of rho0; linear acoustics is a poor model here")
    rho1, u1, _ = rk4(
        lambda r, u, t: (*acoustic_rates(r, u, grid.length, params, scheme), None),
        state.rho1.values, state.u1.values, None, dt,
    )
    return AcousticState(ScalarField(grid, rho1), ScalarField(grid, u1), state.time + dt)


def acoustic_energy(state: AcousticState, params: PhysParams, scheme=DiffScheme.SPECTRAL) -> float:
    """Quadratic invariant of the linear system (kinetic + compression + quantum parts)."""
    rho0 = params.rho0
    r, u = state.rho1.values, state.u1.values
    dr = gradient_array(r, state.grid.length, scheme)
    dens = (
        0.5 * rho0 * u**2
        + 0.5 * params.interaction * r**2
        + params.hbar**2 * dr**2 / (8.0 * params.mass**2 * rho0)
    )
    return float(np.sum(dens) * state.grid.spacing)


# ---------------------------------------------------------------------------
# dispersion measurement

class DispersionSource(enum.Enum):
    LINEAR_ACOUSTIC = "linear_acoustic"
    NONLINEAR_HYDRO_GP = "nonlinear_hydro_gp"
    GP_ORACLE = "gp_oracle"

    @classmethod
    def parse(cls, value) -> "DispersionSource":
        if isinstance(value, cls):
            return value
        key = str(value).replace("-", "_").lower()
        aliases = {
            "linearacoustic": "linear_acoustic",
            "linear": "linear_acoustic",
            "nonlinearhydrogp": "nonlinear_hydro_gp",
            "hydro": "nonlinear_hydro_gp",
            "hydro_gp": "nonlinear_hydro_gp",
            "gporacle": "gp_oracle",
            "gp": "gp_oracle",
        }
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class DispersionEntry:
    k: float
    omega_measured: float
    omega_analytic: float
    rel_err: float


@dataclass
class DispersionCurve:
    entries: list = field(default_factory=list)
    source: str = ""

    @property
    def k(self) -> np.ndarray:
        return np.array([e.k for e in self.entries])

    @property
    def omega_measured(self) -> np.ndarray:
        return np.array([e.omega_measured for e in self.entries])

    @property
    def omega_analytic(self) -> np.ndarray:
        return np.array([e.omega_analytic for e in self.entries])

    @property
    def rel_err(self) -> np.ndarray:
        return np.array([e.rel_err for e in self.entries])

    def max_rel_err(self) -> float:
        return float(np.max(self.rel_err)) if self.entries else 0.0

    def agreement(self, other: "DispersionCurve") -> np.ndarray:
        """Mode-wise |omega_self - omega_other| / omega_analytic."""
        if not np.allclose(self.k, other.k):
            raise ValueError("curves sample different wavenumbers")
        return np.abs(self.omega_measured - other.omega_measured) / self.omega_analytic


def fit_frequency(times, coeffs, traveling=True, step_tol=0.5, trim=0.1) -> float:
    """Angular frequency from the phase of a complex mode-amplitude series.

    Traveling waves rotate the coefficient as ``exp(-i omega t)``; standing
    waves give a real cosine whose analytic signal rotates the other way.
    The unwrapped phase must move monotonically; a backward step larger than
    ``step_tol`` times the typical step means the mode is not clean.
    """
    t = np.asarray(times, dtype=float)
    c = np.asarray(coeffs, dtype=complex)
    if t.size < 8:
        raise FitFailed("need at least 8 samples to fit a frequency")
    if traveling:
        mag = np.abs(c)
        if np.min(mag) < 1e-3 * np.max(mag):
            raise FitFailed("mode amplitude passes through zero; not a traveling wave")
        phase = -np.unwrap(np.angle(c))
    else:
        signal = c.real - np.mean(c.real)
        phase = np.unwrap(np.angle(hilbert(signal)))
        cut = int(trim * t.size)
        t, phase = t[cut: t.size - cut], phase[cut: phase.size - cut]
    steps = np.diff(phase)
    typical = np.median(steps)
    if abs(typical) > np.pi / 2:
        raise FitFailed("phase advances more than pi/2 per sample; sample more often")
    if typical <= 0 or np.any(steps < -step_tol * abs(typical)):
        raise FitFailed("phase series is not monotonic; modes are mixing")
    return float(np.polyfit(t, phase, 1)[0])


def _initial_rows(grid, params, ks, omegas, amplitude, traveling):
    x = grid.x
    rho1 = amplitude * np.cos(np.outer(ks, x))
    if traveling:
        u1 = (omegas / (ks * params.rho0))[:, None] * rho1
    else:
        u1 = np.zeros_like(rho1)
    return rho1, u1


def _check_finite_bounded(arrays, t):
    for a in arrays:
        if not (np.all(np.isfinite(a)) and np.max(np.abs(a)) < BLOWUP_LIMIT):
            raise BlowUp(f"fields exceeded {BLOWUP_LIMIT:g} at t={t:.6g}")


def measure_dispersion(
    source,
    modes,
    amplitude: float = 1e-3,
    params: PhysParams = PhysParams(scatter_len=1.0 / (4.0 * np.pi)),
    t_end: float | None = None,
    dt: float | None = None,
    *,
    n_points: int = 256,
    length: float = 2.0 * np.pi,
    traveling: bool = True,
    periods: float = 5.0,
    samples_per_period: int = 40,
    scheme=DiffScheme.SPECTRAL,
    cfl_safety: float = 1.0,
    policy: VacuumPolicy = VacuumPolicy(),
) -> DispersionCurve:
    """Measure omega(k) for the modes ``k_j = 2 pi j / L`` with the chosen engine.

    ``amplitude`` is the absolute density amplitude of the excited mode.
    ``t_end`` defaults to ``periods`` periods of the slowest mode.  ``dt``
    defaults to ``cfl_safety`` times the stability limit for the RK4
    engines and to ``0.02 / omega_max`` for the split-step engine, whose
    error is set by accuracy rather than stability.
    """
    source = DispersionSource.parse(source)
    scheme = DiffScheme.parse(scheme)
    grid = Grid1D(n_points, length)
    js = np.asarray(sorted(set(int(j) for j in modes)))
    if js.size == 0 or js[0] < 1 or js[-1] >= n_points // 2:
        raise ValueError(f"modes must be integers in [1, {n_points // 2 - 1}]")
    if not amplitude > 0:
        raise ValueError("amplitude must be positive")
    if source is not DispersionSource.LINEAR_ACOUSTIC and amplitude > 0.01 * params.rho0:
        raise ValueError("nonlinear sources need amplitude <= 0.01 * rho0 to stay linear")
    ks = 2.0 * np.pi * js / length
    omegas = bogoliubov_omega(ks, params)
    if np.any(omegas <= 0):
        raise ValueError("the requested modes do not oscillate (hbar = 0 and a = 0)")
    slowest = 2.0 * np.pi / omegas.min()
    if t_end is None:
        t_end = periods * slowest
    elif t_end < periods * slowest * (1 - 1e-9):
        raise ValueError(f"t_end={t_end:g} covers fewer than {periods:g} periods of the slowest mode")

    rho1, u1 = _initial_rows(grid, params, ks, omegas, amplitude, traveling)
    rows = np.arange(js.size)
    advance_many = None

    if source is DispersionSource.LINEAR_ACOUSTIC:
        limit = cfl_safety * acoustic_dt_max(grid, params)

        if scheme is DiffScheme.SPECTRAL:
            # the spectral operator is diagonal: step the Fourier coefficients directly
            ik = spectral_multiplier(n_points, length, 1)
            ik3 = spectral_multiplier(n_points, length, 3)
            quantum = params.hbar**2 / (4.0 * params.mass**2 * params.rho0)
            a_ru = -params.rho0 * ik
            a_ur = -params.interaction * ik + quantum * ik3

            def rk4_matrix(h):
                # one RK4 step of a constant linear system is a fixed polynomial in h*A
                gen = np.zeros((a_ru.size, 2, 2), dtype=complex)
                gen[:, 0, 1] = h * a_ru
                gen[:, 1, 0] = h * a_ur
                out = np.broadcast_to(np.eye(2), gen.shape).copy()
                term = out.copy()
                for order in range(1, 5):
                    term = term @ gen / order
                    out = out + term
                return out

            powers = {}

            def advance_many(y, h, count):
                if (h, count) not in powers:
                    powers[h, count] = np.linalg.matrix_power(rk4_matrix(h), count)
                mat = powers[h, count]
                r = mat[:, 0, 0] * y[0] + mat[:, 0, 1] * y[1]
                u = mat[:, 1, 0] * y[0] + mat[:, 1, 1] * y[1]
                return r, u

            def density(y):
                return np.fft.irfft(y[0], n=n_points, axis=-1)

            y = (np.fft.rfft(rho1, axis=-1), np.fft.rfft(u1, axis=-1))
        else:
            def rates(a, b, c):
                return (*acoustic_rates(a, b, length, params, scheme), None)

            def density(y):
                return y[0]

            y = (rho1, u1)

            def advance(y, h):
                r, u, _ = rk4(rates, y[0], y[1], None, h)
                return r, u
    elif source is DispersionSource.NONLINEAR_HYDRO_GP:
        rho, u = params.rho0 + rho1, u1
        signal = np.sqrt(params.interaction * float(rho.max()))
        limit = cfl_safety * max_stable_dt(grid, params, float(np.abs(u).max()), signal)
        eps = policy.floor(rho)

        def advance(y, h):
            weight = policy.weight(y[0])
            r, v, _ = rk4(
                lambda a, b, c: (*_gp_rates(a, b, length, params, 0.0, eps, scheme, weight), None),
                y[0], y[1], None, h,
            )
            return clamp_density(r, tolerance=max(eps, 1e-12 * float(r.max()))), v

        def density(y):
            return y[0]

        y = (rho, u)
    else:
        n_total = params.rho0 * length / params.mass
        psi = np.empty((js.size, n_points), dtype=complex)
        for i in rows:
            state = FluidState(ScalarField(grid, params.rho0 + rho1[i]), ScalarField(grid, u1[i]))
            psi[i] = madelung_compose(state, params, n_total).psi.values
        # Strang splitting is unconditionally stable; resolve the fastest mode instead
        limit = 0.02 / omegas.max()

        def advance(y, h):
            return (split_step_array(y[0], length, params, 0.0, n_total, h),)

        def density(y):
            return params.mass * n_total * np.abs(y[0]) ** 2

        y = (psi,)

    if dt is None:
        dt = limit
    elif source is not DispersionSource.GP_ORACLE and dt > limit * (1 + 1e-12):
        raise CflViolation(f"dt={dt:.4g} exceeds stable limit {limit:.4g}")
    n_steps = int(np.ceil(t_end / dt - 1e-9))
    fastest = 2.0 * np.pi / omegas.max()
    sample_every = max(1, int(fastest / samples_per_period / dt))

    times, series = [], []

    def sample(y, t):
        times.append(t)
        series.append(np.fft.rfft(density(y), axis=-1)[rows, js])

    if advance_many is None:
        def advance_many(y, h, count):
            for _ in range(count):
                y = advance(y, h)
            return y

    sample(y, 0.0)
    done = 0
    while done < n_steps:
        count = min(sample_every, n_steps - done)
        y = advance_many(y, dt, count)
        done += count
        _check_finite_bounded(y, done * dt)
        sample(y, done * dt)
    series = np.array(series)

    entries = []
    for col, (k, w) in enumerate(zip(ks, omegas)):
        measured = fit_frequency(times, series[:, col], traveling)
        entries.append(DispersionEntry(float(k), measured, float(w), abs(measured - w) / w))
    return DispersionCurve(entries, source.value)
