"""Uniform periodic grids, real/complex fields and differential operators.

Every operator acts along the last axis of an array, so the time steppers can
push a batch of independent runs (shape ``(batch, n)``) through the same
kernels.  The public functions take and return :class:`ScalarField` objects;
the ``*_array`` variants are the raw kernels.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput

__all__ = [
    "DiffScheme",
    "Grid1D",
    "ScalarField",
    "ComplexField",
    "gradient",
    "laplacian",
    "biharmonic",
    "integrate",
    "gradient_array",
    "laplacian_array",
    "biharmonic_array",
    "antiderivative_array",
]


class DiffScheme(enum.Enum):
    SPECTRAL = "spectral"
    FD2 = "fd2"
    FD4 = "fd4"

    @classmethod
    def parse(cls, value: "DiffScheme | str") -> "DiffScheme":
        if isinstance(value, cls):
            return value
        aliases = {"centralfd2": "fd2", "centralfd4": "fd4"}
        key = str(value).lower()
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid with nodes at ``x_i = i * spacing``."""

    n_points: int
    length: float
    periodic: bool = True

    def __post_init__(self):
        n = self.n_points
        if int(n) != n or n < 8 or n % 2:
            raise ValueError(f"n_points must be an even integer >= 8, got {n}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError(f"length must be positive, got {self.length}")
        if not self.periodic:
            raise ValueError("only periodic grids are supported")
        object.__setattr__(self, "n_points", int(n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_points) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers of the ``rfft`` modes, ``2*pi*j/L``."""
        return _rfft_k(self.n_points, self.length)

    def mode_k(self, j: int) -> float:
        return 2.0 * np.pi * j / self.length

    def zeros(self) -> "ScalarField":
        return ScalarField(self, np.zeros(self.n_points))

    def constant(self, c: float) -> "ScalarField":
        return ScalarField(self, np.full(self.n_points, float(c)))

    def field(self, func) -> "ScalarField":
        """Sample ``func(x)`` on the nodes."""
        return ScalarField(self, np.broadcast_to(func(self.x), (self.n_points,)))


def _check_finite(values):
    if not np.all(np.isfinite(values)):
        raise NonFiniteInput("field contains NaN or Inf")


class _Field:
    _dtype = float

    def __init__(self, grid: Grid1D, values):
        values = np.array(values, dtype=self._dtype)
        if values.shape != (grid.n_points,):
            raise ValueError(
                f"values have shape {values.shape}, grid expects ({grid.n_points},)"
            )
        _check_finite(values)
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    def __len__(self):
        return self.grid.n_points

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __repr__(self):
        return f"{type(self).__name__}(n={self.grid.n_points}, L={self.grid.length:g})"


class ScalarField(_Field):
    """Real-valued field on a :class:`Grid1D`.  Values are read-only."""

    _dtype = float

    def __init__(self, grid: Grid1D, values):
        if np.iscomplexobj(values):
            raise TypeError("ScalarField takes real values; use ComplexField")
        super().__init__(grid, values)

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.grid, values)


class ComplexField(_Field):
    """Complex-valued field on a :class:`Grid1D`.  Values are read-only."""

    _dtype = complex

    def with_values(self, values) -> "ComplexField":
        return ComplexField(self.grid, values)


# ---------------------------------------------------------------------------
# raw kernels (last axis)

@functools.lru_cache(maxsize=64)
def _rfft_k(n: int, length: float) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)
    k.setflags(write=False)
    return k


@functools.lru_cache(maxsize=64)
def _fft_k(n: int, length: float) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)
    k.setflags(write=False)
    return k


@functools.lru_cache(maxsize=64)
def spectral_multiplier(n: int, length: float, order: int) -> np.ndarray:
    k = _rfft_k(n, length)
    mult = (1j * k) ** order
    if order % 2:
        # the Nyquist mode has no real odd derivative
        mult = mult.copy()
        mult[-1] = 0.0
    mult.setflags(write=False)
    return mult


def _spectral(values, length, order):
    n = values.shape[-1]
    if np.iscomplexobj(values):
        k = _fft_k(n, length)
        mult = (1j * k) ** order
        if order % 2:
            mult = mult.copy()
            mult[n // 2] = 0.0
        return np.fft.ifft(mult * np.fft.fft(values, axis=-1), axis=-1)
    mult = spectral_multiplier(n, length, order)
    return np.fft.irfft(mult * np.fft.rfft(values, axis=-1), n=n, axis=-1)


def _roll(values, shift):
    return np.roll(values, shift, axis=-1)


def gradient_array(values, length, scheme=DiffScheme.SPECTRAL):
    scheme = DiffScheme.parse(scheme)
    n = values.shape[-1]
    dx = length / n
    if scheme is DiffScheme.SPECTRAL:
        return _spectral(values, length, 1)
    if scheme is DiffScheme.FD2:
        return (_roll(values, -1) - _roll(values, 1)) / (2.0 * dx)
    # grouped as differences so constants give exact zeros
    d1 = _roll(values, -1) - _roll(values, 1)
    d2 = _roll(values, -2) - _roll(values, 2)
    return (8.0 * d1 - d2) / (12.0 * dx)


def laplacian_array(values, length, scheme=DiffScheme.SPECTRAL):
    scheme = DiffScheme.parse(scheme)
    n = values.shape[-1]
    dx = length / n
    if scheme is DiffScheme.SPECTRAL:
        return _spectral(values, length, 2)
    if scheme is DiffScheme.FD2:
        return ((_roll(values, -1) - values) + (_roll(values, 1) - values)) / dx**2
    s1 = (_roll(values, -1) - values) + (_roll(values, 1) - values)
    s2 = (_roll(values, -2) - values) + (_roll(values, 2) - values)
    return (16.0 * s1 - s2) / (12.0 * dx**2)


def biharmonic_array(values, length, scheme=DiffScheme.SPECTRAL):
    scheme = DiffScheme.parse(scheme)
    if scheme is DiffScheme.SPECTRAL:
        return _spectral(values, length, 4)
    return laplacian_array(laplacian_array(values, length, scheme), length, scheme)


def antiderivative_array(values, length):
    """Zero-mean periodic antiderivative of the zero-mean part of ``values``."""
    n = values.shape[-1]
    k = _rfft_k(n, length)
    spec = np.fft.rfft(values, axis=-1)
    out = np.zeros_like(spec)
    out[..., 1:] = spec[..., 1:] / (1j * k[1:])
    out[..., -1] = 0.0
    return np.fft.irfft(out, n=n, axis=-1)


# ---------------------------------------------------------------------------
# field-level operators

def gradient(f: ScalarField, scheme=DiffScheme.SPECTRAL) -> ScalarField:
    """First derivative ``df/dx`` with periodic wrap."""
    _check_finite(f.values)
    return f.with_values(gradient_array(f.values, f.grid.length, scheme))


def laplacian(f: ScalarField, scheme=DiffScheme.SPECTRAL) -> ScalarField:
    _check_finite(f.values)
    return f.with_values(laplacian_array(f.values, f.grid.length, scheme))


def biharmonic(f: ScalarField, scheme=DiffScheme.SPECTRAL) -> ScalarField:
    _check_finite(f.values)
    return f.with_values(biharmonic_array(f.values, f.grid.length, scheme))


def integrate(f: ScalarField) -> float:
    """Rectangle rule ``sum(f) * dx``; exact for resolved trigonometric polynomials."""
    _check_finite(f.values)
    return float(np.sum(f.values) * f.grid.spacing)
