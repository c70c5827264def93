import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhydro import DiffScheme, Grid1D, ScalarField, biharmonic, gradient, integrate, laplacian
from qhydro.errors import NonFiniteInput

SCHEMES = list(DiffScheme)


def test_grid_invariants():
    g = Grid1D(16, 3.0)
    assert g.spacing == 3.0 / 16
    assert np.allclose(g.x, np.arange(16) * 3.0 / 16)
    for bad in (7, 9, 0):
        with pytest.raises(ValueError):
            Grid1D(bad, 1.0)
    with pytest.raises(ValueError):
        Grid1D(16, -1.0)


def test_scheme_parse_aliases():
    assert DiffScheme.parse("spectral") is DiffScheme.SPECTRAL
    assert DiffScheme.parse(DiffScheme.FD4) is DiffScheme.FD4
    with pytest.raises(ValueError):
        DiffScheme.parse("upwind")


def test_field_rejects_bad_values(ring):
    with pytest.raises(NonFiniteInput):
        ScalarField(ring, np.full(ring.n_points, np.nan))
    with pytest.raises(ValueError):
        ScalarField(ring, np.zeros(ring.n_points + 1))


@pytest.mark.parametrize("scheme", SCHEMES)
def test_constant_has_zero_derivatives(ring, scheme):
    f = ring.constant(3.7)
    assert np.all(gradient(f, scheme).values == 0.0)
    assert np.all(laplacian(f, scheme).values == 0.0)
    assert np.all(biharmonic(f, scheme).values == 0.0)


def test_spectral_exact_on_single_mode():
    L = 5.0
    g = Grid1D(64, L)
    k = 2 * np.pi / L
    f = g.field(lambda x: np.sin(k * x))
    assert np.max(np.abs(gradient(f).values - k * np.cos(k * g.x))) < 1e-12 * k
    assert np.max(np.abs(laplacian(f).values + k**2 * np.sin(k * g.x))) < 1e-12 * k**2
    # round-off in the unused modes is amplified by up to k_max^4
    k_max = np.pi * 64 / L
    assert np.max(np.abs(biharmonic(f).values - k**4 * np.sin(k * g.x))) < 64 * np.finfo(float).eps * k_max**4


def test_fd2_matches_its_symbol():
    # the centred difference of sin(kx) is k cos(kx) times sin(k dx)/(k dx)
    L = 2.0
    g = Grid1D(64, L)
    k = 2 * np.pi / L
    f = g.field(lambda x: np.sin(k * x))
    symbol = np.sin(k * g.spacing) / (k * g.spacing)
    expected = k * np.cos(k * g.x) * symbol
    assert np.max(np.abs(gradient(f, DiffScheme.FD2).values - expected)) < 1e-12
    lap_symbol = (2 - 2 * np.cos(k * g.spacing)) / g.spacing**2
    assert np.max(np.abs(laplacian(f, DiffScheme.FD2).values + lap_symbol * f.values)) < 1e-10


def _gauss_lap_error(n, scheme):
    L, s = 20.0, 1.0
    g = Grid1D(n, L)
    d = g.x - L / 2
    f = g.field(lambda x: np.exp(-((x - L / 2) ** 2) / (2 * s**2)))
    exact = (d**2 / s**4 - 1 / s**2) * f.values
    return np.max(np.abs(laplacian(f, scheme).values - exact))


def test_gaussian_fd4_converges_to_spectral():
    # spectral is exact to round-off here; FD4 error must fall at fourth order
    assert _gauss_lap_error(128, DiffScheme.SPECTRAL) < 1e-10
    e1, e2 = _gauss_lap_error(128, DiffScheme.FD4), _gauss_lap_error(256, DiffScheme.FD4)
    order = np.log2(e1 / e2)
    assert abs(order - 4) < 0.4
    assert e2 < 1e-5


@pytest.mark.parametrize("scheme,nominal", [(DiffScheme.FD2, 2), (DiffScheme.FD4, 4)])
def test_fd_refinement_order(scheme, nominal):
    errs = []
    for n in (32, 64):
        g = Grid1D(n, 2 * np.pi)
        f = g.field(lambda x: np.exp(np.sin(x)))
        exact = np.cos(g.x) * np.exp(np.sin(g.x))
        errs.append(np.max(np.abs(gradient(f, scheme).values - exact)))
    assert abs(np.log2(errs[0] / errs[1]) - nominal) <= 0.1 * nominal


def test_integrate_examples():
    g = Grid1D(64, 3.0)
    assert integrate(g.constant(2.5)) == pytest.approx(7.5, rel=1e-15)
    assert abs(integrate(g.field(lambda x: np.sin(2 * np.pi * x / 3.0)))) < 1e-12
    L, s = 40.0, 1.5
    g = Grid1D(256, L)
    f = g.field(lambda x: np.exp(-((x - L / 2) ** 2) / (2 * s**2)) / np.sqrt(2 * np.pi * s**2))
    assert abs(integrate(f) - 1.0) < 1e-8


smooth_coeffs = st.lists(st.floats(-1, 1), min_size=6, max_size=6)


def _smooth(g, c):
    x = g.x
    return g.field(lambda x: sum(a * np.cos((j + 1) * x + j) for j, a in enumerate(c)) + 2.0)


@settings(max_examples=40, deadline=None)
@given(smooth_coeffs, st.sampled_from(SCHEMES))
def test_integral_of_gradient_vanishes(c, scheme):
    g = Grid1D(64, 2 * np.pi)
    f = _smooth(g, c)
    norm = np.max(np.abs(f.values))
    assert abs(integrate(gradient(f, scheme))) <= 1e-12 * norm


@settings(max_examples=40, deadline=None)
@given(smooth_coeffs)
def test_biharmonic_is_laplacian_twice(c):
    g = Grid1D(64, 2 * np.pi)
    f = _smooth(g, c)
    twice = laplacian(laplacian(f))
    bi = biharmonic(f)
    assert np.max(np.abs(twice.values - bi.values)) <= 1e-10 * max(np.max(np.abs(bi.values)), 1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 31), st.floats(0.5, 50.0))
def test_spectral_exact_for_any_resolved_mode(j, L):
    g = Grid1D(64, L)
    k = 2 * np.pi * j / L
    f = g.field(lambda x: np.cos(k * x))
    err = np.max(np.abs(gradient(f).values + k * np.sin(k * g.x)))
    assert err <= 1e-12 * k * 64
