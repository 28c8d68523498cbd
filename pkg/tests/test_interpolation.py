import math

import numpy as np
import pytest
from scipy import integrate

from conftest import random_lattice_field
from dnls_continuum.interpolation import (
    INTERPOLATED,
    AliasingError,
    ContinuumFunction,
    continuum_from_bytes,
    continuum_from_csv,
    continuum_inner,
    continuum_norm,
    continuum_to_bytes,
    continuum_to_csv,
    discretize,
    interpolant_inner,
    interpolant_norm,
    p_linear,
    q_constant,
    tent_multiplier,
)
from dnls_continuum.lattice import LatticeField, PeriodicLattice, discrete_norm, forward_diff
from dnls_continuum.verification import random_band_limited

L = 16.0


@pytest.fixture
def grids():
    return PeriodicLattice.from_length(L, 1 / 4), PeriodicLattice.from_length(L, 1 / 64)


def test_discretize_constant(grids):
    lat, fine = grids
    f = ContinuumFunction.from_callable(lambda x: np.ones_like(x), fine)
    assert np.array_equal(discretize(f, lat).values, np.ones(lat.n_sites))
    assert np.allclose(discretize(f, lat, "spectral").values, 1.0, atol=1e-15)
    assert np.allclose(discretize(lambda x: np.ones_like(x), lat).values, 1.0, atol=1e-15)


def test_discretize_linear_function(grids):
    lat, fine = grids
    f = ContinuumFunction.from_callable(lambda x: x, fine)
    got = discretize(f, lat).values
    x = lat.positions()
    inner_sites = slice(0, lat.n_sites - 1)  # the last cell wraps to the far end
    assert np.allclose(got[inner_sites], x[inner_sites] + lat.h / 2, atol=1e-13)
    assert np.allclose(discretize(lambda t: t, lat).values, x + lat.h / 2, atol=1e-13)


def test_discretize_contracts_l2(grids):
    lat, fine = grids
    rng = np.random.default_rng(0)
    for _ in range(20):
        f = random_band_limited(fine, rng)
        for method in ("trapezoid", "spectral"):
            assert discrete_norm(discretize(f, lat, method), "L2") <= continuum_norm(f) * (1 + 1e-12)


def test_callable_discretization_matches_quadrature(grids):
    lat, _ = grids
    g = lambda x: np.exp(-(x - 0.3) ** 2) * np.cos(2 * x)
    got = discretize(g, lat).values
    m = 7
    a = lat.positions()[m]
    ref = integrate.quad(g, a, a + lat.h, epsabs=1e-15)[0] / lat.h
    assert got[m] == pytest.approx(ref, abs=1e-13)


def test_discretize_rejects_bad_grid():
    lat = PeriodicLattice.from_length(16.0, 1 / 4)
    other = PeriodicLattice.from_length(8.0, 1 / 64)
    f = ContinuumFunction.from_callable(np.cos, other)
    with pytest.raises(ValueError, match="period"):
        discretize(f, lat)
    with pytest.raises(ValueError):
        discretize(ContinuumFunction.from_callable(np.cos, PeriodicLattice.from_length(16.0, 1 / 64)), lat, "simpson")


def test_p_linear_reproduces_linear(grids):
    lat, fine = grids
    u = discretize(lambda x: x, lat)
    p = p_linear(u, fine).samples
    x = fine.positions()
    window = x < lat.positions()[-1]  # avoid the wrap cell
    assert np.allclose(p[window], x[window] + lat.h / 2, atol=1e-12)
    c = p_linear(LatticeField(lat, np.full(lat.n_sites, 3 + 1j)), fine)
    assert np.allclose(c.samples, 3 + 1j) and c.provenance == INTERPOLATED


def test_derivative_identity(grids, rng):
    lat, fine = grids
    u = random_lattice_field(lat, rng)
    p = p_linear(u, fine).samples
    fd = (np.roll(p, -1) - p) / fine.h
    assert np.allclose(fd, q_constant(forward_diff(u), fine).samples, atol=1e-10)


def test_q_constant_isometry(grids, rng):
    lat, fine = grids
    u = random_lattice_field(lat, rng)
    q = q_constant(u, fine)
    exact = math.sqrt(abs(continuum_inner(q, q)))
    assert exact == pytest.approx(discrete_norm(u, "L2"), rel=1e-13)
    single = np.zeros(lat.n_sites, complex)
    single[3] = 2 - 1j
    s = q_constant(LatticeField(lat, single), fine)
    assert np.count_nonzero(s.samples) == fine.n_sites // lat.n_sites
    assert math.sqrt(abs(continuum_inner(s, s))) == pytest.approx(math.sqrt(lat.h * 5), rel=1e-14)


def test_tent_multiplier_closed_forms():
    lat = PeriodicLattice(1 / 8, 64)
    k = np.abs(lat.wavenumbers())
    # mass matrix of hat functions: (2 + cos k)/3; stiffness adds 4 sin^2(k/2)/h^2
    assert np.allclose(tent_multiplier(lat, 0.0), (2 + np.cos(k)) / 3, rtol=1e-13)
    assert np.allclose(tent_multiplier(lat, 1.0), (2 + np.cos(k)) / 3 + 4 * np.sin(k / 2) ** 2 / lat.h**2, rtol=1e-12)


@pytest.mark.parametrize("sigma", [0.0, 0.5, 0.75, 1.0])
def test_interpolant_norm_matches_fine_grid(sigma, rng):
    lat = PeriodicLattice.from_length(4.0, 1 / 4)
    u = random_lattice_field(lat, rng, decay=1.0)
    approx = [continuum_norm(p_linear(u, PeriodicLattice.from_length(4.0, lat.h / r)), "Hsigma", sigma) for r in (256, 512)]
    exact = interpolant_norm(u, sigma)
    # fine-grid values converge to the exact one from below
    assert abs(approx[1] - exact) < abs(approx[0] - exact)
    assert approx[1] == pytest.approx(exact, rel=2e-3 if sigma >= 0.75 else 1e-4)


def test_interpolant_inner_exact(rng):
    lat = PeriodicLattice.from_length(4.0, 1 / 4)
    w, u = random_lattice_field(lat, rng), random_lattice_field(lat, rng)
    fine = PeriodicLattice.from_length(4.0, lat.h / 64)
    pw, pu = p_linear(w, fine).samples, p_linear(u, fine).samples
    # Simpson on every cell is exact for the quadratic integrand
    r = 64
    a, b = pw.reshape(-1, r), pu.reshape(-1, r)
    mid = r // 2
    aw, au = np.roll(a[:, 0], -1), np.roll(b[:, 0], -1)
    simpson = lat.h / 6 * np.sum(np.conj(a[:, 0]) * b[:, 0] + 4 * np.conj(a[:, mid]) * b[:, mid] + np.conj(aw) * au)
    assert interpolant_inner(w, u) == pytest.approx(simpson, rel=1e-13)


def test_continuum_norms(grids):
    _, fine = grids
    rng = np.random.default_rng(1)
    f = random_band_limited(fine, rng)
    assert continuum_norm(f, "Hsigma", 0.0) == pytest.approx(continuum_norm(f), rel=1e-15)
    rect = math.sqrt(fine.h * np.sum(np.abs(f.samples) ** 2))
    assert continuum_norm(f) == pytest.approx(rect, rel=1e-12)
    assert continuum_norm(f, "seminorm", 0.5) < continuum_norm(f, "Hsigma", 0.5)
    with pytest.raises(ValueError):
        continuum_norm(f, "H2", 0.5)


def test_gaussian_norm_matches_quadrature():
    grid = PeriodicLattice.from_length(40.0, 40.0 / 1024)
    g = ContinuumFunction.from_callable(lambda x: np.exp(-x**2), grid)
    ref = integrate.quad(lambda x: np.exp(-2 * x**2), -20, 20, epsabs=1e-15)[0]
    assert continuum_norm(g) ** 2 == pytest.approx(ref, rel=1e-12)
    # H^1 seminorm: int |2x e^{-x^2}|^2 dx = sqrt(pi/2)
    assert continuum_norm(g, "seminorm", 1.0) ** 2 == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)


def test_aliasing_guard():
    grid = PeriodicLattice.from_length(8.0, 1 / 4)
    rough = ContinuumFunction.from_callable(lambda x: np.exp(-x**2 / 0.001), grid)
    with pytest.raises(AliasingError):
        continuum_norm(rough)
    assert continuum_norm(rough, check_band=False) > 0


def test_continuum_serialization(grids, tmp_path):
    _, fine = grids
    g = random_band_limited(fine, np.random.default_rng(2))
    f = g.with_samples(g.samples, INTERPOLATED)
    for back in (continuum_from_bytes(continuum_to_bytes(f)), continuum_from_csv(continuum_to_csv(f))):
        assert back.fine_grid == fine and back.provenance == INTERPOLATED
        assert np.array_equal(back.samples, f.samples)
