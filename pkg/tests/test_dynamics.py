import math

import numpy as np
import pytest

from dnls_continuum import kernel as ks
from dnls_continuum.dynamics import (
    LIE,
    BlowUpError,
    EvolutionConfig,
    continuum_energy,
    default_dt,
    evolve_continuum,
    evolve_discrete,
    states_at,
    track_apriori,
)
from dnls_continuum.interpolation import ContinuumFunction
from dnls_continuum.lattice import LatticeField, PeriodicLattice, discrete_norm

PP075 = ks.build_kernel(ks.PurePower(0.75))


def gaussian_field(length=32.0, h=1 / 16, amp=1.0):
    lat = PeriodicLattice.from_length(length, h)
    return LatticeField(lat, amp * np.exp(-lat.positions() ** 2))


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(0.0, 1.0)
    with pytest.raises(ValueError):
        EvolutionConfig(0.1, 1.0, sign="attractive")
    with pytest.raises(ValueError):
        EvolutionConfig(0.1, 1.0, scheme="rk4")
    with pytest.raises(ValueError):
        EvolutionConfig(2.0, 1.0)
    with pytest.raises(ValueError):
        EvolutionConfig(1e-10, 1.0)
    with pytest.raises(ValueError):
        EvolutionConfig(0.1, 1.0, norm_sigmas=(1.5,))
    assert EvolutionConfig(0.01, 1.0).n_steps == 100


def test_linear_flow_of_plane_wave():
    lat = PeriodicLattice(1 / 16, 128)
    j = 5
    kj = 2 * np.pi * j / 128
    v = LatticeField(lat, np.exp(1j * kj * np.arange(128)))
    cfg = EvolutionConfig(0.01, 0.5, nonlinear=False)
    tr = evolve_discrete(v, PP075, cfg)
    lam = ks.omega(PP075, np.array([kj]))[0] / ks.beta(PP075, lat.h)
    assert np.max(np.abs(tr.final.values - v.values * np.exp(-1j * 0.5 * lam))) < 1e-12


@pytest.mark.parametrize("sign,g", [("defocusing", 1.0), ("focusing", -1.0)])
def test_nonlinear_flow_preserves_modulus(sign, g):
    v = gaussian_field(16.0, 1 / 8)
    tr = evolve_discrete(v, PP075, EvolutionConfig(0.05, 1.0, sign, linear=False))
    a = np.abs(v.values)
    assert np.allclose(np.abs(tr.final.values), a, atol=1e-14)
    assert np.allclose(tr.final.values, v.values * np.exp(-1j * g * a**2 * 1.0), atol=1e-12)


def test_mass_conservation_and_second_order_energy():
    v = gaussian_field()
    drifts = []
    for dt in (0.02, 0.01):
        tr = evolve_discrete(v, PP075, EvolutionConfig(dt, 1.0, record_every=10))
        assert tr.relative_mass_drift() <= 1e-12
        drifts.append(tr.energy_drift())
    assert 3.5 <= drifts[0] / drifts[1] <= 4.5


def test_lie_splitting_first_order():
    v = gaussian_field()
    drifts = [evolve_discrete(v, PP075, EvolutionConfig(dt, 1.0, scheme=LIE, record_every=10**6)).energy_drift() for dt in (2e-3, 1e-3)]
    assert 1.8 <= drifts[0] / drifts[1] <= 2.2


def test_backward_run_recovers_datum():
    v = gaussian_field(16.0, 1 / 8)
    cfg = EvolutionConfig(0.01, 0.5)
    fwd = evolve_discrete(v, PP075, cfg).final
    back = evolve_discrete(fwd, PP075, cfg, backward=True)
    assert np.max(np.abs(back.final.values - v.values)) < 1e-12
    assert back.times[-1] == pytest.approx(-0.5)


def test_free_schroedinger_gaussian():
    grid = PeriodicLattice.from_length(64.0, 1 / 16)
    v = ContinuumFunction.from_callable(lambda x: np.exp(-x**2), grid)
    t = 0.5
    tr = evolve_continuum(v, 1.0, 1.0, EvolutionConfig(0.05, t, nonlinear=False))
    x = grid.positions()
    exact = np.exp(-x**2 / (1 + 4j * t)) / np.sqrt(1 + 4j * t)
    err = math.sqrt(grid.h * np.sum(np.abs(tr.final.samples - exact) ** 2))
    assert err <= 1e-8
    assert tr.relative_mass_drift() <= 1e-12


@pytest.mark.parametrize("sign,g", [("defocusing", 1.0), ("focusing", -1.0)])
def test_continuum_plane_wave(sign, g):
    grid = PeriodicLattice.from_length(2 * np.pi * 4, 2 * np.pi * 4 / 256)
    kappa, A, alpha, c = 0.75, 0.6, 0.75, 1.7
    v = ContinuumFunction.from_callable(lambda x: A * np.exp(1j * kappa * x), grid)
    t = 0.8
    tr = evolve_continuum(v, alpha, c, EvolutionConfig(0.01, t, sign))
    expect = v.samples * np.exp(-1j * (c * kappa ** (2 * alpha) + g * A**2) * t)
    assert np.max(np.abs(tr.final.samples - expect)) < 1e-11


def test_continuum_validation():
    grid = PeriodicLattice.from_length(8.0, 1 / 8)
    v = ContinuumFunction.from_callable(lambda x: np.exp(-x**2), grid)
    with pytest.raises(ValueError):
        evolve_continuum(v, 0.5, 1.0, EvolutionConfig(0.1, 1.0))
    with pytest.raises(ValueError):
        evolve_continuum(v, 0.75, 0.0, EvolutionConfig(0.1, 1.0))
    assert continuum_energy(v.with_samples(np.zeros(grid.n_sites)), 0.75, 1.0, "focusing") == 0.0


def test_blowup_guard():
    v = gaussian_field(16.0, 1 / 8, amp=1.0)
    with pytest.raises(BlowUpError) as info:
        evolve_discrete(v, PP075, EvolutionConfig(0.05, 1.0, blowup_factor=1e-3))
    assert info.value.time > 0


def test_apriori_tracking():
    lat = PeriodicLattice.from_length(32.0, 1 / 16)
    zero = LatticeField(lat, np.zeros(lat.n_sites))
    rec = track_apriori(evolve_discrete(zero, PP075, EvolutionConfig(0.1, 1.0, norm_sigmas=(0.75,))), 0.75)
    assert rec.sup_norm == 0.0 and rec.bounded
    tr = evolve_discrete(gaussian_field(), PP075, EvolutionConfig(0.01, 1.0, norm_sigmas=(0.75,)))
    rec = track_apriori(tr, 0.75)
    assert rec.bounded and rec.sup_norm <= 10 * rec.initial_norm
    assert rec.initial_norm == pytest.approx(discrete_norm(gaussian_field(), "Hsigma", 0.75))
    with pytest.raises(KeyError):
        track_apriori(tr, 0.5)


def test_apriori_log_regime():
    pp1 = ks.build_kernel(ks.PurePower(1.0))
    tr = evolve_discrete(gaussian_field(), pp1, EvolutionConfig(0.01, 1.0, norm_sigmas=(1.0,)))
    assert track_apriori(tr, 1.0).bounded


def test_trajectory_recording_and_csv():
    tr = evolve_discrete(gaussian_field(16.0, 1 / 8), PP075, EvolutionConfig(0.01, 0.1, record_every=5, norm_sigmas=(0.5,)))
    assert np.allclose(tr.times, [0.0, 0.05, 0.1])
    csv = tr.to_csv().splitlines()
    assert csv[0] == "t,mass,energy,norm_sigma_0.5" and len(csv) == 4
    (mid,) = states_at(tr, [0.05])
    assert mid is tr.states[1]
    with pytest.raises(ValueError):
        states_at(tr, [0.07])
    lean = evolve_discrete(gaussian_field(16.0, 1 / 8), PP075, EvolutionConfig(0.01, 0.1, record_every=5, keep_states=False))
    assert len(lean.states) == 2 and len(lean.times) == 3


def test_default_dt():
    dt = default_dt(PP075, 1 / 16)
    assert 0 < dt <= 1e-3
