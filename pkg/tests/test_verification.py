import math

import numpy as np
import pytest

from dnls_continuum import kernel as ks
from dnls_continuum.interpolation import ContinuumFunction
from dnls_continuum.lattice import LatticeField, PeriodicLattice
from dnls_continuum.verification import (
    CheckReport,
    Inequality,
    check_integration_by_parts,
    check_lattice_identities,
    check_multiplier_equivalence,
    check_operator_limit,
    check_symbol_asymptotics,
    check_uniform_inequalities,
    default_test_function,
    field_family,
    fitted_slope,
    integration_by_parts_gap,
    lattice_inequalities,
    ladder_spread,
    operator_limit_errors,
    predicted_lower_constant,
    richardson,
    strictly_decreasing,
)

NN = ks.build_kernel(ks.NearestNeighbor())
PP075 = ks.build_kernel(ks.PurePower(0.75))


def test_helpers():
    h = [0.1, 0.05, 0.025]
    assert fitted_slope(h, [3 * x**2 for x in h]) == pytest.approx(2.0)
    assert strictly_decreasing([3, 2, 1]) and not strictly_decreasing([3, 3, 1])
    assert ladder_spread([1.0, 2.0, 3.0]) == pytest.approx(1.5)
    # c + b h^2 eliminated exactly
    vals = [1 + 5 * x**2 for x in h]
    assert richardson(vals, 4.0) == pytest.approx(1.0)
    r = CheckReport("x", [], [], "fail", 0.1, "K", "why")
    assert not r.passed and r.summary() == "FAIL [K] x: why"


@pytest.mark.parametrize("spec,target", [(ks.NearestNeighbor(), 1.0), (ks.PurePower(1.5), math.pi**2 / 6),
                                         (ks.PurePower(0.75), 2 * math.pi / (3 * math.gamma(1.5) * math.sin(0.75 * math.pi)))])
def test_symbol_asymptotics(spec, target):
    rep = check_symbol_asymptotics(ks.build_kernel(spec))
    assert rep.passed
    assert rep.extra["extrapolated"] == pytest.approx(target, rel=1e-6)


def test_multiplier_equivalence_at_zero_is_one():
    rep = check_multiplier_equivalence(NN, k_grid=np.array([0.0]))
    assert np.all(np.array(rep.extra["min"]) == 1.0) and np.all(np.array(rep.extra["max"]) == 1.0)


def test_multiplier_equivalence_constants():
    rep = check_multiplier_equivalence(PP075)
    assert rep.passed
    assert min(rep.extra["min"]) >= 0.9 * predicted_lower_constant(PP075)
    nn = check_multiplier_equivalence(NN)
    # 1 + 4 sin^2(k/2)/h^2 against 1 + k^2/h^2: lower constant 4/pi^2 at k = pi, upper 1 at k = 0
    assert min(nn.extra["min"]) == pytest.approx(4 / np.pi**2, rel=2e-3)
    assert max(nn.extra["max"]) == pytest.approx(1.0)


def test_operator_limit_zero_function():
    phi = default_test_function()
    zero = phi.with_samples(np.zeros(phi.fine_grid.n_sites))
    rep = check_operator_limit(NN, zero)
    assert rep.passed and all(e == 0.0 for e in rep.measured)


def test_operator_limit_nearest_neighbor_second_order():
    errs, consts = operator_limit_errors(NN, default_test_function(), [2.0**-j for j in range(3, 8)])
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(np.abs(ratios - 4.0) < 0.2)
    assert consts[-1] == pytest.approx(1.0, abs=1e-3)


def test_operator_limit_power_decreasing():
    rep = check_operator_limit(PP075, h_ladder=[2.0**-j for j in range(3, 8)])
    assert strictly_decreasing(rep.measured)


def test_integration_by_parts_special_pairs(rng):
    lat = PeriodicLattice(1 / 16, 64)
    u = LatticeField(lat, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    assert integration_by_parts_gap(u, u, PP075) <= 1e-13
    zero = LatticeField(lat, np.zeros(64))
    assert integration_by_parts_gap(zero, u, PP075) == 0.0
    rep = check_integration_by_parts(PP075, pairs=[(u, u), (zero, u)])
    assert rep.passed
    # exact cell integration and a fine quadrature agree
    w = LatticeField(lat, rng.standard_normal(64))
    assert integration_by_parts_gap(w, u, NN, fine_refinement=8) <= 1e-12


def test_lattice_identities(any_kernel):
    assert check_lattice_identities(any_kernel).passed


def test_gn_diagonal_and_constant_field():
    ineqs = {q.name: q for q in lattice_inequalities(0.75, 0.75)}
    lat = PeriodicLattice.from_length(8.0, 1 / 16)
    const = LatticeField(lat, np.full(lat.n_sites, 2.0))
    for q in ineqs.values():
        r = q.ratio(const)
        assert math.isfinite(r) and r > 0
    # sigma0 = sigma: the Gagliardo-Nirenberg ratio is L4 / H^sigma
    gn = ineqs["gagliardo_nirenberg_0.75_0.75"].ratio(const)
    assert gn == pytest.approx((8.0 * 16) ** 0.25 / math.sqrt(8.0 * 4), rel=1e-12)


def test_uniform_inequality_detects_unbounded_ratio():
    # ||D+ u|| / ||u|| grows like 1/h: must be flagged
    blowing = Inequality("grad_over_l2", lambda u: float(np.linalg.norm(np.diff(u.values))) / u.lattice.h / float(np.linalg.norm(u.values)))
    reps = check_uniform_inequalities([blowing], h_ladder=[2.0**-j for j in range(4, 9)], n_fields=5)
    assert not reps[0].passed


def test_field_family_deterministic():
    lat = PeriodicLattice.from_length(8.0, 1 / 16)
    a = [f.values for f in field_family(lat, 3, seed=4)]
    b = [f.values for f in field_family(lat, 3, seed=4)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
