import numpy as np
import pytest

from dnls_continuum import kernel as ks
from dnls_continuum.lattice import LatticeField, PeriodicLattice

# criterion number -> (passed, seconds, note), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, secs, note = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'} ({secs:.1f} s) {note}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[ks.PurePower(0.75), ks.PurePower(1.0), ks.PurePower(1.5), ks.NearestNeighbor(), ks.Exponential(0.7)],
                ids=["pp075", "pp1", "pp15", "nn", "exp"])
def any_kernel(request):
    return ks.build_kernel(request.param)


@pytest.fixture
def small_lattice():
    return PeriodicLattice.from_length(8.0, 1.0 / 8.0)


def random_lattice_field(lat, rng, decay=0.0):
    k = lat.wavenumbers()
    amp = (1.0 + np.abs(k) / lat.h) ** (-decay)
    z = (rng.standard_normal(lat.n_sites) + 1j * rng.standard_normal(lat.n_sites)) * amp
    return LatticeField(lat, np.fft.ifft(z, norm="ortho"))
