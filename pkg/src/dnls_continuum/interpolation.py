"""Cell-average discretization, the interpolants p_h and q_h, and continuum norms.

Continuum functions live on a fine periodic grid sharing period and origin with
the lattices they are compared against.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .lattice import LatticeField, PeriodicLattice, forward_diff

CLOSED_FORM = "closed_form"
INTERPOLATED = "interpolated"
EVOLVED = "evolved"
PROVENANCES = (CLOSED_FORM, INTERPOLATED, EVOLVED)

__all__ = [
    "AliasingError",
    "ContinuumFunction",
    "continuum_inner",
    "continuum_norm",
    "continuum_wavenumbers",
    "discretize",
    "forward_diff",
    "interpolant_inner",
    "interpolant_norm",
    "p_linear",
    "q_constant",
]


class AliasingError(ValueError):
    """Raised when a sampled function is not resolved by its grid."""


@dataclass(frozen=True, eq=False)
class ContinuumFunction:
    fine_grid: PeriodicLattice
    samples: np.ndarray
    provenance: str = CLOSED_FORM

    def __post_init__(self):
        arr = np.array(self.samples, dtype=complex).reshape(-1)
        if arr.size != self.fine_grid.n_sites:
            raise ValueError(f"expected {self.fine_grid.n_sites} samples, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_callable(cls, func: Callable, fine_grid: PeriodicLattice) -> "ContinuumFunction":
        return cls(fine_grid, func(fine_grid.positions()), CLOSED_FORM)

    def with_samples(self, samples, provenance: str | None = None) -> "ContinuumFunction":
        return ContinuumFunction(self.fine_grid, samples, provenance or self.provenance)

    def __sub__(self, other: "ContinuumFunction") -> "ContinuumFunction":
        _same_grid(self.fine_grid, other.fine_grid)
        return self.with_samples(self.samples - other.samples, EVOLVED if EVOLVED in (self.provenance, other.provenance) else self.provenance)


def _same_grid(a: PeriodicLattice, b: PeriodicLattice) -> None:
    if a.n_sites != b.n_sites or not math.isclose(a.h, b.h, rel_tol=1e-12):
        raise ValueError("functions live on different fine grids")


def continuum_wavenumbers(grid: PeriodicLattice) -> np.ndarray:
    """kappa_j = 2 pi j / L, FFT order."""
    return 2.0 * np.pi * np.fft.fftfreq(grid.n_sites, d=grid.h)


# ---------------------------------------------------------------------------
# discretization
# ---------------------------------------------------------------------------


def discretize(f, lattice: PeriodicLattice, method: str = "trapezoid", tol: float = 1e-12) -> LatticeField:
    """Cell averages f_h(x_m) = h^-1 int_{x_m}^{x_{m+1}} f dx.

    ``f`` is a ContinuumFunction (trapezoid rule on its fine grid, or the exact
    average of its trigonometric interpolant with ``method='spectral'``) or a
    vectorized callable, integrated adaptively to ``tol``.
    """
    if callable(f) and not isinstance(f, ContinuumFunction):
        return _discretize_callable(f, lattice, tol)
    r = lattice.refinement(f.fine_grid)
    vals = f.samples
    if method == "trapezoid":
        cells = vals.reshape(lattice.n_sites, r)
        left = cells[:, 0]
        avg = (cells.sum(axis=1) - 0.5 * left + 0.5 * np.roll(left, -1)) / r
    elif method == "spectral":
        kh = continuum_wavenumbers(f.fine_grid) * lattice.h
        mult = np.ones_like(kh, dtype=complex)
        nz = kh != 0
        mult[nz] = np.expm1(1j * kh[nz]) / (1j * kh[nz])
        avg = np.fft.ifft(np.fft.fft(vals) * mult)[::r]
    else:
        raise ValueError(f"unknown discretization method {method!r}")
    return LatticeField(lattice, avg)


def _discretize_callable(func: Callable, lattice: PeriodicLattice, tol: float) -> LatticeField:
    x = lattice.positions()
    h = lattice.h
    scale = max(1.0, float(np.max(np.abs(func(x)))))
    val, _ = integrate.quad_vec(
        lambda t: np.asarray(func(x + t * h), dtype=complex), 0.0, 1.0, epsabs=tol * scale, epsrel=tol
    )
    return LatticeField(lattice, val)


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------


def p_linear(field: LatticeField, fine_grid: PeriodicLattice) -> ContinuumFunction:
    """(p_h u)(x) = u(x_m) + (D+ u)(x_m)(x - x_m) on [x_m, x_{m+1})."""
    r = field.lattice.refinement(fine_grid)
    u = field.values
    t = np.arange(r) / r
    samples = u[:, None] + (np.roll(u, -1) - u)[:, None] * t[None, :]
    return ContinuumFunction(fine_grid, samples.reshape(-1), INTERPOLATED)


def q_constant(field: LatticeField, fine_grid: PeriodicLattice) -> ContinuumFunction:
    """Staircase: (q_h u)(x) = u(x_m) on [x_m, x_{m+1})."""
    r = field.lattice.refinement(fine_grid)
    return ContinuumFunction(fine_grid, np.repeat(field.values, r), INTERPOLATED)


# ---------------------------------------------------------------------------
# norms and pairings
# ---------------------------------------------------------------------------


def check_band_limited(f: ContinuumFunction, rel: float = 1e-10) -> None:
    """Top decade of the spectrum must sit below ``rel`` times its peak."""
    power = np.abs(np.fft.fft(f.samples))
    peak = power.max()
    if peak == 0.0:
        return
    kappa = np.abs(continuum_wavenumbers(f.fine_grid))
    top = power[kappa >= 0.9 * kappa.max()].max()
    if top > rel * peak:
        raise AliasingError(f"spectrum not resolved: top-decade ratio {top / peak:.3e} > {rel:.0e}")


def _spectral_power(f: ContinuumFunction) -> np.ndarray:
    # |f_hat|^2 normalized so that h_ref * sum equals the L^2 integral
    return np.abs(np.fft.fft(f.samples, norm="ortho")) ** 2


def continuum_norm(
    f: ContinuumFunction,
    kind: str = "L2",
    sigma: float = 0.0,
    check_band: bool | None = None,
) -> float:
    """Spectral L2, H^sigma or homogeneous fractional seminorm on the fine grid.

    The aliasing guard runs by default for closed-form and evolved data; piecewise
    interpolants are not band-limited and skip it unless asked.
    """
    if check_band is None:
        check_band = f.provenance != INTERPOLATED
    if check_band:
        check_band_limited(f)
    hr = f.fine_grid.h
    power = _spectral_power(f)
    if kind == "L2" or (kind == "Hsigma" and sigma == 0):
        w = 1.0
    else:
        if not 0.0 <= sigma <= 1.0:
            raise ValueError(f"sigma must lie in [0, 1], got {sigma}")
        ak = np.abs(continuum_wavenumbers(f.fine_grid)) ** (2.0 * sigma)
        if kind == "Hsigma":
            w = 1.0 + ak
        elif kind == "seminorm":
            w = ak
        else:
            raise ValueError(f"unknown continuum norm kind {kind!r}")
    return math.sqrt(hr * float(np.sum(w * power)))


def continuum_inner(f: ContinuumFunction, g: ContinuumFunction) -> complex:
    """<f, g> = int conj(f) g, rectangle rule on the common fine grid."""
    _same_grid(f.fine_grid, g.fine_grid)
    return complex(f.fine_grid.h * np.vdot(f.samples, g.samples))


# ---------------------------------------------------------------------------
# exact quantities for piecewise-linear interpolants (no fine grid needed)
# ---------------------------------------------------------------------------


def interpolant_inner(w: LatticeField, u: LatticeField) -> complex:
    """<p_h w, p_h u> integrated exactly cell by cell."""
    h = w.lattice.h
    a, c = w.values, u.values
    b, d = forward_diff(w).values, forward_diff(u).values
    total = (
        h * np.vdot(a, c)
        + 0.5 * h**2 * (np.vdot(b, c) + np.vdot(a, d))
        + h**3 / 3.0 * np.vdot(b, d)
    )
    return complex(total)


def tent_multiplier(lattice: PeriodicLattice, sigma: float) -> np.ndarray:
    """S(k_j) with ||p_h u||_{H^sigma}^2 = h sum_j S(k_j) |u_hat(k_j)|^2, exactly.

    The tent function has transform h sinc^2(kappa h / 2); summing the weighted
    aliases k + 2 pi l in closed form gives Hurwitz zeta values.
    """
    if not 0.0 <= sigma <= 1.0:
        raise ValueError(f"sigma must lie in [0, 1], got {sigma}")
    h = lattice.h
    k = np.abs(lattice.wavenumbers())
    x = k / (2.0 * np.pi)
    half = 0.5 * k
    sinc4 = np.ones_like(k)
    nz = k > 0
    sinc4[nz] = (np.sin(half[nz]) / half[nz]) ** 4
    s4 = 16.0 * np.sin(half) ** 4

    def alias_sum(q):
        return (2.0 * np.pi) ** (-q) * (special.zeta(q, 1.0 + x) + special.zeta(q, 1.0 - x))

    if sigma == 0:
        return sinc4 + s4 * alias_sum(4.0)
    scale = h ** (-2.0 * sigma)
    main = (1.0 + scale * k ** (2.0 * sigma)) * sinc4
    return main + s4 * (alias_sum(4.0) + scale * alias_sum(4.0 - 2.0 * sigma))


def interpolant_norm(field: LatticeField, sigma: float = 0.0) -> float:
    """Exact continuum H^sigma norm of p_h u over one period."""
    power = np.abs(np.fft.fft(field.values, norm="ortho")) ** 2
    return math.sqrt(field.lattice.h * float(np.sum(tent_multiplier(field.lattice, sigma) * power)))


# ---------------------------------------------------------------------------
# serialization: lattice-field layout plus a provenance tag
# ---------------------------------------------------------------------------

_CHEADER = struct.Struct("<qddq")


def continuum_to_bytes(f: ContinuumFunction) -> bytes:
    g = f.fine_grid
    body = np.empty(2 * g.n_sites, dtype="<f8")
    body[0::2] = f.samples.real
    body[1::2] = f.samples.imag
    return _CHEADER.pack(g.n_sites, g.h, g.origin, PROVENANCES.index(f.provenance)) + body.tobytes()


def continuum_from_bytes(blob: bytes) -> ContinuumFunction:
    n, h, origin, tag = _CHEADER.unpack_from(blob)
    body = np.frombuffer(blob, dtype="<f8", offset=_CHEADER.size)
    if body.size != 2 * n:
        raise ValueError(f"truncated record: expected {2 * n} floats, got {body.size}")
    return ContinuumFunction(PeriodicLattice(h, n, origin), body[0::2] + 1j * body[1::2], PROVENANCES[tag])


def continuum_to_csv(f: ContinuumFunction) -> str:
    g = f.fine_grid
    parts = [f.provenance, str(g.n_sites), repr(g.h), repr(g.origin)]
    for z in f.samples:
        parts += [repr(float(z.real)), repr(float(z.imag))]
    return ",".join(parts) + "\n"


def continuum_from_csv(text: str) -> ContinuumFunction:
    parts = text.strip().split(",")
    prov, n = parts[0], int(parts[1])
    h, origin = float(parts[2]), float(parts[3])
    nums = np.array([float(x) for x in parts[4:]])
    if nums.size != 2 * n:
        raise ValueError(f"record has {nums.size} numbers, expected {2 * n}")
    return ContinuumFunction(PeriodicLattice(h, n, origin), nums[0::2] + 1j * nums[1::2], prov)
