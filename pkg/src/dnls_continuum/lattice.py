"""Periodic truncations of hZ, lattice fields, the unitary DFT, L^J_h and discrete norms."""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .kernel import Kernel, beta, lattice_symbol, periodized_kernel

FOCUSING = "focusing"
DEFOCUSING = "defocusing"


def nonlinearity_sign(sign: str) -> float:
    if sign == DEFOCUSING:
        return 1.0
    if sign == FOCUSING:
        return -1.0
    raise ValueError(f"sign must be 'focusing' or 'defocusing', got {sign!r}")


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PeriodicLattice:
    """N sites x_m = origin + m h on a ring of period L = N h.

    ``origin`` is kept a multiple of h so the sites stay on hZ.
    """

    h: float
    n_sites: int
    origin: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.h < 1.0:
            raise ValueError(f"lattice mesh must satisfy 0 < h < 1, got {self.h}")
        if int(self.n_sites) != self.n_sites or not _is_power_of_two(int(self.n_sites)):
            raise ValueError(f"n_sites must be a power of two, got {self.n_sites}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        m0 = self.origin / self.h
        if abs(m0 - round(m0)) > 1e-9 * max(1.0, abs(m0)):
            raise ValueError("origin must be an integer multiple of h")

    @classmethod
    def from_length(cls, length: float, h: float, centered: bool = True) -> "PeriodicLattice":
        ratio = length / h
        n = int(round(ratio))
        if abs(ratio - n) > 1e-9 * ratio or not _is_power_of_two(n):
            raise ValueError(f"h = {h} does not divide L = {length} into a power-of-two number of sites")
        return cls(h, n, -0.5 * n * h if centered else 0.0)

    @property
    def length(self) -> float:
        return self.n_sites * self.h

    def positions(self) -> np.ndarray:
        return self.origin + self.h * np.arange(self.n_sites)

    def wavenumbers(self) -> np.ndarray:
        """Dimensionless k_j = 2 pi j / N in (-pi, pi], numpy FFT order."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n_sites)
        k[k == -np.pi] = np.pi
        return k

    def physical_wavenumbers(self) -> np.ndarray:
        return self.wavenumbers() / self.h

    def refinement(self, other: "PeriodicLattice") -> int:
        """Integer r with self.h = r * other.h on the same period and origin."""
        if not math.isclose(self.length, other.length, rel_tol=1e-12):
            raise ValueError(f"period mismatch: {self.length} vs {other.length}")
        if not math.isclose(self.origin, other.origin, rel_tol=1e-12, abs_tol=1e-12 * self.length):
            raise ValueError("grids must share the same origin")
        r = self.h / other.h
        ri = int(round(r))
        if ri < 1 or abs(r - ri) > 1e-9 * r:
            raise ValueError(f"h/h_ref = {r} is not a positive integer")
        return ri


def _as_values(values, n: int) -> np.ndarray:
    arr = np.array(values, dtype=complex).reshape(-1)
    if arr.size != n:
        raise ValueError(f"expected {n} values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field values must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LatticeField:
    lattice: PeriodicLattice
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.values, self.lattice.n_sites))

    def with_values(self, values) -> "LatticeField":
        return LatticeField(self.lattice, values)

    def __add__(self, other: "LatticeField") -> "LatticeField":
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "LatticeField") -> "LatticeField":
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar) -> "LatticeField":
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralField:
    lattice: PeriodicLattice
    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _as_values(self.coefficients, self.lattice.n_sites))


def dft(field: LatticeField) -> SpectralField:
    """Unitary DFT: h sum |u|^2 == h sum |u_hat|^2."""
    return SpectralField(field.lattice, np.fft.fft(field.values, norm="ortho"))


def idft(spec: SpectralField) -> LatticeField:
    return LatticeField(spec.lattice, np.fft.ifft(spec.coefficients, norm="ortho"))


def inner(v: LatticeField, u: LatticeField) -> complex:
    """(v, u)_{L^2_h} = h sum conj(u) v."""
    return complex(v.lattice.h * np.vdot(u.values, v.values))


# ---------------------------------------------------------------------------
# L^J_h
# ---------------------------------------------------------------------------


@lru_cache(maxsize=128)
def _cached_symbol(kernel: Kernel, n_sites: int, mode: str) -> np.ndarray:
    w = lattice_symbol(kernel, n_sites, mode)
    w.setflags(write=False)
    return w


def operator_multiplier(kernel: Kernel, lattice: PeriodicLattice, periodization: str = "periodize") -> np.ndarray:
    """Eigenvalues omega(k_j) / beta(h) of L^J_h on the ring, FFT order."""
    return _cached_symbol(kernel, lattice.n_sites, periodization) / beta(kernel, lattice.h)


def apply_LJ(
    field: LatticeField,
    kernel: Kernel,
    mode: str = "spectral",
    periodization: str = "periodize",
) -> LatticeField:
    """(L u)(x_m) = beta(h)^-1 sum_{n != 0} J_|n| [u(x_m) - u(x_m - x_n)] on the ring.

    ``mode='direct'`` performs the O(N^2) periodic summation and serves as an
    oracle for the spectral path.
    """
    lat = field.lattice
    if mode == "spectral":
        mult = operator_multiplier(kernel, lat, periodization)
        return LatticeField(lat, np.fft.ifft(np.fft.fft(field.values) * mult))
    if mode != "direct":
        raise ValueError(f"unknown mode {mode!r}")
    P = periodized_kernel(kernel, lat.n_sites, periodization)
    u = field.values
    acc = np.zeros_like(u)
    for r in range(1, lat.n_sites):
        if P[r]:
            acc += P[r] * (u - np.roll(u, r))
    return LatticeField(lat, acc / beta(kernel, lat.h))


def quadratic_form(field: LatticeField, kernel: Kernel) -> float:
    """(u, L^J_h u)_{L^2_h}, evaluated spectrally."""
    uh = np.fft.fft(field.values, norm="ortho")
    mult = operator_multiplier(kernel, field.lattice)
    return float(field.lattice.h * np.sum(mult * np.abs(uh) ** 2))


def forward_diff(field: LatticeField) -> LatticeField:
    """(D+ u)(x_m) = (u(x_{m+1}) - u(x_m)) / h with periodic wrap."""
    u = field.values
    return field.with_values((np.roll(u, -1) - u) / field.lattice.h)


# ---------------------------------------------------------------------------
# Norms and conserved quantities
# ---------------------------------------------------------------------------

NORM_KINDS = ("L2", "L4", "Linf", "Hsigma", "HJ", "HtildeOne", "DualHsigma")


def sobolev_weight(lattice: PeriodicLattice, sigma: float) -> np.ndarray:
    """1 + h^(-2 sigma) |k_j|^(2 sigma) on the DFT grid."""
    _check_sigma(sigma)
    if sigma == 0:
        # H^0_h is L^2_h; the formula would otherwise double every nonzero mode
        return np.ones(lattice.n_sites)
    return 1.0 + (np.abs(lattice.wavenumbers()) / lattice.h) ** (2.0 * sigma)


def _check_sigma(sigma):
    if sigma is None or not 0.0 <= sigma <= 1.0:
        raise ValueError(f"sigma must lie in [0, 1], got {sigma}")


def discrete_norm(field: LatticeField, kind: str, sigma: float | None = None, kernel: Kernel | None = None) -> float:
    lat = field.lattice
    u = field.values
    h = lat.h
    if kind == "L2":
        return math.sqrt(h * float(np.sum(np.abs(u) ** 2)))
    if kind == "L4":
        return (h * float(np.sum(np.abs(u) ** 4))) ** 0.25
    if kind == "Linf":
        return float(np.max(np.abs(u)))
    if kind in ("Hsigma", "DualHsigma"):
        w = sobolev_weight(lat, sigma)
        power = np.abs(np.fft.fft(u, norm="ortho")) ** 2
        if kind == "DualHsigma":
            w = 1.0 / w
        return math.sqrt(h * float(np.sum(w * power)))
    if kind == "HJ":
        if kernel is None:
            raise ValueError("HJ norm needs a kernel")
        return math.sqrt(discrete_norm(field, "L2") ** 2 + quadratic_form(field, kernel))
    if kind == "HtildeOne":
        du = forward_diff(field)
        return math.sqrt(discrete_norm(field, "L2") ** 2 + discrete_norm(du, "L2") ** 2)
    raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")


def discrete_mass(field: LatticeField) -> float:
    return field.lattice.h * float(np.sum(np.abs(field.values) ** 2))


def discrete_energy(field: LatticeField, kernel: Kernel, sign: str) -> float:
    """E_h = (1/2)(u, L u) +- (1/4)||u||_{L^4_h}^4, + for defocusing."""
    quartic = field.lattice.h * float(np.sum(np.abs(field.values) ** 4))
    return 0.5 * quadratic_form(field, kernel) + 0.25 * nonlinearity_sign(sign) * quartic


def discrete_energy_direct(field: LatticeField, kernel: Kernel, sign: str) -> float:
    """Same energy from the double sum (h / 4 beta) sum_{m != n} J |u_m - u_n|^2 (O(N^2))."""
    lat = field.lattice
    P = periodized_kernel(kernel, lat.n_sites)
    u = field.values
    pair = 0.0
    for r in range(1, lat.n_sites):
        pair += P[r] * float(np.sum(np.abs(u - np.roll(u, r)) ** 2))
    quartic = lat.h * float(np.sum(np.abs(u) ** 4))
    return lat.h * pair / (4.0 * beta(kernel, lat.h)) + 0.25 * nonlinearity_sign(sign) * quartic


# ---------------------------------------------------------------------------
# Serialization
#
# binary: little endian int64 N, float64 h, float64 origin, then N (re, im) float64 pairs
# csv:    one record  N,h,origin,re_0,im_0,...,re_{N-1},im_{N-1}
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<qdd")


def field_to_bytes(field: LatticeField) -> bytes:
    lat = field.lattice
    body = np.empty(2 * lat.n_sites, dtype="<f8")
    body[0::2] = field.values.real
    body[1::2] = field.values.imag
    return _HEADER.pack(lat.n_sites, lat.h, lat.origin) + body.tobytes()


def field_from_bytes(blob: bytes) -> LatticeField:
    n, h, origin = _HEADER.unpack_from(blob)
    body = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    if body.size != 2 * n:
        raise ValueError(f"truncated field record: expected {2 * n} floats, got {body.size}")
    return LatticeField(PeriodicLattice(h, n, origin), body[0::2] + 1j * body[1::2])


def _fmt(x: float) -> str:
    return repr(float(x))


def field_to_csv(field: LatticeField) -> str:
    lat = field.lattice
    parts = [str(lat.n_sites), _fmt(lat.h), _fmt(lat.origin)]
    for z in field.values:
        parts += [_fmt(z.real), _fmt(z.imag)]
    return ",".join(parts) + "\n"


def field_from_csv(text: str) -> LatticeField:
    parts = text.strip().split(",")
    n = int(parts[0])
    h, origin = float(parts[1]), float(parts[2])
    nums = np.array([float(x) for x in parts[3:]])
    if nums.size != 2 * n:
        raise ValueError(f"field record has {nums.size} numbers, expected {2 * n}")
    return LatticeField(PeriodicLattice(h, n, origin), nums[0::2] + 1j * nums[1::2])


def save_field(field: LatticeField, path) -> None:
    path = Path(path)
    if path.suffix == ".csv":
        path.write_text(field_to_csv(field))
    else:
        path.write_bytes(field_to_bytes(field))


def load_field(path) -> LatticeField:
    path = Path(path)
    if path.suffix == ".csv":
        return field_from_csv(path.read_text())
    return field_from_bytes(path.read_bytes())
