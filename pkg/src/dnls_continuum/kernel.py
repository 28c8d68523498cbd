"""Interaction kernels J = (J_n), the lattice scaling beta(h), and the dispersion symbol.

Every kernel is stored in a normalized three-part form

    J_n = head_n + A * n**(-p) + g * q**(n - 1),      p = 1 + 2s,

where ``head`` is a finite correction list, the power part carries the
tail constant A of the class K_s, and the geometric part covers
exponentially decaying interactions.  The symbol

    omega(k) = 2 * sum_{n >= 1} J_n (1 - cos(n k))

is evaluated part by part: finite sums exactly, the geometric part in
closed form, and the power part as an explicit partial sum up to
``eval_cutoff`` plus an integral comparison tail with Euler-Maclaurin
boundary terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import integrate, special

DEFAULT_EVAL_CUTOFF = 100_000

# Bernoulli numbers B_2, B_4, B_6 for the Euler-Maclaurin boundary terms.
_BERNOULLI = ((2, 1.0 / 6.0), (4, -1.0 / 30.0), (6, 1.0 / 42.0))


# ---------------------------------------------------------------------------
# Kernel specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PurePower:
    """J_n = n^(-1-2s)."""

    s: float

    def __post_init__(self):
        if not (self.s > 0 and math.isfinite(self.s)):
            raise ValueError(f"PurePower requires finite s > 0, got {self.s}")


@dataclass(frozen=True)
class NearestNeighbor:
    """J_1 = 1 and J_n = 0 for n >= 2."""


@dataclass(frozen=True)
class Exponential:
    """J_n = exp(-rate * (n - 1)), normalized so that J_1 = 1."""

    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"Exponential requires rate > 0, got {self.rate}")


@dataclass(frozen=True)
class Table:
    """Explicit values J_1..J_L.

    With ``declared_class = inf`` the kernel vanishes beyond the table.  With a
    finite declared class s the table is continued by the pure-power tail
    A n^(-1-2s), A fixed by the last entry.
    """

    values: tuple
    declared_class: float = math.inf

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValueError("Table kernel needs at least one value")
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise ValueError("Table values must be finite and nonnegative")
        if vals[0] <= 0:
            raise ValueError("Table kernel needs J_1 > 0 (nearest neighbours must interact)")
        dc = float(self.declared_class)
        if not dc > 0:
            raise ValueError(f"declared_class must be positive or inf, got {dc}")
        if math.isfinite(dc) and vals[-1] <= 0:
            raise ValueError("a finite declared class needs a positive last table entry")
        object.__setattr__(self, "declared_class", dc)


KernelSpec = Union[PurePower, NearestNeighbor, Exponential, Table]


def spec_to_dict(spec: KernelSpec) -> dict:
    """Serialize a kernel spec as a flat record (variant tag plus parameters)."""
    if isinstance(spec, PurePower):
        return {"variant": "pure_power", "s": spec.s}
    if isinstance(spec, NearestNeighbor):
        return {"variant": "nearest_neighbor"}
    if isinstance(spec, Exponential):
        return {"variant": "exponential", "rate": spec.rate}
    if isinstance(spec, Table):
        return {
            "variant": "table",
            "values": list(spec.values),
            "declared_class": "inf" if math.isinf(spec.declared_class) else spec.declared_class,
        }
    raise TypeError(f"not a kernel spec: {spec!r}")


def spec_from_dict(record: dict) -> KernelSpec:
    rec = dict(record)
    variant = rec.pop("variant", None)
    allowed = {
        "pure_power": {"s"},
        "nearest_neighbor": set(),
        "exponential": {"rate"},
        "table": {"values", "declared_class"},
    }
    if variant not in allowed:
        raise ValueError(f"unknown kernel variant {variant!r}; expected one of {sorted(allowed)}")
    extra = set(rec) - allowed[variant]
    if extra:
        raise ValueError(f"unknown keys for kernel variant {variant!r}: {sorted(extra)}")
    missing = allowed[variant] - set(rec) - {"declared_class"}
    if missing:
        raise ValueError(f"kernel variant {variant!r} is missing {sorted(missing)}")
    if variant == "pure_power":
        return PurePower(float(rec["s"]))
    if variant == "nearest_neighbor":
        return NearestNeighbor()
    if variant == "exponential":
        return Exponential(float(rec["rate"]))
    values = rec["values"]
    if isinstance(values, str):
        values = [float(v) for v in values.replace(",", " ").split()]
    return Table(tuple(values), float(rec.get("declared_class", "inf")))


# ---------------------------------------------------------------------------
# Kernel
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Kernel:
    spec: KernelSpec
    class_s: float
    tail_constant_A: float
    j1: float
    eval_cutoff: int
    head: np.ndarray = field(repr=False, compare=False)
    power: float | None = field(repr=False, compare=False)
    geom_weight: float = field(default=0.0, repr=False, compare=False)
    geom_ratio: float = field(default=0.0, repr=False, compare=False)

    def j(self, n) -> np.ndarray:
        """Interaction coefficients J_n for integer n >= 1 (vectorized)."""
        n = np.asarray(n)
        if np.any(n < 1):
            raise ValueError("J_n is defined for n >= 1")
        nf = n.astype(float)
        out = np.zeros(nf.shape)
        if self.head.size:
            inside = n <= self.head.size
            out[inside] += self.head[n[inside] - 1]
        if self.power is not None:
            out += self.tail_constant_A * nf ** (-self.power)
        if self.geom_weight:
            out += self.geom_weight * self.geom_ratio ** (nf - 1.0)
        return out

    def total_weight(self) -> float:
        """sum_{n>=1} J_n (finite for every admissible kernel)."""
        tot = float(self.head.sum())
        if self.power is not None:
            tot += self.tail_constant_A * float(special.zeta(self.power, 1.0))
        if self.geom_weight:
            tot += self.geom_weight / (1.0 - self.geom_ratio)
        return tot


def build_kernel(spec: KernelSpec, eval_cutoff: int = DEFAULT_EVAL_CUTOFF) -> Kernel:
    if int(eval_cutoff) != eval_cutoff or eval_cutoff < 1:
        raise ValueError(f"eval_cutoff must be a positive integer, got {eval_cutoff}")
    eval_cutoff = int(eval_cutoff)
    empty = np.zeros(0)
    if isinstance(spec, PurePower):
        return Kernel(spec, spec.s, 1.0, 1.0, eval_cutoff, empty, 1.0 + 2.0 * spec.s)
    if isinstance(spec, NearestNeighbor):
        return Kernel(spec, math.inf, 0.0, 1.0, eval_cutoff, np.array([1.0]), None)
    if isinstance(spec, Exponential):
        q = math.exp(-spec.rate)
        return Kernel(spec, math.inf, 0.0, 1.0, eval_cutoff, empty, None, 1.0, q)
    if isinstance(spec, Table):
        vals = np.array(spec.values, dtype=float)
        s = spec.declared_class
        if math.isinf(s):
            return Kernel(spec, math.inf, 0.0, vals[0], eval_cutoff, vals, None)
        p = 1.0 + 2.0 * s
        n = np.arange(1, vals.size + 1, dtype=float)
        A = vals[-1] * vals.size**p
        head = vals - A * n ** (-p)
        head[-1] = 0.0
        return Kernel(spec, s, A, vals[0], eval_cutoff, head, p)
    raise TypeError(f"not a kernel spec: {spec!r}")


SWEEP_EVAL_CUTOFF = 4096


def with_eval_cutoff(kernel: Kernel, eval_cutoff: int) -> Kernel:
    """Same kernel with a different explicit-summation length.

    The tail correction keeps omega at machine precision for cutoffs of a few
    thousand, which makes dense k sweeps cheap.
    """
    if eval_cutoff == kernel.eval_cutoff:
        return kernel
    return build_kernel(kernel.spec, eval_cutoff)


# ---------------------------------------------------------------------------
# Scaling regimes
# ---------------------------------------------------------------------------

SUB1, LOG, SUPER1 = "Sub1", "Log", "Super1"


@dataclass(frozen=True)
class ScalingClass:
    alpha: float
    regime: str
    s: float

    def __post_init__(self):
        if self.regime not in (SUB1, LOG, SUPER1):
            raise ValueError(f"unknown regime {self.regime!r}")
        if not 0.5 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (1/2, 1], got {self.alpha}")


def scaling_class(kernel: Kernel) -> ScalingClass:
    s = kernel.class_s
    if s <= 0.5:
        raise ValueError(f"kernel class s = {s} <= 1/2 lies outside the continuum-limit regime")
    if s < 1.0:
        return ScalingClass(s, SUB1, s)
    if s == 1.0:
        return ScalingClass(1.0, LOG, s)
    return ScalingClass(1.0, SUPER1, s)


def _check_h(h: float) -> None:
    if not 0.0 < h < 1.0:
        raise ValueError(f"mesh size must satisfy 0 < h < 1, got {h}")


def beta(kernel: Kernel, h: float) -> float:
    """Scaling factor of the interaction sum on the lattice hZ."""
    _check_h(h)
    sc = scaling_class(kernel)
    if sc.regime == SUB1:
        return h ** (2.0 * sc.s)
    if sc.regime == LOG:
        return -math.log(h) * h * h
    return h * h


def delta(scaling: ScalingClass, k) -> np.ndarray:
    """Comparison function with omega(k) ~ c * delta(k) as k -> 0."""
    ka = np.abs(np.asarray(k, dtype=float))
    if np.any(ka == 0):
        raise ValueError("delta(k) is only used away from k = 0")
    if scaling.regime == SUB1:
        return ka ** (2.0 * scaling.s)
    if scaling.regime == LOG:
        if np.any(ka >= 1):
            raise ValueError("the logarithmic comparison function needs 0 < |k| < 1")
        return -np.log(ka) * ka * ka
    return ka * ka


def power_constant(s: float) -> float:
    """C_s = int_0^inf (1 - cos x) x^(-1-2s) dx = pi / (4 s Gamma(2s) sin(s pi)), 0 < s < 1."""
    return math.pi / (4.0 * s * math.gamma(2.0 * s) * math.sin(s * math.pi))


def limit_constant_c(kernel: Kernel) -> float:
    """c = lim_{k->0} omega(k) / delta(k), with the factor 2 of omega included."""
    sc = scaling_class(kernel)
    A = kernel.tail_constant_A
    if sc.regime == SUB1:
        return 2.0 * A * power_constant(sc.s)
    if sc.regime == LOG:
        return A
    n = np.arange(1, kernel.head.size + 1, dtype=float)
    c = float(np.sum(n * n * kernel.head))
    if kernel.power is not None and A > 0:
        if kernel.power - 2.0 <= 1.0:
            raise ValueError("sum n^2 J_n diverges: declared class inconsistent with Super1 regime")
        c += A * float(special.zeta(kernel.power - 2.0, 1.0))
    if kernel.geom_weight:
        q = kernel.geom_ratio
        c += kernel.geom_weight * (1.0 + q) / (1.0 - q) ** 3
    return c


def correction_exponent(kernel: Kernel) -> float:
    """Leading power gamma in omega(k)/delta(k) = c + b k^gamma + ... (not used for Log)."""
    sc = scaling_class(kernel)
    if sc.regime == SUB1:
        return 2.0 - 2.0 * sc.s
    if kernel.power is not None and kernel.tail_constant_A > 0:
        return min(2.0 * sc.s - 2.0, 2.0)
    return 2.0


# ---------------------------------------------------------------------------
# Symbol evaluation at arbitrary wavenumbers
# ---------------------------------------------------------------------------


def _cos_integral_tail(p: float, a: float) -> float:
    """int_a^inf y^-p cos(y) dy for a >= 1 (QAWF Fourier quadrature)."""
    # full_output returns QAWF's cycle diagnostics instead of warning (thread safe)
    res = integrate.quad(
        lambda y: y ** (-p), a, np.inf, weight="cos", wvar=1.0,
        epsabs=1e-15, epsrel=1e-13, limlst=200, full_output=1,
    )
    return res[0]


@lru_cache(maxsize=64)
def _tail_integral_at_one(p: float) -> float:
    return 1.0 / (p - 1.0) - _cos_integral_tail(p, 1.0)


def tail_integral(p: float, a: float) -> float:
    """G_p(a) = int_a^inf y^-p (1 - cos y) dy for a > 0 and p > 1."""
    if a <= 0:
        raise ValueError("tail integral needs a > 0")
    if a >= 1.0:
        return a ** (1.0 - p) / (p - 1.0) - _cos_integral_tail(p, a)
    # 1 - cos y = sum_j (-1)^(j+1) y^(2j) / (2j)!, integrated termwise over [a, 1]
    total = _tail_integral_at_one(p)
    log_a = math.log(a)
    for j in range(1, 16):
        e = 2 * j - p + 1.0
        if e == 0.0:
            piece = -log_a
        else:
            piece = -math.expm1(e * log_a) / e
        total += (-1) ** (j + 1) * piece / math.factorial(2 * j)
    return total


def _power_tail_derivative(p: float, k: float, x: float, m: int) -> float:
    """m-th derivative of f(x) = x^-p (1 - cos k x) by the Leibniz rule.

    The undifferentiated factor uses 2 sin^2(kx/2) so that small kx does not
    cancel against x^-p.
    """

    def xpow(i):
        # i-th derivative of x^-p
        return (-1) ** i * special.poch(p, i) * x ** (-p - i)

    def g(j):
        if j == 0:
            return 2.0 * math.sin(0.5 * k * x) ** 2
        return -(k**j) * math.cos(k * x + j * math.pi / 2)

    return sum(math.comb(m, i) * xpow(i) * g(m - i) for i in range(m + 1))


def _power_symbol(p: float, k: np.ndarray, cutoff: int) -> np.ndarray:
    """sum_{n>=1} n^-p (1 - cos n k) for k in (0, pi], without the factor 2."""
    out = np.zeros(k.shape)
    block = max(1, 4_000_000 // max(k.size, 1))
    for start in range(1, cutoff + 1, block):
        n = np.arange(start, min(start + block, cutoff + 1), dtype=float)
        half = np.sin(np.multiply.outer(k, n) * 0.5)
        out += (2.0 * half * half) @ n ** (-p)
    M = float(cutoff)
    for i, kk in enumerate(k):
        tail = kk ** (p - 1.0) * tail_integral(p, kk * M)
        tail -= 0.5 * _power_tail_derivative(p, kk, M, 0)
        for order, b in _BERNOULLI:
            tail -= b / math.factorial(order) * _power_tail_derivative(p, kk, M, order - 1)
        out[i] += tail
    return out


def _geometric_symbol(q: float, k: np.ndarray) -> np.ndarray:
    """sum_{n>=1} q^(n-1) (1 - cos n k), cancellation-free closed form."""
    half = np.sin(0.5 * k)
    num = 2.0 * half * half * (1.0 - q * np.cos(k)) + q * np.sin(k) ** 2
    den = (1.0 - q) * ((1.0 - q * np.cos(k)) ** 2 + (q * np.sin(k)) ** 2)
    return num / den


def omega(kernel: Kernel, k) -> np.ndarray:
    """Dispersion symbol omega(k) = 2 sum_n J_n (1 - cos n k).

    ``k`` may be any real array; the symbol is even and 2*pi periodic, so
    arguments are folded into [0, pi] first.
    """
    k_in = np.asarray(k, dtype=float)
    kf = np.abs(k_in)
    wide = kf > np.pi
    if np.any(wide):
        # fold only where needed: shifting small k by pi costs relative accuracy
        kf = np.where(wide, np.abs(np.remainder(kf + np.pi, 2.0 * np.pi) - np.pi), kf)
    flat = kf.ravel()
    out = np.zeros(flat.shape)
    nz = flat > 0
    kk = flat[nz]
    if kk.size:
        acc = np.zeros(kk.shape)
        if kernel.head.size:
            n = np.arange(1, kernel.head.size + 1, dtype=float)
            half = np.sin(np.multiply.outer(kk, n) * 0.5)
            acc += (2.0 * half * half) @ kernel.head
        if kernel.power is not None and kernel.tail_constant_A:
            uniq, inv = np.unique(kk, return_inverse=True)
            acc += kernel.tail_constant_A * _power_symbol(kernel.power, uniq, kernel.eval_cutoff)[inv]
        if kernel.geom_weight:
            acc += kernel.geom_weight * _geometric_symbol(kernel.geom_ratio, kk)
        out[nz] = 2.0 * acc
    return out.reshape(kf.shape)


# ---------------------------------------------------------------------------
# Periodized kernel and the symbol on a DFT grid
# ---------------------------------------------------------------------------


def periodized_kernel(kernel: Kernel, n_sites: int, mode: str = "periodize") -> np.ndarray:
    """Coefficients P_r, r = 0..N-1, of the kernel folded onto a ring of N sites.

    ``mode='periodize'`` sums J over all images n + l N (both signs), so the
    ring operator has exactly omega(2 pi j / N) as eigenvalues.
    ``mode='truncate'`` keeps only |n| <= N/2 (no images).
    """
    N = int(n_sites)
    if N < 2:
        raise ValueError("ring needs at least two sites")
    P = np.zeros(N)
    r = np.arange(1, N)
    if mode == "truncate":
        d = np.minimum(r, N - r)
        P[1:] = kernel.j(d)
        return P
    if mode != "periodize":
        raise ValueError(f"unknown periodization mode {mode!r}")
    if kernel.head.size:
        n = np.arange(1, kernel.head.size + 1)
        np.add.at(P, n % N, kernel.head)
        np.add.at(P, (-n) % N, kernel.head)
    if kernel.power is not None and kernel.tail_constant_A:
        p = kernel.power
        x = r / N
        P[1:] += kernel.tail_constant_A * N ** (-p) * (special.zeta(p, x) + special.zeta(p, 1.0 - x))
    if kernel.geom_weight:
        q = kernel.geom_ratio
        P[1:] += kernel.geom_weight * (q ** (r - 1.0) + q ** (N - r - 1.0)) / (1.0 - q**N)
    P[0] = 0.0
    return P


def lattice_symbol(kernel: Kernel, n_sites: int, mode: str = "periodize") -> np.ndarray:
    """omega at the DFT wavenumbers k_j = 2 pi j / N, in numpy FFT order."""
    P = periodized_kernel(kernel, n_sites, mode)
    w = P.sum() - np.fft.fft(P).real
    w[0] = 0.0
    return np.maximum(w, 0.0)


# ---------------------------------------------------------------------------
# Numeric limit extrapolation
# ---------------------------------------------------------------------------


@dataclass
class LimitEstimate:
    k: np.ndarray
    ratios: np.ndarray
    extrapolated: np.ndarray

    @property
    def value(self) -> float:
        return float(self.extrapolated[-1])


def extrapolate_limit(kernel: Kernel, j_min: int = 6, j_max: int = 16) -> LimitEstimate:
    """Estimate lim omega(k)/delta(k) on k_j = 2^-j by first-order Richardson.

    The elimination variable is the regime's leading correction: k^gamma for
    power regimes and 1/(-log k) for the logarithmic one.
    """
    sc = scaling_class(kernel)
    k = 2.0 ** -np.arange(j_min, j_max + 1, dtype=float)
    ratios = omega(kernel, k) / delta(sc, k)
    if sc.regime == LOG:
        eps = 1.0 / -np.log(k)
    else:
        eps = k ** correction_exponent(kernel)
    ext = (eps[:-1] * ratios[1:] - eps[1:] * ratios[:-1]) / (eps[:-1] - eps[1:])
    return LimitEstimate(k, ratios, ext)
