"""Split-step integration of the lattice NLS and of the continuum fractional NLS."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .interpolation import EVOLVED, ContinuumFunction, continuum_wavenumbers
from .kernel import Kernel
from .lattice import (
    LatticeField,
    discrete_energy,
    discrete_mass,
    nonlinearity_sign,
    operator_multiplier,
    sobolev_weight,
)

STRANG = "strang"
LIE = "lie"
MAX_STEPS = 10**8


class BlowUpError(RuntimeError):
    """Raised when a run produces non-finite values or exceeds the growth guard."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    t_final: float
    sign: str = "defocusing"
    scheme: str = STRANG
    record_every: int = 1
    nonlinear: bool = True
    linear: bool = True
    norm_sigmas: tuple = ()
    keep_states: bool = True
    blowup_factor: float = 1e6

    def __post_init__(self):
        nonlinearity_sign(self.sign)
        if self.scheme not in (STRANG, LIE):
            raise ValueError(f"scheme must be 'strang' or 'lie', got {self.scheme!r}")
        if not (self.dt > 0 and self.t_final > 0):
            raise ValueError("dt and t_final must be positive")
        if self.dt > self.t_final * (1 + 1e-12):
            raise ValueError("dt must not exceed t_final")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
        if self.n_steps > MAX_STEPS:
            raise ValueError(f"{self.n_steps} steps exceeds the limit of {MAX_STEPS}")
        for s in self.norm_sigmas:
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"norm sigma {s} outside [0, 1]")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_final / self.dt)))


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    mass_series: list = field(default_factory=list)
    energy_series: list = field(default_factory=list)
    norm_series: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.states[-1]

    def relative_mass_drift(self) -> float:
        m = np.asarray(self.mass_series)
        return float(np.max(np.abs(m - m[0])) / m[0]) if m[0] else float(np.max(np.abs(m)))

    def energy_drift(self) -> float:
        """|E(t_final) - E(0)|."""
        return abs(self.energy_series[-1] - self.energy_series[0])

    def relative_energy_drift(self) -> float:
        e0 = self.energy_series[0]
        return self.energy_drift() / abs(e0) if e0 else self.energy_drift()

    def to_csv(self) -> str:
        sigmas = sorted(self.norm_series)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "mass", "energy"] + [f"norm_sigma_{s:g}" for s in sigmas])
        for i, t in enumerate(self.times):
            row = [t, self.mass_series[i], self.energy_series[i]] + [self.norm_series[s][i] for s in sigmas]
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def default_dt(kernel: Kernel, h: float) -> float:
    """1e-3 * min(1, beta(h) / omega_max) with omega_max <= 4 sum J_n."""
    from .kernel import beta

    return 1e-3 * min(1.0, beta(kernel, h) / (4.0 * kernel.total_weight()))


# ---------------------------------------------------------------------------
# generic split-step driver
# ---------------------------------------------------------------------------


def _split_step(u0, multiplier, config: EvolutionConfig, backward: bool, observe, wrap):
    dt = -config.dt if backward else config.dt
    n = config.n_steps
    g = nonlinearity_sign(config.sign)
    lin_phase = np.exp(-1j * dt * multiplier) if config.linear else None

    def nonlinear(u, tau):
        # i u_t = g |u|^2 u keeps |u| fixed pointwise
        return u * np.exp(-1j * g * tau * (u.real ** 2 + u.imag ** 2)) if config.nonlinear else u

    def linear(u):
        return np.fft.ifft(np.fft.fft(u) * lin_phase) if config.linear else u

    traj = Trajectory()
    cap = config.blowup_factor * max(float(np.max(np.abs(u0))), 1e-300)

    def record(u, step):
        st = wrap(u)
        t = step * dt
        traj.times.append(t)
        mass, energy, norms = observe(st)
        traj.mass_series.append(mass)
        traj.energy_series.append(energy)
        for s, v in norms.items():
            traj.norm_series.setdefault(s, []).append(v)
        traj.states.append(st if config.keep_states or step in (0, n) else None)

    u = np.array(u0, dtype=complex)
    record(u, 0)
    for step in range(1, n + 1):
        if config.scheme == STRANG:
            u = nonlinear(linear(nonlinear(u, 0.5 * dt)), 0.5 * dt)
        else:
            u = linear(nonlinear(u, dt))
        peak = float(np.max(np.abs(u)))
        if not math.isfinite(peak) or peak > cap:
            raise BlowUpError(f"solution left the admissible range at t = {step * dt:g} (max |u| = {peak:.3e})", step * dt)
        if step % config.record_every == 0 or step == n:
            record(u, step)
    if not config.keep_states:
        traj.states = [s for s in traj.states if s is not None]
    return traj


def evolve_discrete(v_h: LatticeField, kernel: Kernel, config: EvolutionConfig, backward: bool = False) -> Trajectory:
    """Integrate i u_t = L^J_h u +- |u|^2 u from v_h (+ for defocusing)."""
    lat = v_h.lattice
    mult = operator_multiplier(kernel, lat)
    weights = {s: sobolev_weight(lat, s) for s in config.norm_sigmas}

    def observe(st: LatticeField):
        norms = {}
        if weights:
            power = np.abs(np.fft.fft(st.values, norm="ortho")) ** 2
            norms = {s: math.sqrt(lat.h * float(np.sum(w * power))) for s, w in weights.items()}
        return discrete_mass(st), discrete_energy(st, kernel, config.sign), norms

    return _split_step(v_h.values, mult, config, backward, observe, lambda u: LatticeField(lat, u))


def continuum_energy(f: ContinuumFunction, alpha: float, c: float, sign: str) -> float:
    """(c/2) int conj(u) (-Delta)^alpha u +- (1/4) int |u|^4."""
    hr = f.fine_grid.h
    power = np.abs(np.fft.fft(f.samples, norm="ortho")) ** 2
    kin = hr * float(np.sum(np.abs(continuum_wavenumbers(f.fine_grid)) ** (2 * alpha) * power))
    quartic = hr * float(np.sum(np.abs(f.samples) ** 4))
    return 0.5 * c * kin + 0.25 * nonlinearity_sign(sign) * quartic


def evolve_continuum(v: ContinuumFunction, alpha: float, c: float, config: EvolutionConfig, backward: bool = False) -> Trajectory:
    """Integrate i u_t = c(-Delta)^alpha u +- |u|^2 u on the fine periodic grid."""
    if not 0.5 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (1/2, 1], got {alpha}")
    if c <= 0:
        raise ValueError("c must be positive")
    grid = v.fine_grid
    kap = np.abs(continuum_wavenumbers(grid))
    mult = c * kap ** (2 * alpha)
    hr = grid.h
    weights = {s: 1.0 + kap ** (2 * s) for s in config.norm_sigmas}

    def observe(st: ContinuumFunction):
        power = np.abs(np.fft.fft(st.samples, norm="ortho")) ** 2
        mass = hr * float(np.sum(power))
        norms = {s: math.sqrt(hr * float(np.sum(w * power))) for s, w in weights.items()}
        return mass, continuum_energy(st, alpha, c, config.sign), norms

    return _split_step(v.samples, mult, config, backward, observe, lambda u: ContinuumFunction(grid, u, EVOLVED))


# ---------------------------------------------------------------------------
# a-priori bound tracking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AprioriRecord:
    sigma: float
    sup_norm: float
    initial_norm: float
    bounded: bool


def track_apriori(trajectory: Trajectory, sigma: float, factor: float = 10.0) -> AprioriRecord:
    """Running supremum of the recorded H^sigma norm and whether it stays below factor x initial."""
    if sigma not in trajectory.norm_series:
        raise KeyError(f"trajectory has no norm record for sigma = {sigma}")
    series = np.asarray(trajectory.norm_series[sigma], dtype=float)
    sup = float(series.max()) if series.size else 0.0
    init = float(series[0]) if series.size else 0.0
    return AprioriRecord(sigma, sup, init, sup <= factor * init or sup == 0.0)


def states_at(trajectory: Trajectory, times: Sequence[float], tol: float = 1e-9):
    """States recorded at the requested times (matched to within tol)."""
    t = np.asarray(trajectory.times)
    out = []
    for target in times:
        i = int(np.argmin(np.abs(t - target)))
        if abs(t[i] - target) > tol * max(1.0, abs(target)):
            raise ValueError(f"no record at t = {target}")
        out.append(trajectory.states[i])
    return out
