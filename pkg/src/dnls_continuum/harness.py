"""Config-driven continuum-limit experiments, the check suite and CSV reporting."""
from __future__ import annotations

import configparser
import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernel as ks
from .dynamics import BlowUpError, EvolutionConfig, Trajectory, evolve_continuum, evolve_discrete
from .interpolation import (
    AliasingError,
    ContinuumFunction,
    continuum_inner,
    continuum_norm,
    discretize,
    interpolant_norm,
    p_linear,
)
from .lattice import PeriodicLattice, discrete_norm, load_field
from .verification import (
    CheckReport,
    check_conservation,
    check_discretization_bound,
    check_integration_by_parts,
    check_lattice_identities,
    check_log_regime,
    check_multiplier_equivalence,
    check_operator_limit,
    check_symbol_asymptotics,
    check_uniform_inequalities,
    fitted_slope,
    kernel_inequalities,
    kernel_label,
    lattice_inequalities,
    strictly_decreasing,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
OUTPUT_ENV = "DNLS_OUT"
DEFAULT_OUTPUT_DIR = "dnls_out"


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending setting when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class ExperimentError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# config types
# ---------------------------------------------------------------------------

DATUM_KINDS = ("gaussian", "sech", "modulated", "file")


@dataclass(frozen=True)
class DatumSpec:
    """gaussian: A exp(-((x - x0)/w)^2); sech: A sech((x - x0)/w); modulated: base times e^{i kappa x}."""

    kind: str = "gaussian"
    width: float = 1.0
    center: float = 0.0
    amplitude: float = 1.0
    wavenumber: float = 0.0
    base: str = ""
    path: str = ""

    def __post_init__(self):
        if self.kind not in DATUM_KINDS:
            raise ConfigError(f"unknown datum type {self.kind!r}")
        if self.kind == "modulated" and self.base not in ("gaussian", "sech"):
            raise ConfigError("modulated datum needs base = gaussian or sech")
        if self.kind == "file" and not self.path:
            raise ConfigError("file datum needs a path")
        if self.kind != "file" and not self.width > 0:
            raise ConfigError("datum width must be positive")

    @property
    def profile(self) -> str:
        return self.base if self.kind == "modulated" else self.kind

    def __call__(self, x):
        if self.kind == "file":
            raise ConfigError("file data have no closed form")
        y = (np.asarray(x, dtype=float) - self.center) / self.width
        env = np.exp(-y * y) if self.profile == "gaussian" else 1.0 / np.cosh(y)
        out = self.amplitude * env.astype(complex)
        if self.wavenumber:
            out = out * np.exp(1j * self.wavenumber * np.asarray(x))
        return out

    def on_grid(self, grid: PeriodicLattice) -> ContinuumFunction:
        if self.kind == "file":
            return _resample(load_field(self.path), grid)
        return ContinuumFunction.from_callable(self, grid)


def _resample(field_, grid: PeriodicLattice) -> ContinuumFunction:
    """Trigonometric interpolation of a stored field onto ``grid``."""
    src = field_.lattice
    if not math.isclose(src.length, grid.length, rel_tol=1e-12):
        raise ConfigError(f"datum file period {src.length} differs from box length {grid.length}")
    n, m = src.n_sites, grid.n_sites
    if m < n:
        raise ConfigError("datum file is finer than the reference grid")
    coef = np.fft.fft(field_.values)
    pad = np.zeros(m, dtype=complex)
    half = n // 2
    pad[:half] = coef[:half]
    pad[m - half:] = coef[n - half:]
    vals = np.fft.ifft(pad) * (m / n)
    # both grids start at their origin; shift if origins differ by a fine-grid multiple
    shift = int(round((src.origin - grid.origin) / grid.h))
    return ContinuumFunction(grid, np.roll(vals, shift))


@dataclass(frozen=True)
class ExperimentConfig:
    kernel: ks.KernelSpec
    h_ladder: tuple
    box_length: float
    datum: DatumSpec
    sign: str = "defocusing"
    t_final: float = 0.5
    dt: float = 1e-3
    test_functions: tuple = ()
    seed: int = 0
    output_dir: str = DEFAULT_OUTPUT_DIR
    eval_cutoff: int = ks.DEFAULT_EVAL_CUTOFF
    scheme: str = "strang"
    sample_interval: float = 0.05
    refine: int = 8
    dt_ref_factor: int = 10

    def __post_init__(self):
        validate_config(self)

    @property
    def h_ref(self) -> float:
        return min(self.h_ladder) / self.refine


def ladder_problems(h_ladder: Sequence[float], box_length: float) -> list:
    bad = []
    for h in h_ladder:
        ratio = box_length / h
        n = int(round(ratio))
        if not (0 < h < 1) or abs(ratio - n) > 1e-9 * ratio or n < 2 or n & (n - 1):
            bad.append(h)
    return bad


def validate_config(cfg: ExperimentConfig) -> None:
    if not cfg.h_ladder:
        raise ConfigError("h_ladder is empty", "h_ladder")
    bad = ladder_problems(cfg.h_ladder, cfg.box_length)
    if bad:
        raise ConfigError(
            "h values not dividing L = %g into a power-of-two number of sites (or not in (0, 1)): %s"
            % (cfg.box_length, ", ".join(f"{h:g}" for h in bad)),
            "h_ladder",
        )
    if list(cfg.h_ladder) != sorted(cfg.h_ladder, reverse=True) or len(set(cfg.h_ladder)) != len(cfg.h_ladder):
        raise ConfigError("h_ladder must be strictly descending", "h_ladder")
    if cfg.refine < 1 or cfg.dt_ref_factor < 1:
        raise ConfigError("refine and dt_ref_factor must be positive integers", "refine")
    if ladder_problems([cfg.h_ref], cfg.box_length):
        raise ConfigError(f"reference mesh h_min/refine = {cfg.h_ref:g} is not a valid grid", "refine")
    try:
        EvolutionConfig(cfg.dt, cfg.t_final, cfg.sign, cfg.scheme)
    except ValueError as exc:
        raise ConfigError(str(exc), "dt") from None
    steps = cfg.sample_interval / cfg.dt
    if cfg.sample_interval <= 0 or abs(steps - round(steps)) > 1e-9 * steps:
        raise ConfigError("sample_interval must be a positive multiple of dt", "sample_interval")
    total = cfg.t_final / cfg.dt
    if abs(total - round(total)) > 1e-9 * total:
        raise ConfigError("t_final must be a multiple of dt", "t_final")


# ---------------------------------------------------------------------------
# INI parsing and emission
# ---------------------------------------------------------------------------

KERNEL_KEYS = {
    "pure_power": {"variant", "s", "eval_cutoff"},
    "nearest_neighbor": {"variant", "eval_cutoff"},
    "exponential": {"variant", "rate", "eval_cutoff"},
    "table": {"variant", "values", "declared_class", "eval_cutoff"},
}
VARIANT_ALIASES = {"PurePower": "pure_power", "NearestNeighbor": "nearest_neighbor", "Exponential": "exponential", "Table": "table"}
EXPERIMENT_KEYS = {
    "h_ladder", "box_length", "sign", "t_final", "dt", "seed", "output_dir",
    "scheme", "sample_interval", "refine", "dt_ref_factor",
}
DATUM_KEYS = {"type", "width", "center", "amplitude", "wavenumber", "base", "path"}
REQUIRED_EXPERIMENT = ("h_ladder", "box_length", "t_final", "dt")


def _line_index(text: str) -> dict:
    """(section, key) -> 1-based line number; (section, None) for headers."""
    index, section = {}, None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            index[(section, None)] = i
        elif section is not None:
            for sep in ("=", ":"):
                if sep in line:
                    index[(section, line.split(sep, 1)[0].strip().lower())] = i
                    break
    return index


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: duplicate key '{exc.option}' in section [{exc.section}]") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: duplicate section [{exc.section}]") from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: key outside any section: {exc.line.strip()!r}") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"{source}:{lineno}: cannot parse {line.strip()!r}") from None
    lines = _line_index(text)

    def where(section, key=None):
        n = lines.get((section, key)) or lines.get((section, None))
        return f"{source}:{n}" if n else source

    def get(section, key, conv, default=None):
        if key not in parser[section]:
            if default is None:
                raise ConfigError(f"{where(section)}: section [{section}] is missing key '{key}'")
            return default
        raw = parser[section][key]
        try:
            return conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where(section, key)}: bad value for '{key}' = {raw!r} ({exc})") from None

    def check_keys(section, allowed):
        for key in parser[section]:
            if key not in allowed:
                raise ConfigError(f"{where(section, key)}: unknown key '{key}' in section [{section}]")

    def floats(raw):
        return tuple(float(x) for x in raw.replace(",", " ").split())

    for name in parser.sections():
        if name not in ("kernel", "experiment", "datum") and not name.startswith("test_function."):
            raise ConfigError(f"{where(name)}: unknown section [{name}]")
    for name in ("kernel", "experiment", "datum"):
        if name not in parser:
            raise ConfigError(f"{source}: missing section [{name}]")

    variant = get("kernel", "variant", str)
    variant = VARIANT_ALIASES.get(variant, variant)
    if variant not in KERNEL_KEYS:
        raise ConfigError(f"{where('kernel', 'variant')}: unknown kernel variant {variant!r}")
    check_keys("kernel", KERNEL_KEYS[variant])
    record = {"variant": variant}
    if variant == "pure_power":
        record["s"] = get("kernel", "s", float)
    elif variant == "exponential":
        record["rate"] = get("kernel", "rate", float)
    elif variant == "table":
        record["values"] = list(get("kernel", "values", floats))
        record["declared_class"] = get("kernel", "declared_class", float, math.inf)
    try:
        spec = ks.spec_from_dict(record)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where('kernel')}: {exc}") from None
    eval_cutoff = get("kernel", "eval_cutoff", int, ks.DEFAULT_EVAL_CUTOFF)

    check_keys("experiment", EXPERIMENT_KEYS)
    for key in REQUIRED_EXPERIMENT:
        get("experiment", key, str)

    def datum(section):
        check_keys(section, DATUM_KEYS)
        try:
            return DatumSpec(
                kind=get(section, "type", str, "gaussian"),
                width=get(section, "width", float, 1.0),
                center=get(section, "center", float, 0.0),
                amplitude=get(section, "amplitude", float, 1.0),
                wavenumber=get(section, "wavenumber", float, 0.0),
                base=get(section, "base", str, ""),
                path=get(section, "path", str, ""),
            )
        except ConfigError as exc:
            raise ConfigError(f"{where(section)}: {exc}") from None

    tests = sorted((s for s in parser.sections() if s.startswith("test_function.")), key=_test_order)
    try:
        return ExperimentConfig(
            kernel=spec,
            h_ladder=get("experiment", "h_ladder", floats),
            box_length=get("experiment", "box_length", float),
            datum=datum("datum"),
            sign=get("experiment", "sign", str, "defocusing"),
            t_final=get("experiment", "t_final", float),
            dt=get("experiment", "dt", float),
            test_functions=tuple(datum(s) for s in tests),
            seed=get("experiment", "seed", int, 0),
            output_dir=get("experiment", "output_dir", str, DEFAULT_OUTPUT_DIR),
            eval_cutoff=eval_cutoff,
            scheme=get("experiment", "scheme", str, "strang"),
            sample_interval=get("experiment", "sample_interval", float, 0.05),
            refine=get("experiment", "refine", int, 8),
            dt_ref_factor=get("experiment", "dt_ref_factor", int, 10),
        )
    except ValueError as exc:
        raise ConfigError(f"{where('experiment', getattr(exc, 'key', None))}: {exc}") from None


def _test_order(section: str):
    suffix = section.split(".", 1)[1]
    return (0, int(suffix), "") if suffix.isdigit() else (1, 0, suffix)


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config_text(path.read_text(), str(path))


def _fmt(x: float) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def _datum_lines(d: DatumSpec) -> list:
    out = [f"type = {d.kind}"]
    if d.kind == "modulated":
        out.append(f"base = {d.base}")
    if d.kind == "file":
        out.append(f"path = {d.path}")
    else:
        out += [f"width = {_fmt(d.width)}", f"center = {_fmt(d.center)}", f"amplitude = {_fmt(d.amplitude)}"]
    if d.wavenumber:
        out.append(f"wavenumber = {_fmt(d.wavenumber)}")
    return out


def emit_config(cfg: ExperimentConfig) -> str:
    """Normalized INI text; parse_config_text(emit_config(c)) == c."""
    rec = ks.spec_to_dict(cfg.kernel)
    lines = ["[kernel]", f"variant = {rec['variant']}"]
    if "s" in rec:
        lines.append(f"s = {_fmt(rec['s'])}")
    if "rate" in rec:
        lines.append(f"rate = {_fmt(rec['rate'])}")
    if "values" in rec:
        lines.append("values = " + ", ".join(_fmt(float(v)) for v in rec["values"]))
        lines.append(f"declared_class = {_fmt(float(cfg.kernel.declared_class))}")
    lines.append(f"eval_cutoff = {cfg.eval_cutoff}")
    lines += [
        "",
        "[experiment]",
        "h_ladder = " + ", ".join(_fmt(h) for h in cfg.h_ladder),
        f"box_length = {_fmt(cfg.box_length)}",
        f"sign = {cfg.sign}",
        f"t_final = {_fmt(cfg.t_final)}",
        f"dt = {_fmt(cfg.dt)}",
        f"sample_interval = {_fmt(cfg.sample_interval)}",
        f"scheme = {cfg.scheme}",
        f"refine = {cfg.refine}",
        f"dt_ref_factor = {cfg.dt_ref_factor}",
        f"seed = {cfg.seed}",
        f"output_dir = {cfg.output_dir}",
        "",
        "[datum]",
        *_datum_lines(cfg.datum),
    ]
    for i, t in enumerate(cfg.test_functions, 1):
        lines += ["", f"[test_function.{i}]", *_datum_lines(t)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# continuum-limit experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    h: float
    N: int
    t: float
    l2_error: float
    lattice_l2_error: float
    weak_pairing_errors: tuple
    h_alpha_norm: float
    mass_drift: float
    energy_drift: float


@dataclass
class LimitReport:
    config: ExperimentConfig
    rows: list
    alpha: float
    c: float
    final_l2: list = field(default_factory=list)
    final_lattice_l2: list = field(default_factory=list)
    final_pairings: list = field(default_factory=list)
    sup_h_alpha: list = field(default_factory=list)
    initial_l2: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def h_ladder(self) -> tuple:
        return self.config.h_ladder

    def column_monotone(self, values) -> bool:
        return strictly_decreasing(values)

    @property
    def h_alpha_spread(self) -> float:
        v = np.asarray(self.sup_h_alpha)
        return float(v.max() / np.median(v))

    def summary_text(self) -> str:
        cfg = self.config
        out = [
            f"continuum-limit run: kernel {kernel_label(ks.build_kernel(cfg.kernel))}, alpha = {self.alpha:g}, c = {self.c:.10g}",
            f"datum {cfg.datum}, sign {cfg.sign}, T = {cfg.t_final:g}, dt = {cfg.dt:g}, L = {cfg.box_length:g}",
            f"{'h':>10s} {'l2(T)':>12s} {'lattice(T)':>12s} {'sup H^a':>10s} " + " ".join(f"{'pair' + str(i + 1):>12s}" for i in range(len(cfg.test_functions))),
        ]
        for i, h in enumerate(cfg.h_ladder):
            pair = " ".join(f"{p:12.4e}" for p in self.final_pairings[i])
            out.append(f"{h:10.6g} {self.final_l2[i]:12.4e} {self.final_lattice_l2[i]:12.4e} {self.sup_h_alpha[i]:10.5g} {pair}")
        for name, s in self.slopes.items():
            out.append(f"fitted slope {name}: {s:.3f}")
        out.append(f"final/initial l2 error: {self.final_l2[-1] / self.final_l2[0]:.4f}")
        out.append(f"sup H^alpha max/median over ladder: {self.h_alpha_spread:.4f}")
        out += [f"WARNING: {f}" for f in self.flags] or ["all error columns strictly decreasing"]
        return "\n".join(out) + "\n"


def _sample_steps(cfg: ExperimentConfig) -> int:
    return int(round(cfg.sample_interval / cfg.dt))


def continuum_reference(cfg: ExperimentConfig, alpha: float, c: float, grid: PeriodicLattice) -> Trajectory:
    dt_ref = cfg.dt / cfg.dt_ref_factor
    ev = EvolutionConfig(dt_ref, cfg.t_final, cfg.sign, cfg.scheme, record_every=_sample_steps(cfg) * cfg.dt_ref_factor)
    return evolve_continuum(cfg.datum.on_grid(grid), alpha, c, ev)


def _discrete_member(cfg, kernel, h, grid, datum_fine, alpha):
    lat = PeriodicLattice.from_length(cfg.box_length, h)
    if cfg.datum.kind == "file":
        # resampled file data are trigonometric polynomials: exact cell averages
        v_h = discretize(datum_fine, lat, method="spectral")
    else:
        v_h = discretize(cfg.datum, lat)
    ev = EvolutionConfig(cfg.dt, cfg.t_final, cfg.sign, cfg.scheme, record_every=_sample_steps(cfg))
    try:
        tr = evolve_discrete(v_h, kernel, ev)
    except BlowUpError as exc:
        raise ExperimentError(f"h = {h:g}: {exc}") from exc
    return lat, tr


def run_continuum_limit(cfg: ExperimentConfig, threads: int = 1) -> LimitReport:
    kernel = ks.build_kernel(cfg.kernel, cfg.eval_cutoff)
    sc = ks.scaling_class(kernel)
    alpha, c = sc.alpha, ks.limit_constant_c(kernel)
    grid = PeriodicLattice.from_length(cfg.box_length, cfg.h_ref)
    datum_fine = cfg.datum.on_grid(grid)
    try:
        continuum_norm(datum_fine)  # aliasing guard on the reference grid
    except AliasingError as exc:
        raise ExperimentError(f"datum is not resolved (or not periodic) on the reference grid h = {grid.h:g}: {exc}") from None
    tests = [t.on_grid(grid) for t in cfg.test_functions]

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        ref_job = pool.submit(continuum_reference, cfg, alpha, c, grid)
        jobs = [pool.submit(_discrete_member, cfg, kernel, h, grid, datum_fine, alpha) for h in cfg.h_ladder]
        ref = ref_job.result()
        members = [j.result() for j in jobs]

    report = LimitReport(cfg, [], alpha, c)
    for h, (lat, tr) in zip(cfg.h_ladder, members):
        if len(tr.times) != len(ref.times) or not np.allclose(tr.times, ref.times, rtol=0, atol=1e-9):
            raise ExperimentError("sample times of lattice and reference runs do not align")
        m0, e0 = tr.mass_series[0], tr.energy_series[0]
        sup_norm = 0.0
        for i, t in enumerate(tr.times):
            u_h, u = tr.states[i], ref.states[i]
            diff = p_linear(u_h, grid) - u
            l2 = continuum_norm(diff, check_band=False)
            lattice_err = discrete_norm(u_h - discretize(u, lat, method="spectral"), "L2")
            pairs = tuple(abs(continuum_inner(w, diff)) for w in tests)
            h_alpha = interpolant_norm(u_h, alpha)
            sup_norm = max(sup_norm, h_alpha)
            report.rows.append(
                ReportRow(
                    h, lat.n_sites, float(t), l2, lattice_err, pairs, h_alpha,
                    abs(tr.mass_series[i] - m0) / m0 if m0 else 0.0,
                    abs(tr.energy_series[i] - e0) / abs(e0) if e0 else abs(tr.energy_series[i]),
                )
            )
        first = next(r for r in report.rows if r.h == h)
        last = report.rows[-1]
        report.initial_l2.append(first.l2_error)
        report.final_l2.append(last.l2_error)
        report.final_lattice_l2.append(last.lattice_l2_error)
        report.final_pairings.append(last.weak_pairing_errors)
        report.sup_h_alpha.append(sup_norm)

    _summarize(report)
    return report


def _summarize(report: LimitReport) -> None:
    hs = report.h_ladder
    cols = {"l2_error": report.final_l2, "lattice_l2_error": report.final_lattice_l2, "initial_l2_error": report.initial_l2}
    for j in range(len(report.config.test_functions)):
        cols[f"weak_pairing_{j + 1}"] = [p[j] for p in report.final_pairings]
    for name, vals in cols.items():
        if len(hs) >= 2 and all(v > 0 for v in vals):
            report.slopes[name] = fitted_slope(hs, vals)
        if len(hs) >= 2 and not strictly_decreasing(vals):
            report.flags.append(f"{name} column is not strictly decreasing along the ladder: {vals}")
            log.warning("non-monotone error column %s", name)


def rows_to_csv(rows: Sequence[ReportRow], n_tests: int | None = None) -> str:
    if n_tests is None:
        n_tests = len(rows[0].weak_pairing_errors) if rows else 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["h", "N", "t", "l2_error", "lattice_l2_error"]
        + [f"weak_pairing_error_{i + 1}" for i in range(n_tests)]
        + ["h_alpha_norm", "mass_drift", "energy_drift"]
    )
    for r in rows:
        w.writerow(
            [repr(r.h), r.N, repr(r.t), repr(r.l2_error), repr(r.lattice_l2_error)]
            + [repr(p) for p in r.weak_pairing_errors]
            + [repr(r.h_alpha_norm), repr(r.mass_drift), repr(r.energy_drift)]
        )
    return buf.getvalue()


def emit_report(rows: Sequence[ReportRow], path, n_tests: int | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rows_to_csv(rows, n_tests))
    return path


def write_limit_outputs(report: LimitReport, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [emit_report(report.rows, out / "limit_rows.csv", len(report.config.test_functions))]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "slope"])
    for name, s in report.slopes.items():
        w.writerow([name, repr(s)])
    (out / "limit_slopes.csv").write_text(buf.getvalue())
    (out / "limit_summary.txt").write_text(report.summary_text())
    (out / "limit_config.ini").write_text(emit_config(report.config))
    return paths + [out / "limit_slopes.csv", out / "limit_summary.txt", out / "limit_config.ini"]


def reference_sensitivity(cfg: ExperimentConfig, threads: int = 1) -> float:
    """Largest relative change of the final l2 errors when the reference grid is refined twice as far."""
    base = run_continuum_limit(cfg, threads)
    fine = run_continuum_limit(replace(cfg, refine=2 * cfg.refine), threads)
    return float(max(abs(a - b) / b for a, b in zip(base.final_l2, fine.final_l2)))


# ---------------------------------------------------------------------------
# check suite
# ---------------------------------------------------------------------------

DEFAULT_SUITE = (ks.PurePower(0.75), ks.PurePower(1.0), ks.PurePower(1.5), ks.NearestNeighbor())


def kernel_checks(spec: ks.KernelSpec, seed: int = 0, eval_cutoff: int = ks.DEFAULT_EVAL_CUTOFF) -> list:
    kernel = ks.build_kernel(spec, eval_cutoff)
    reports = [check_symbol_asymptotics(kernel)]
    if ks.scaling_class(kernel).regime == ks.LOG:
        reports.append(check_log_regime(kernel))
    reports += [
        check_multiplier_equivalence(kernel),
        check_operator_limit(kernel),
        check_integration_by_parts(kernel, seed=seed),
        check_lattice_identities(kernel, seed=seed),
        check_conservation(kernel),
    ]
    reports += check_uniform_inequalities(kernel_inequalities(kernel), seed=seed, kernel=kernel)
    return reports


def lattice_checks(seed: int = 0) -> list:
    return check_uniform_inequalities(lattice_inequalities(), seed=seed) + check_discretization_bound(seed=seed)


@dataclass
class SuiteResult:
    reports: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def summary_text(self) -> str:
        n_fail = sum(not r.passed for r in self.reports)
        lines = [r.summary() for r in self.reports]
        lines.append(f"{len(self.reports) - n_fail}/{len(self.reports)} checks passed")
        return "\n".join(lines) + "\n"


def _check_job(job):
    kind, spec, seed = job
    try:
        return kernel_checks(spec, seed) if kind == "kernel" else lattice_checks(seed)
    except Exception as exc:  # a crashing check becomes a failed record
        label = kernel_label(ks.build_kernel(spec)) if spec is not None else ""
        return [CheckReport("error", [], [], "fail", 0.0, label, f"{type(exc).__name__}: {exc}")]


def run_check_suite(kernel_specs: Sequence[ks.KernelSpec] = DEFAULT_SUITE, seed: int = 0, threads: int = 1) -> SuiteResult:
    if not kernel_specs:
        return SuiteResult([])
    jobs = [("kernel", spec, seed) for spec in kernel_specs] + [("lattice", None, seed)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(_check_job, jobs))
    return SuiteResult([r for group in results for r in group])


def reports_to_csv(reports: Sequence[CheckReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kernel", "check", "verdict", "tolerance", "h_ladder", "measured", "detail"])
    for r in reports:
        w.writerow(
            [
                r.kernel,
                r.name,
                r.verdict,
                repr(float(r.tolerance)),
                ";".join(repr(float(h)) for h in r.h_ladder),
                ";".join(repr(float(m)) for m in r.measured),
                r.detail,
            ]
        )
    return buf.getvalue()


def write_suite_outputs(result: SuiteResult, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "checks.csv").write_text(reports_to_csv(result.reports))
    (out / "checks_summary.txt").write_text(result.summary_text())
    return [out / "checks.csv", out / "checks_summary.txt"]


# ---------------------------------------------------------------------------
# symbol tabulation
# ---------------------------------------------------------------------------


def symbol_table(spec: ks.KernelSpec, j_min: int = 1, j_max: int = 20, eval_cutoff: int = ks.DEFAULT_EVAL_CUTOFF) -> str:
    kernel = ks.build_kernel(spec, eval_cutoff)
    sc = ks.scaling_class(kernel)
    c = ks.limit_constant_c(kernel)
    k = 2.0 ** -np.arange(j_min, j_max + 1, dtype=float)
    w = ks.omega(kernel, k)
    d = ks.delta(sc, k)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["kernel", "regime", "alpha", "c", "k", "omega", "delta", "ratio"])
    label = kernel_label(kernel)
    for ki, wi, di in zip(k, w, d):
        wr.writerow([label, sc.regime, repr(sc.alpha), repr(c), repr(float(ki)), repr(float(wi)), repr(float(di)), repr(float(wi / di))])
    return buf.getvalue()


def resolve_output_dir(cli_out: str | None, config_out: str | None = None) -> Path:
    """--out beats the environment variable, which beats the config file."""
    if cli_out:
        return Path(cli_out)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    return Path(config_out or DEFAULT_OUTPUT_DIR)
