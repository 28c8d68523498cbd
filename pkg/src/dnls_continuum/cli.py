"""Command-line entry point: ``dnls-limit {limit,check,symbol}``."""
from __future__ import annotations

import argparse
import logging
import re
import sys
from dataclasses import replace

from . import harness
from . import kernel as ks

log = logging.getLogger("dnls_continuum")

_KERNEL_TOKEN = re.compile(r"^\s*(\w+)\s*(?:\(\s*([^)]*)\)|:\s*(.*))?\s*$")


def parse_kernel_token(token: str) -> ks.KernelSpec:
    """'PurePower(0.75)', 'pure_power:0.75', 'NearestNeighbor', 'Exponential(1.0)'."""
    m = _KERNEL_TOKEN.match(token)
    if not m:
        raise argparse.ArgumentTypeError(f"cannot parse kernel {token!r}")
    name = harness.VARIANT_ALIASES.get(m.group(1), m.group(1))
    arg = m.group(2) or m.group(3)
    try:
        if name == "pure_power" and arg:
            return ks.PurePower(float(arg))
        if name == "exponential" and arg:
            return ks.Exponential(float(arg))
        if name == "nearest_neighbor" and not arg:
            return ks.NearestNeighbor()
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    raise argparse.ArgumentTypeError(f"cannot parse kernel {token!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI experiment file")
    common.add_argument("--seed", type=int, default=None, help="random seed (overrides the config)")
    common.add_argument("--out", default=None, help="output directory (beats $%s and the config)" % harness.OUTPUT_ENV)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="dnls-limit", description="Lattice-to-continuum NLS experiments and checks.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("limit", parents=[common], help="run a continuum-limit experiment (needs --config)")
    chk = sub.add_parser("check", parents=[common], help="run the verification suite")
    chk.add_argument("--kernel", action="append", type=parse_kernel_token, default=None,
                     help="kernel to check, repeatable; default is the standard four-kernel suite")
    chk.add_argument("--no-kernels", action="store_true", help="run with an empty kernel list")
    sym = sub.add_parser("symbol", parents=[common], help="tabulate omega, delta and c for a kernel")
    sym.add_argument("--kernel", action="append", type=parse_kernel_token, default=None)
    sym.add_argument("--j-max", type=int, default=20, help="finest k = 2^-j_max")
    return p


def _config_kernels(args):
    if args.config:
        cfg = harness.parse_config(args.config)
        return cfg, [cfg.kernel]
    return None, None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except (harness.ConfigError, harness.ExperimentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    cfg, cfg_kernels = _config_kernels(args)
    out = harness.resolve_output_dir(args.out, cfg.output_dir if cfg else None)

    if args.command == "limit":
        if cfg is None:
            print("error: limit needs --config", file=sys.stderr)
            return 2
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        report = harness.run_continuum_limit(cfg, threads=args.threads)
        paths = harness.write_limit_outputs(report, out)
        sys.stdout.write(report.summary_text())
        print("wrote " + ", ".join(str(p) for p in paths))
        return 1 if report.flags else 0

    if args.command == "check":
        if args.no_kernels:
            specs = []
        else:
            specs = args.kernel or cfg_kernels or list(harness.DEFAULT_SUITE)
        seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
        result = harness.run_check_suite(specs, seed=seed, threads=args.threads)
        harness.write_suite_outputs(result, out)
        sys.stdout.write(result.summary_text())
        return result.exit_code

    specs = args.kernel or cfg_kernels or list(harness.DEFAULT_SUITE)
    out.mkdir(parents=True, exist_ok=True)
    tables = [harness.symbol_table(s, j_max=args.j_max) for s in specs]
    # one header for the concatenated table
    text = tables[0] + "".join(t.split("\n", 1)[1] for t in tables[1:])
    (out / "symbol.csv").write_text(text)
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
