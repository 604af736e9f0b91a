"""Command-line interface.

Subcommands: mlce, spectrum, band, semianalytic, scan, fit.  Exit codes:
0 ok, 1 configuration error, 2 the scan finished with some failed rows,
3 fatal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..band import band_table
from ..core import INITIAL_KINDS, COUPLING_MODES
from ..memoryless import semi_analytic_mlce
from .config import ConfigError, PRESET_NAMES, load_config, preset_config, ExperimentConfig
from .fits import fit_linear, fit_loglog
from .runner import EXIT_CONFIG, EXIT_FATAL, EXIT_OK, EXIT_PARTIAL, fmt, read_rows, run


def _add_common(sub):
    sub.add_argument("--out", default="out", help="output directory")
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--seed-base", type=int, default=0,
                     help="offset added to every seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcs-trotter",
        description="Split-step pseudospin dynamics and chaos quantifiers",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (("mlce", "maximal Lyapunov exponent scan"),
                            ("spectrum", "Lyapunov spectrum scan")):
        sub = subs.add_parser(name, help=help_text)
        sub.add_argument("--n", type=int, nargs="+", default=[32])
        sub.add_argument("--tau", type=float, nargs="+", required=True)
        group = sub.add_mutually_exclusive_group(required=True)
        group.add_argument("--steps", type=int)
        group.add_argument("--t-end", type=float)
        sub.add_argument("--kind", default="random_sphere", choices=INITIAL_KINDS)
        sub.add_argument("--jz", type=float, nargs="+", default=[0.0])
        sub.add_argument("--seeds", type=int, nargs="+", default=list(range(8)))
        sub.add_argument("--coupling-mode", default="standard", choices=COUPLING_MODES)
        sub.add_argument("--renorm-every", type=int, default=1)
        sub.add_argument("--transient-fraction", type=float, default=0.0)
        if name == "spectrum":
            sub.add_argument("--p", default="N",
                             help="number of exponents, or N for the first N")
        _add_common(sub)

    sub = subs.add_parser("band", help="band extrema table over a J^z grid")
    sub.add_argument("--n", type=int, nargs="+", default=[32])
    sub.add_argument("--jz", type=float, nargs="+", required=True)
    _add_common(sub)

    sub = subs.add_parser("semianalytic", help="Jacobian-ensemble memoryless exponent")
    sub.add_argument("--n", type=int, nargs="+", default=[2])
    sub.add_argument("--tau", type=float, nargs="+", required=True)
    sub.add_argument("--samples", type=int, default=100_000)
    _add_common(sub)

    sub = subs.add_parser("scan", help="run a preset or a config file")
    sub.add_argument("--preset", choices=PRESET_NAMES)
    sub.add_argument("--config", help="YAML config document")
    _add_common(sub)

    sub = subs.add_parser("fit", help="straight-line fit over CSV columns")
    sub.add_argument("--in", dest="input", required=True)
    sub.add_argument("--x", required=True)
    sub.add_argument("--y", required=True)
    sub.add_argument("--loglog", action="store_true",
                     help="fit log10 y against log10 x")
    return parser


def _scan_config(args) -> ExperimentConfig:
    overrides = {}
    if args.command in ("mlce", "spectrum"):
        overrides = dict(
            n_spins=tuple(args.n),
            tau_grid=tuple(args.tau),
            j_z0=tuple(args.jz),
            seeds=tuple(s + args.seed_base for s in args.seeds),
            initial_kind=args.kind,
            coupling_mode=args.coupling_mode,
            renorm_every=args.renorm_every,
            transient_fraction=args.transient_fraction,
            p="N" if args.command == "spectrum" and args.p == "N"
              else (int(args.p) if args.command == "spectrum" else 0),
        )
        if args.steps is not None:
            overrides["n_steps"] = args.steps
        else:
            overrides["t_end"] = args.t_end
        cfg = ExperimentConfig(preset="custom", **overrides)
        cfg.validate()
        return cfg
    if args.config:
        return load_config(args.config, seed_base=args.seed_base)
    if args.preset:
        return preset_config(args.preset, seed_base=args.seed_base)
    raise ConfigError("scan needs --preset or --config")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("mlce", "spectrum", "scan"):
            cfg = _scan_config(args)
            _, failures = run(cfg, args.out, threads=args.threads)
            if failures:
                print(f"{failures} grid points failed", file=sys.stderr)
                return EXIT_PARTIAL
            return EXIT_OK

        if args.command == "band":
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            for n in args.n:
                path = out / f"band_N{n}.csv"
                with open(path, "w") as fh:
                    fh.write("j_z0,e_max,e_min_numeric,e_min_analytic,mu,delta\n")
                    for row in band_table(n, args.jz):
                        fh.write(",".join(fmt(float(v)) for v in row) + "\n")
            return EXIT_OK

        if args.command == "semianalytic":
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            path = out / "semianalytic.csv"
            with open(path, "w") as fh:
                fh.write("N,tau,lambda1,stderr,n_samples\n")
                for n in args.n:
                    for tau in args.tau:
                        pred = semi_analytic_mlce(tau, n, n_samples=args.samples,
                                                  seed=(args.seed_base, n))
                        fh.write(",".join(fmt(v) for v in
                                          (n, float(tau), pred.lambda1,
                                           pred.stderr, pred.n_samples)) + "\n")
            return EXIT_OK

        if args.command == "fit":
            rows = read_rows(args.input)
            x = np.array([r[args.x] for r in rows], dtype=float)
            y = np.array([r[args.y] for r in rows], dtype=float)
            result = fit_loglog(x, y) if args.loglog else fit_linear(x, y)
            print(json.dumps({
                "slope": result.slope, "intercept": result.intercept,
                "slope_stderr": result.slope_stderr,
                "intercept_stderr": result.intercept_stderr,
                "n_points": result.n_points,
                "masked_points": result.masked_points,
            }))
            return EXIT_OK
        raise ConfigError(f"unknown command {args.command}")
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # anything unexpected is fatal
        print(f"fatal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
