"""CLI: plot --kind <figure_kind> --in <csv...> --out <img>."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURES, render
from .schema import SchemaError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plot", description="Render scan CSVs into figure-style images")
    parser.add_argument("--kind", required=True, choices=sorted(FIGURES))
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV file(s) in the documented schema")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--semianalytic",
                        help="overlay table for fig4_large_tau")
    parser.add_argument("--constant", type=float,
                        help="overlay constant for figS6_n2")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kwargs = {}
    if args.kind == "fig4_large_tau" and args.semianalytic:
        kwargs["semianalytic"] = args.semianalytic
    if args.kind == "figS6_n2" and args.constant is not None:
        kwargs["constant"] = args.constant
    try:
        render(args.kind, args.inputs, args.out, **kwargs)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
