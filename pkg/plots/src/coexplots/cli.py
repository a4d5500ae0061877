"""Batch figure renderer for campaign sample CSVs."""

from __future__ import annotations

import argparse
import sys

from .cdf import METRICS, FigureSpec, plot_cdf


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coexplot",
                                     description="Plot empirical CDFs from campaign samples")
    parser.add_argument("--csv", action="append", required=True,
                        help="sample CSV (repeat for several files)")
    parser.add_argument("--metric", required=True, choices=METRICS)
    parser.add_argument("--group", default=None,
                        help="group-by column (default: 'group' when present, else one curve set)")
    parser.add_argument("--populations", default="UE,UAV",
                        help="comma-separated populations to draw")
    parser.add_argument("--title", default="")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    populations = tuple(p.strip() for p in args.populations.split(",") if p.strip())
    spec = FigureSpec(csv_paths=list(args.csv), metric=args.metric,
                      out_path=args.out, populations=populations,
                      group_key=args.group, title=args.title)
    try:
        curves = plot_cdf(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} ({len(curves)} curves)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
