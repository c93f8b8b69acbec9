"""Command line entry point: wsnplot <aggregate.csv> --out figs/"""

import argparse
import sys

from .figures import SchemaError, plot_sweep


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wsnplot",
        description="Render sweep figures (SVG and PNG) from an aggregate CSV.",
    )
    parser.add_argument("aggregate_csv", help="aggregate CSV produced by the simulator")
    parser.add_argument("--out", default="figs", help="output directory (default figs)")
    parser.add_argument(
        "--nodes",
        type=int,
        default=300,
        help="population size used to express k as a percentage (default 300)",
    )
    args = parser.parse_args(argv)
    if args.nodes < 1:
        print("--nodes must be positive", file=sys.stderr)
        return 1
    try:
        written = plot_sweep(args.aggregate_csv, args.out, node_count=args.nodes)
    except (OSError, SchemaError) as exc:
        print(f"wsnplot: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(written)} files to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
