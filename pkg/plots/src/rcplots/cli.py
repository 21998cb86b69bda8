"""Command line: plots <kind> --in PATHS --out IMG [--labels a,b,...]"""

import argparse
import sys

from .rendering import KINDS, FigureSpec, SchemaError, render


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures from benchmark CSV logs."
    )
    parser.add_argument("kind", choices=sorted(KINDS))
    parser.add_argument(
        "--in",
        dest="inputs",
        required=True,
        help="comma-separated CSV paths (multiple series for convergence)",
    )
    parser.add_argument("--out", required=True, help="output image path (.png, .pdf, .svg)")
    parser.add_argument("--labels", default="", help="comma-separated series labels")
    args = parser.parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        inputs=[p for p in args.inputs.split(",") if p],
        out=args.out,
        labels=[s for s in args.labels.split(",") if s],
    )
    try:
        render(spec)
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
