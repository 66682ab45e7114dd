"""Scatter an eigen-sweep CSV in the complex plane, colored by swept value."""

import argparse
import sys

from .csvio import SchemaError
from .figures import FigureKind, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="sweep CSV (value, re_k, im_k, abscissa)")
    parser.add_argument("-o", "--output", default="eigen_scatter.png")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        out = render(FigureSpec(inputs=(args.csv,), kind=FigureKind.EIGEN_SCATTER,
                                output=args.output, title=args.title))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
