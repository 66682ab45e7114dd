"""Overlay p_1/q_1 recovery traces from several transition-study CSVs."""

import argparse
import sys

from .csvio import SchemaError
from .figures import FigureKind, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csvs", nargs="+",
                        help="one transition CSV per filter time constant")
    parser.add_argument("-o", "--output", default="transition_overlay.png")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        out = render(FigureSpec(inputs=tuple(args.csvs),
                                kind=FigureKind.TRANSITION_OVERLAY,
                                output=args.output, title=args.title))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
