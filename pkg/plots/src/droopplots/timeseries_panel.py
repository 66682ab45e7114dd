"""Four-panel P/Q/V/f figure from a scenario CSV, with event markers."""

import argparse
import sys

from .csvio import SchemaError
from .figures import FigureKind, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="scenario time-series CSV")
    parser.add_argument("-o", "--output", default="timeseries_panel.png")
    parser.add_argument("--manifest", default=None,
                        help="scenario manifest JSON providing event markers")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        out = render(FigureSpec(inputs=(args.csv,),
                                kind=FigureKind.TIMESERIES_PANEL,
                                output=args.output, manifest=args.manifest,
                                title=args.title))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
