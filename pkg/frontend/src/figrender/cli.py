"""Command-line entry point: render --spec plot.json"""

from __future__ import annotations

import argparse
import sys

from .render import InputDataError, PlotSpec, PlotSpecError, render

EXIT_BAD_INPUT = 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render one figure from a JSON plot spec describing "
                    "kickedspin CSV outputs.",
    )
    parser.add_argument("--spec", required=True, help="path to the JSON plot spec")
    args = parser.parse_args(argv)
    try:
        spec = PlotSpec.from_file(args.spec)
        render(spec)
    except (PlotSpecError, InputDataError) as exc:
        print(f"render: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    print(f"wrote {spec.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
