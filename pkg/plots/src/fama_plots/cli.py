"""plots command line: render recipe figures from result CSVs."""

import argparse
import sys

from .figures import FIGURES
from .io import SchemaError
from .render import render

__all__ = ["main"]


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="plots", description="Render ofdm-fama result CSVs to SVG and PNG.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure, or 'all'")
    p.add_argument("recipe", help="recipe figure name, or 'all'")
    p.add_argument("--in", dest="in_dir", required=True,
                   help="directory holding the recipe CSVs")
    p.add_argument("--out", dest="out_dir", required=True,
                   help="directory for the rendered images")
    sub.add_parser("list", help="list renderable figures")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list":
        for name in sorted(FIGURES):
            print(f"{name:22s} {FIGURES[name].title}")
        return 0
    names = sorted(FIGURES) if args.recipe == "all" else [args.recipe]
    status = 0
    for name in names:
        try:
            for path in render(name, args.in_dir, args.out_dir):
                print(path)
        except KeyError as e:
            print(e.args[0], file=sys.stderr)
            return 2
        except SchemaError as e:
            print(str(e), file=sys.stderr)
            status = 2
    return status


if __name__ == "__main__":
    sys.exit(main())
