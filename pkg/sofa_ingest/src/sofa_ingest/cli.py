"""Command-line front door.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import sys

from .convert import convert
from .reader import IngestError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


class _Usage(Exception):
    pass


def _build_parser() -> _Parser:
    parser = _Parser(prog="sofa-ingest")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("convert",
                       help="convert SOFA files into an HRC corpus")
    p.add_argument("files", nargs="+", help="one SOFA file per subject")
    p.add_argument("--name", required=True, help="dataset name")
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--swap-receivers", action="store_true",
                   help="map receiver 0 to the right ear instead of left")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        out = convert(args.files, args.name, args.out,
                      swap_receivers=args.swap_receivers)
    except IngestError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    print(f"{args.name}: {len(args.files)} subjects -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
