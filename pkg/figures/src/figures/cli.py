"""render: draw one figure kind from simulator CSV outputs.

    render <kind> --in PATH [PATH ...] --out FILE [--title T] [--dump-points]

Kinds: hist, heatmap, scatter, session_panels, line, surface. The inputs are
the simulator CLI's files (hist.csv, surface.csv, lemma3.csv, trace_K.csv,
inventory_vs_psi.csv); columns are matched by name and a mismatch exits
nonzero naming the missing column. --dump-points echoes the plotted fields to
stdout exactly as they appear in the input files.
"""

import argparse
import os
import sys

from .kinds import KINDS
from .tables import SchemaError, load_table


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="render", description=__doc__)
    parser.add_argument("kind", choices=sorted(KINDS))
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="PATH", help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output image file")
    parser.add_argument("--title", default=None)
    parser.add_argument("--dump-points", action="store_true",
                        help="echo the plotted input fields to stdout")
    return parser


def _dump(used) -> str:
    lines = []
    for table, columns in used:
        lines.append(f"file: {table.path}")
        lines.append("columns: " + ",".join(columns))
        raws = [table.raw(c) for c in columns]
        lines.extend(",".join(vals) for vals in zip(*raws))
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        tables = [load_table(p) for p in args.inputs]
        used = KINDS[args.kind](tables, args.out, title=args.title)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not os.path.exists(args.out):
        print(f"error: {args.out} was not written", file=sys.stderr)
        return 2
    if args.dump_points:
        sys.stdout.write(_dump(used))
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
