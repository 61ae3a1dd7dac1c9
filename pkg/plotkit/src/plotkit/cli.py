"""plotkit command line: render report CSVs to figures.

Exit codes: 0 success, 2 input error (missing column errors name the
column on stderr)."""

from __future__ import annotations

import argparse
import sys

from .render import KIND_COLUMNS, ColumnError, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="plotkit",
        description="Render figures from grid-report CSVs; every plotted "
                    "number comes from a CSV cell.")
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("render", help="render one figure from a report CSV")
    sp.add_argument("--kind", required=True, choices=sorted(KIND_COLUMNS))
    sp.add_argument("--in", dest="csv_in", required=True, metavar="CSV")
    sp.add_argument("--out", required=True, metavar="PNG")
    sp.add_argument("--log-x", action=argparse.BooleanOptionalAction,
                    default=None, help="override the kind's x-scale default")
    sp.add_argument("--log-y", action=argparse.BooleanOptionalAction,
                    default=None, help="override the kind's y-scale default")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(args.csv_in, args.kind, args.out,
                          args.log_x, args.log_y)
        notes = render(spec)
    except ColumnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    dropped = {k: v for k, v in notes["dropped"].items() if v}
    if dropped:
        print("note: dropped n/a or non-finite cells: "
              + ", ".join(f"{k} x{v}" for k, v in sorted(dropped.items())))
    print(f"wrote {args.out}: {notes['kind']}, {notes['points']} point(s) "
          f"from {notes['rows']} row(s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
