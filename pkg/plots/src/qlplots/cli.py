"""Command line entry points for rendering figures from experiment files.

Exit codes: 0 on success, 1 when an input file is unreadable or malformed,
2 for bad flags.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")

from .figures import FigureSpec, render
from .readers import FileFormatError


class UsageError(Exception):
    """Bad flags; maps to exit code 2."""


def cmd_triptych(args) -> int:
    grids = args.grid or []
    masks = args.mask or []
    if not grids or len(grids) != len(masks):
        raise UsageError("--grid and --mask must be given the same number of"
                         " times, at least once each")
    inputs = tuple(p for pair in zip(grids, masks) for p in pair)
    render(FigureSpec(kind="triptych", inputs=inputs, output=args.out))
    print(f"wrote {args.out}")
    return 0


def cmd_trajectories(args) -> int:
    style = {}
    if args.crop is not None:
        low, high = args.crop
        if not high > low:
            raise UsageError("--crop bounds must satisfy LOW < HIGH")
        style["crop"] = (low, high)
    render(FigureSpec(kind="trajectories", inputs=(args.records, args.grid),
                      output=args.out, style=style))
    print(f"wrote {args.out}")
    return 0


def cmd_success(args) -> int:
    kind = "boxplot" if args.mode == "best" else "last-epoch"
    render(FigureSpec(kind=kind, inputs=(args.summary,), output=args.out))
    print(f"wrote {args.out}")
    return 0


def cmd_quantiles(args) -> int:
    grids = args.grid or []
    if len(grids) < 2:
        raise UsageError("--grid must be given at least twice")
    levels = tuple(args.levels) if args.levels else (0.0, 0.25, 0.5, 0.75, 1.0)
    for level in levels:
        if not 0.0 <= level <= 1.0:
            raise UsageError(f"quantile levels must lie in [0, 1], got {level}")
    render(FigureSpec(kind="quantiles", inputs=tuple(grids), output=args.out,
                      style={"levels": levels}))
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlplots",
        description="Render figures from landscape grid, mask, record, and"
                    " summary files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("triptych",
                       help="loss, gradient magnitude, and mask heatmap rows")
    p.add_argument("--grid", action="append", metavar="FILE",
                   help="grid file; repeat for more rows")
    p.add_argument("--mask", action="append", metavar="FILE",
                   help="mask file paired with the --grid at the same position")
    p.add_argument("--out", required=True, help="output image path")
    p.set_defaults(func=cmd_triptych)

    p = sub.add_parser("trajectories",
                       help="optimization paths over the loss heatmap")
    p.add_argument("--records", required=True, help="per-iteration records CSV")
    p.add_argument("--grid", required=True, help="background grid file")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--crop", nargs=2, type=float, metavar=("LOW", "HIGH"),
                   help="restrict both parameter axes to this window")
    p.set_defaults(func=cmd_trajectories)

    p = sub.add_parser("success",
                       help="loss distributions per optimizer configuration")
    p.add_argument("--summary", required=True, help="experiment summary JSON")
    p.add_argument("--mode", choices=("best", "last"), default="best",
                   help="plot best-seen or final-iteration losses")
    p.add_argument("--out", required=True, help="output image path")
    p.set_defaults(func=cmd_success)

    p = sub.add_parser("quantiles",
                       help="gradient magnitude quantiles across resolutions")
    p.add_argument("--grid", action="append", metavar="FILE",
                   help="grid file; repeat for each resolution")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--levels", nargs="+", type=float,
                   help="quantile levels to evaluate")
    p.set_defaults(func=cmd_quantiles)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> int:
    return main()
