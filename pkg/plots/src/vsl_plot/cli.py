"""vsl-plot: render figures from vorticity stability lab outputs.

  vsl-plot timeseries <report.json> -o out.png
  vsl-plot field <snapshot.vsf> -o out.png
  vsl-plot sweep <report.json> [<report.json> ...] -o out.png
"""

from __future__ import annotations

import argparse
import sys

from .figures import plot_field, plot_sweep, plot_timeseries


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vsl-plot", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("timeseries", help="deviation norms vs time with bound overlays")
    p.add_argument("report")
    p.add_argument("-o", "--out", required=True)

    p = sub.add_parser("field", help="heatmap of a VSF1 snapshot")
    p.add_argument("snapshot")
    p.add_argument("-o", "--out", required=True)

    p = sub.add_parser("sweep", help="sup deviation vs perturbation size, log-log")
    p.add_argument("reports", nargs="+")
    p.add_argument("-o", "--out", required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "timeseries":
        out = plot_timeseries(args.report, args.out)
    elif args.command == "field":
        out = plot_field(args.snapshot, args.out)
    else:
        out = plot_sweep(args.reports, args.out)
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
