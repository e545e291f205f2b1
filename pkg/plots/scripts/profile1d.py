#!/usr/bin/env python3
"""Render a 1D snapshot CSV as a line-profile PNG.

Usage: profile1d.py SNAPSHOT OUTPUT [--variables s,c1,c2]

Without --variables, saturation and every concentration column are
plotted together.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import polyplot


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("snapshot", help="snapshot CSV path")
    parser.add_argument("output", help="output PNG path")
    parser.add_argument("--variables", default=None,
                        help="comma-separated column names (default: "
                             "s and all concentrations)")
    args = parser.parse_args(argv)
    try:
        table = polyplot.SnapshotTable(args.snapshot)
        if args.variables is None:
            variables = ["s"] + table.species
        else:
            variables = [v.strip() for v in args.variables.split(",")
                         if v.strip()]
        out = polyplot.plot_profile_1d(table, variables, args.output)
    except polyplot.SnapshotError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
