#!/usr/bin/env python3
"""Render one column of a 2D snapshot CSV as a heatmap PNG.

Usage: heatmap2d.py SNAPSHOT OUTPUT [--variable s]
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
    parser.add_argument("--variable", default="s",
                        help="column to render (default: s)")
    args = parser.parse_args(argv)
    try:
        out = polyplot.plot_heatmap_2d(args.snapshot, args.variable,
                                       args.output)
    except polyplot.SnapshotError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
