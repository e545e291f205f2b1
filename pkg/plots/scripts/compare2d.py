#!/usr/bin/env python3
"""Render the same variable from two 2D snapshots side by side.

Usage: compare2d.py SNAPSHOT_A SNAPSHOT_B OUTPUT [--variable s]
                    [--labels with,without]

Both panels share one color scale, so fronts and magnitudes compare
directly (e.g. a polymer flood against its polymer-free twin).
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import polyplot


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("snapshot_a", help="first snapshot CSV path")
    parser.add_argument("snapshot_b", help="second snapshot CSV path")
    parser.add_argument("output", help="output PNG path")
    parser.add_argument("--variable", default="s",
                        help="column to render (default: s)")
    parser.add_argument("--labels", default=None,
                        help="comma-separated pair of panel titles")
    args = parser.parse_args(argv)
    if args.labels is None:
        labels = (Path(args.snapshot_a).stem, Path(args.snapshot_b).stem)
    else:
        parts = [p.strip() for p in args.labels.split(",")]
        if len(parts) != 2:
            print("error: --labels needs exactly two names", file=sys.stderr)
            return 1
        labels = tuple(parts)
    try:
        out = polyplot.plot_heatmap_pair(args.snapshot_a, args.snapshot_b,
                                         args.variable, args.output,
                                         labels=labels)
    except polyplot.SnapshotError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
