"""Plotting for solver run artifacts: 1D profiles and 2D heatmaps.

Everything here consumes the CLI's on-disk interface only — snapshot
CSVs plus the run manifest sitting next to them — never in-memory
solver state.  Files are opened read-only; rendering the same snapshot
twice produces byte-identical PNGs.
"""

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

_DPI = 150


class SnapshotError(ValueError):
    """A snapshot file violates the documented CSV format."""


class SnapshotTable:
    """One snapshot CSV as named columns, with run-manifest metadata.

    Loading validates the format: every row carries exactly as many
    fields as the header names, and coordinates are monotone — strictly
    increasing cell centers in 1D, a rectangular y-major sweep with
    strictly increasing axes in 2D.  ``manifest`` holds the decoded
    ``manifest.json`` from the snapshot's directory when present.
    """

    def __init__(self, path):
        self.path = Path(path)
        names, data = self._load()
        self.names = names
        self.columns = {n: data[:, i].copy() for i, n in enumerate(names)}
        self.manifest = self._read_manifest()
        if "x_center" in self.columns:
            self.dimension = 1
            x = self.columns["x_center"]
            if not np.all(np.diff(x) > 0.0):
                raise SnapshotError(
                    "%s: cell centers are not strictly increasing" % self.path)
            self.nx = x.size
            self.ny = None
        elif "x" in self.columns and "y" in self.columns:
            self.dimension = 2
            self._shape_2d()
        else:
            raise SnapshotError(
                "%s: no coordinate columns (expected x_center, or x and y)"
                % self.path)

    def _load(self):
        with open(self.path, "r", encoding="utf-8") as f:
            header = f.readline().strip()
            if not header:
                raise SnapshotError("%s: empty file" % self.path)
            names = [n.strip() for n in header.split(",")]
            rows = []
            for lineno, line in enumerate(f, start=2):
                line = line.strip()
                if not line:
                    continue
                fields = line.split(",")
                if len(fields) != len(names):
                    raise SnapshotError(
                        "%s:%d: row has %d fields, header has %d columns"
                        % (self.path, lineno, len(fields), len(names)))
                try:
                    rows.append([float(v) for v in fields])
                except ValueError:
                    raise SnapshotError(
                        "%s:%d: non-numeric value" % (self.path, lineno))
        if not rows:
            raise SnapshotError("%s: no data rows" % self.path)
        return names, np.asarray(rows, dtype=float)

    def _read_manifest(self):
        mpath = self.path.parent / "manifest.json"
        if not mpath.exists():
            return None
        with open(mpath, "r", encoding="utf-8") as f:
            return json.load(f)

    def _shape_2d(self):
        x = self.columns["x"]
        y = self.columns["y"]
        wraps = np.flatnonzero(np.diff(x) <= 0.0)
        nx = int(wraps[0]) + 1 if wraps.size else x.size
        if x.size % nx != 0:
            raise SnapshotError(
                "%s: %d rows do not tile a rectangular grid of width %d"
                % (self.path, x.size, nx))
        ny = x.size // nx
        X = x.reshape(ny, nx)
        Y = y.reshape(ny, nx)
        if not (np.all(X == X[:1, :]) and np.all(np.diff(X[0]) > 0.0)):
            raise SnapshotError(
                "%s: x coordinates do not sweep a rectangular grid"
                % self.path)
        if not (np.all(Y == Y[:, :1]) and np.all(np.diff(Y[:, 0]) > 0.0)):
            raise SnapshotError(
                "%s: y coordinates are not monotone across rows" % self.path)
        self.nx = nx
        self.ny = ny
        self.x_axis = X[0].copy()
        self.y_axis = Y[:, 0].copy()

    # -- access --------------------------------------------------------------

    def column(self, name):
        try:
            return self.columns[name]
        except KeyError:
            raise SnapshotError(
                "%s: no column %r; available: %s"
                % (self.path, name, ", ".join(self.names)))

    def grid(self, name):
        """A 2D column as a (ny, nx) array, y growing with row index."""
        if self.dimension != 2:
            raise SnapshotError("%s: not a 2D snapshot" % self.path)
        return self.column(name).reshape(self.ny, self.nx)

    @property
    def species(self):
        """Concentration column names, in header order."""
        return [n for n in self.names
                if n.startswith("c") and n[1:].isdigit()]

    @property
    def time(self):
        """Output time of this snapshot from the manifest, else None."""
        if not self.manifest:
            return None
        for entry in self.manifest.get("snapshots", []):
            for f in entry.get("files", []):
                if Path(f).name == self.path.name:
                    return entry.get("t")
        return None


def _as_table(snapshot):
    return snapshot if isinstance(snapshot, SnapshotTable) \
        else SnapshotTable(snapshot)


def _title(table, fallback):
    t = table.time
    return fallback if t is None else "%s,  t = %g" % (fallback, t)


def plot_profile_1d(snapshot, variables, path):
    """Line plot of 1D snapshot variables against x, written as PNG.

    ``variables`` is a non-empty list of column names; each becomes one
    labeled line.  Returns the output path.
    """
    table = _as_table(snapshot)
    if table.dimension != 1:
        raise SnapshotError("%s: profile plots need a 1D snapshot"
                            % table.path)
    variables = list(variables)
    if not variables:
        raise SnapshotError("no variables to plot")
    x = table.column("x_center")
    series = [(name, table.column(name)) for name in variables]
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=_DPI)
    for name, values in series:
        ax.plot(x, values, linewidth=1.4, label=name)
    ax.set_xlabel("x")
    ax.set_ylabel(", ".join(variables))
    ax.set_title(_title(table, table.path.stem))
    ax.grid(alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, format="png")
    plt.close(fig)
    return Path(path)


def _extent(axis):
    half = 0.5 * (axis[1] - axis[0]) if axis.size > 1 else 0.5
    return float(axis[0] - half), float(axis[-1] + half)


def _draw_heatmap(ax, table, variable):
    arr = table.grid(variable)
    x_lo, x_hi = _extent(table.x_axis)
    y_lo, y_hi = _extent(table.y_axis)
    return ax.imshow(arr, origin="lower", extent=(x_lo, x_hi, y_lo, y_hi),
                     aspect="equal", interpolation="nearest", cmap="viridis")


def plot_heatmap_2d(snapshot, variable, path):
    """Filled heatmap of one 2D snapshot column with a colorbar; PNG."""
    table = _as_table(snapshot)
    if table.dimension != 2:
        raise SnapshotError("%s: heatmaps need a 2D snapshot" % table.path)
    fig, ax = plt.subplots(figsize=(5.8, 4.8), dpi=_DPI)
    im = _draw_heatmap(ax, table, variable)
    fig.colorbar(im, ax=ax, label=variable)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(_title(table, variable))
    fig.tight_layout()
    fig.savefig(path, format="png")
    plt.close(fig)
    return Path(path)


def plot_heatmap_pair(snapshot_a, snapshot_b, variable, path,
                      labels=("a", "b")):
    """Two snapshots of the same variable side by side, shared scale."""
    table_a = _as_table(snapshot_a)
    table_b = _as_table(snapshot_b)
    for table in (table_a, table_b):
        if table.dimension != 2:
            raise SnapshotError("%s: heatmaps need a 2D snapshot"
                                % table.path)
    arrs = [table_a.grid(variable), table_b.grid(variable)]
    vmin = min(float(a.min()) for a in arrs)
    vmax = max(float(a.max()) for a in arrs)
    fig, axes = plt.subplots(1, 2, figsize=(10.4, 4.6), dpi=_DPI)
    for ax, table, label in zip(axes, (table_a, table_b), labels):
        im = _draw_heatmap(ax, table, variable)
        im.set_clim(vmin, vmax)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title(_title(table, label))
    fig.colorbar(im, ax=list(axes), label=variable, fraction=0.046)
    fig.savefig(path, format="png")
    plt.close(fig)
    return Path(path)
