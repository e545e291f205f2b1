"""Snapshot, manifest and table writers for run artifacts.

CSV numbers are written at 17 significant digits so identical runs
produce byte-identical files.  The VTK writer emits legacy ASCII
STRUCTURED_POINTS datasets with one SCALARS block per field, with
values sampled at cell centers.
"""

from __future__ import annotations

import json

import numpy as np

_FMT = "%.17g"


def _write_rows(path, header, columns):
    rows = np.column_stack([np.asarray(col, float).reshape(-1)
                            for col in columns])
    np.savetxt(path, rows, fmt=_FMT, delimiter=",",
               header=",".join(header), comments="")


def species_names(m):
    return ["c%d" % (l + 1) for l in range(m)]


def write_snapshot_1d(path, x, s, c):
    """Columns x_center, s, c1..cm; one row per cell."""
    c = np.asarray(c, float)
    header = ["x_center", "s"] + species_names(c.shape[0])
    _write_rows(path, header, [x, s] + list(c))


def write_snapshot_2d(path, grid, s, c, K, p):
    """Columns x, y, s, c1..cm, K, p; rows y-major (y outer, x inner)."""
    c = np.asarray(c, float)
    m = c.shape[0]
    x = (np.arange(grid.nx) + 0.5) * grid.dx
    y = (np.arange(grid.ny) + 0.5) * grid.dy
    X, Y = np.meshgrid(x, y, indexing="ij")
    header = ["x", "y", "s"] + species_names(m) + ["K", "p"]
    columns = [X.T, Y.T, np.asarray(s, float).T]
    columns += [c[l].T for l in range(m)]
    columns += [np.asarray(K, float).T, np.asarray(p, float).T]
    _write_rows(path, header, columns)


def _vtk_scalars(out, name, values):
    out.write("SCALARS %s double 1\n" % name)
    out.write("LOOKUP_TABLE default\n")
    for value in np.asarray(values, float).reshape(-1):
        out.write(_FMT % value)
        out.write("\n")


def write_vtk(path, arrays, nx, ny=1, dx=1.0, dy=1.0):
    """Legacy ASCII STRUCTURED_POINTS file with the given named fields.

    ``arrays`` maps field name to an (nx,) or (nx, ny) array; values are
    written x-fastest as cell-center point data.
    """
    with open(path, "w", encoding="utf-8") as out:
        out.write("# vtk DataFile Version 3.0\n")
        out.write("two-phase polymer flood snapshot\n")
        out.write("ASCII\n")
        out.write("DATASET STRUCTURED_POINTS\n")
        out.write("DIMENSIONS %d %d 1\n" % (nx, ny))
        out.write("ORIGIN %s %s 0\n" % (_FMT % (0.5 * dx), _FMT % (0.5 * dy)))
        out.write("SPACING %s %s 1\n" % (_FMT % dx, _FMT % dy))
        out.write("POINT_DATA %d\n" % (nx * ny))
        for name, values in arrays.items():
            values = np.asarray(values, float)
            # x must vary fastest: transpose the (nx, ny) cell layout
            _vtk_scalars(out, name, values.T if values.ndim == 2 else values)


def write_manifest(path, manifest):
    with open(path, "w", encoding="utf-8") as out:
        json.dump(manifest, out, indent=2, sort_keys=True)
        out.write("\n")


def read_manifest(path):
    with open(path, encoding="utf-8") as inp:
        return json.load(inp)


def convergence_header(m):
    header = ["h", "e_s", "alpha_s"]
    for name in species_names(m):
        header += ["e_%s" % name, "alpha_%s" % name]
    return header


def write_convergence(path, rows, m):
    """Rows of (h, e_s, alpha_s, e_c1, alpha_c1, ...); NaN alpha on the
    coarsest grid."""
    header = convergence_header(m)
    with open(path, "w", encoding="utf-8") as out:
        out.write(",".join(header))
        out.write("\n")
        for row in rows:
            out.write(",".join(_FMT % value for value in row))
            out.write("\n")


def read_convergence(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    return np.atleast_1d(data)
