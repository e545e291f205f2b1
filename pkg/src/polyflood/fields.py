"""Reproducible permeability fields for the heterogeneous test media.

Two random media are provided alongside constant fields: a continuous
medium built from clipped Gaussian bumps and a hard-rock medium of
near-impermeable disks in a uniform background.  Fields are sampled at
cell centers of a regular grid on the unit square and are fully
determined by their spec (kind, parameters, seed), so a run can be
reproduced or replayed from a stored CSV.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np

_log = logging.getLogger(__name__)

CONSTANT = "constant"
GAUSSIAN_BUMPS = "gaussian-bumps"
HARD_ROCK = "hard-rock"

_KINDS = (CONSTANT, GAUSSIAN_BUMPS, HARD_ROCK)


@dataclasses.dataclass(frozen=True)
class FieldSpec:
    """Parameters that fully determine a permeability field.

    kind: one of "constant", "gaussian-bumps", "hard-rock".
    n_sites: number of random bump/rock locations.
    seed: RNG seed; identical specs give bitwise-identical fields.
    value: the constant-field value.
    bump_width: length scale of each Gaussian bump.
    clip_lo, clip_hi: clip bounds applied to the bump sum.
    rock_radius: radius of each hard rock.
    rock_value, background_value: permeability inside and outside rocks.
    """

    kind: str = CONSTANT
    n_sites: int = 100
    seed: int = 0
    value: float = 1.0
    bump_width: float = 0.05
    clip_lo: float = 0.5
    clip_hi: float = 1.5
    rock_radius: float = 0.0015
    rock_value: float = 0.01
    background_value: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError("unknown field kind %r" % (self.kind,))
        if self.n_sites < 0:
            raise ValueError("site count must be nonnegative")
        if self.kind == GAUSSIAN_BUMPS:
            if self.bump_width <= 0.0:
                raise ValueError("bump width must be positive")
            if self.clip_lo > self.clip_hi:
                raise ValueError("clip bounds must be ordered")
        if self.kind == HARD_ROCK and self.rock_radius <= 0.0:
            raise ValueError("rock radius must be positive")
        if self.kind == CONSTANT and self.value <= 0.0:
            raise ValueError("permeability must be positive")


def cell_centers(nx, ny):
    """Cell-center coordinates on the unit square.

    Returns (x, y) arrays of shape (nx, ny) with the first index along x.
    """
    x = (np.arange(nx) + 0.5) / nx
    y = (np.arange(ny) + 0.5) / ny
    return np.meshgrid(x, y, indexing="ij")


def generate(spec: FieldSpec, nx, ny):
    """Per-cell permeability of shape (nx, ny) sampled at cell centers."""
    if nx < 1 or ny < 1:
        raise ValueError("grid must have at least one cell per direction")
    if spec.kind == CONSTANT:
        return np.full((nx, ny), float(spec.value))
    x, y = cell_centers(nx, ny)
    rng = np.random.default_rng(spec.seed)
    # one (n_sites, 2) draw so the field depends only on spec, not on
    # the evaluation order over cells
    sites = rng.uniform(0.0, 1.0, size=(spec.n_sites, 2))
    if spec.kind == GAUSSIAN_BUMPS:
        total = np.zeros((nx, ny))
        for sx, sy in sites:
            r2 = (x - sx) ** 2 + (y - sy) ** 2
            total += np.exp(-r2 / spec.bump_width**2)
        return np.clip(total, spec.clip_lo, spec.clip_hi)
    # hard rocks: disks smaller than half a cell act as point samples of
    # the centers rather than resolved inclusions
    dx = 1.0 / nx
    dy = 1.0 / ny
    if spec.rock_radius < 0.5 * min(dx, dy):
        _log.warning(
            "rock radius %g is below half a cell (%g); rocks are "
            "point samples at this resolution",
            spec.rock_radius, 0.5 * min(dx, dy),
        )
    field = np.full((nx, ny), float(spec.background_value))
    r2max = spec.rock_radius**2
    for sx, sy in sites:
        inside = (x - sx) ** 2 + (y - sy) ** 2 <= r2max
        field[inside] = spec.rock_value
    return field


def write_csv(path, field):
    """Store a field as rows of (x, y, K), y-major for easy plotting."""
    nx, ny = field.shape
    x, y = cell_centers(nx, ny)
    rows = np.column_stack([
        x.T.reshape(-1), y.T.reshape(-1), field.T.reshape(-1)
    ])
    np.savetxt(path, rows, fmt="%.17g", delimiter=",",
               header="x,y,K", comments="")


def read_csv(path):
    """Load a field stored by write_csv back into an (nx, ny) array."""
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if rows.shape[1] != 3:
        raise ValueError("field file must have columns x, y, K")
    xs = np.unique(rows[:, 0])
    ys = np.unique(rows[:, 1])
    nx, ny = xs.size, ys.size
    if nx * ny != rows.shape[0]:
        raise ValueError("field file is not a full rectangular grid")
    field = np.empty((nx, ny))
    ix = np.searchsorted(xs, rows[:, 0])
    iy = np.searchsorted(ys, rows[:, 1])
    field[ix, iy] = rows[:, 2]
    return field
