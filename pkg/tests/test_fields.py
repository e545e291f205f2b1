"""Permeability field generation: determinism, ranges, replay."""

import logging

import numpy as np
import pytest

from polyflood import fields
from polyflood.fields import FieldSpec, cell_centers, generate, read_csv, write_csv


# ---------------------------------------------------------------------------
# spec validation


def test_spec_rejects_unknown_kind():
    with pytest.raises(ValueError):
        FieldSpec(kind="perlin")


def test_spec_rejects_bad_parameters():
    with pytest.raises(ValueError):
        FieldSpec(kind=fields.GAUSSIAN_BUMPS, n_sites=-1)
    with pytest.raises(ValueError):
        FieldSpec(kind=fields.GAUSSIAN_BUMPS, bump_width=0.0)
    with pytest.raises(ValueError):
        FieldSpec(kind=fields.GAUSSIAN_BUMPS, clip_lo=2.0, clip_hi=1.0)
    with pytest.raises(ValueError):
        FieldSpec(kind=fields.HARD_ROCK, rock_radius=0.0)
    with pytest.raises(ValueError):
        FieldSpec(kind=fields.CONSTANT, value=0.0)


def test_generate_rejects_empty_grid():
    with pytest.raises(ValueError):
        generate(FieldSpec(), 0, 4)


# ---------------------------------------------------------------------------
# geometry


def test_cell_centers_layout():
    x, y = cell_centers(4, 2)
    assert x.shape == y.shape == (4, 2)
    assert np.allclose(x[:, 0], [0.125, 0.375, 0.625, 0.875])
    assert np.allclose(y[0, :], [0.25, 0.75])
    # first index moves along x only
    assert np.allclose(x[:, 0], x[:, 1])
    assert np.allclose(y[0, :], y[3, :])


# ---------------------------------------------------------------------------
# field kinds


def test_constant_field():
    K = generate(FieldSpec(kind=fields.CONSTANT, value=1.3), 5, 7)
    assert K.shape == (5, 7)
    assert np.all(K == 1.3)


def test_gaussian_bumps_respect_clip_bounds():
    spec = FieldSpec(kind=fields.GAUSSIAN_BUMPS, n_sites=100, seed=3)
    K = generate(spec, 32, 32)
    assert K.min() >= 0.5 and K.max() <= 1.5
    # a hundred bumps on the unit square touch both bounds in practice
    assert K.min() == 0.5
    assert K.max() == 1.5


def test_gaussian_bumps_no_sites_gives_lower_clip():
    spec = FieldSpec(kind=fields.GAUSSIAN_BUMPS, n_sites=0)
    K = generate(spec, 8, 8)
    assert np.all(K == 0.5)


def test_hard_rock_values_are_two_level():
    spec = FieldSpec(kind=fields.HARD_ROCK, n_sites=50, seed=9,
                     rock_radius=0.05)
    K = generate(spec, 64, 64)
    assert set(np.unique(K)) <= {0.01, 1.0}
    assert np.any(K == 0.01)
    assert np.any(K == 1.0)


def test_hard_rock_disks_cover_their_centers():
    spec = FieldSpec(kind=fields.HARD_ROCK, n_sites=5, seed=21,
                     rock_radius=0.06)
    K = generate(spec, 100, 100)
    rng = np.random.default_rng(21)
    sites = rng.uniform(0.0, 1.0, size=(5, 2))
    x, y = cell_centers(100, 100)
    for sx, sy in sites:
        i = int(np.argmin(np.abs(x[:, 0] - sx)))
        j = int(np.argmin(np.abs(y[0, :] - sy)))
        assert K[i, j] == 0.01


def test_hard_rock_warns_when_rocks_are_subcell(caplog):
    spec = FieldSpec(kind=fields.HARD_ROCK, n_sites=10, seed=1,
                     rock_radius=0.0015)
    with caplog.at_level(logging.WARNING, logger="polyflood.fields"):
        generate(spec, 64, 64)
    assert any("rock radius" in rec.message for rec in caplog.records)


def test_hard_rock_no_warning_when_resolved(caplog):
    spec = FieldSpec(kind=fields.HARD_ROCK, n_sites=10, seed=1,
                     rock_radius=0.05)
    with caplog.at_level(logging.WARNING, logger="polyflood.fields"):
        generate(spec, 64, 64)
    assert not caplog.records


# ---------------------------------------------------------------------------
# determinism


def test_identical_specs_give_bitwise_identical_fields():
    spec = FieldSpec(kind=fields.GAUSSIAN_BUMPS, n_sites=100, seed=42)
    a = generate(spec, 48, 48)
    b = generate(FieldSpec(kind=fields.GAUSSIAN_BUMPS, n_sites=100, seed=42),
                 48, 48)
    assert np.array_equal(a, b)


def test_different_seeds_give_different_fields():
    a = generate(FieldSpec(kind=fields.GAUSSIAN_BUMPS, seed=1), 32, 32)
    b = generate(FieldSpec(kind=fields.GAUSSIAN_BUMPS, seed=2), 32, 32)
    assert not np.array_equal(a, b)


def test_site_draw_is_resolution_independent():
    """The random sites depend on the field spec only, so refining the
    grid samples the same underlying field."""
    spec = FieldSpec(kind=fields.GAUSSIAN_BUMPS, n_sites=60, seed=7)
    coarse = generate(spec, 16, 16)
    fine = generate(spec, 48, 48)
    # tripling the resolution puts the middle fine cell of each 3x3 block
    # exactly on a coarse center, where the values must agree bitwise
    assert np.array_equal(fine[1::3, 1::3], coarse)


# ---------------------------------------------------------------------------
# CSV replay


def test_csv_round_trip_bitwise(tmp_path):
    spec = FieldSpec(kind=fields.GAUSSIAN_BUMPS, n_sites=40, seed=5)
    K = generate(spec, 20, 12)
    path = tmp_path / "field.csv"
    write_csv(path, K)
    back = read_csv(path)
    assert back.shape == K.shape
    assert np.array_equal(back, K)


def test_csv_header_and_layout(tmp_path):
    K = generate(FieldSpec(kind=fields.CONSTANT, value=2.0), 3, 2)
    path = tmp_path / "field.csv"
    write_csv(path, K)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x,y,K"
    assert len(lines) == 1 + 3 * 2
    first = [float(t) for t in lines[1].split(",")]
    # y-major: the first row is the lowest-y, lowest-x cell
    assert first == pytest.approx([1.0 / 6.0, 0.25, 2.0])


def test_read_csv_rejects_ragged_data(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y,K\n0.25,0.25,1.0\n0.75,0.25,1.0\n0.25,0.75,1.0\n")
    with pytest.raises(ValueError):
        read_csv(path)


def test_read_csv_rejects_wrong_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y\n0.25,0.25\n")
    with pytest.raises(ValueError):
        read_csv(path)
