"""Pressure system: discretization, solver, velocities, divergence."""

import numpy as np
import pytest

from polyflood import fields, pressure2d
from polyflood.fields import FieldSpec
from polyflood.physics import PhysicsModel
from polyflood.pressure2d import (
    Grid2D,
    PressureBC,
    PressureError,
    _apply_operator,
    _conductances,
    _harmonic,
    assemble_and_solve,
    divergence,
    face_coefficients,
    face_velocities,
)


def uniform_inputs(grid, s=0.5, c=(0.0, 0.0), K=1.0, gravity=True):
    model = PhysicsModel(m=2, gravity_on=gravity)
    sf = np.full((grid.nx, grid.ny), s)
    cf = np.empty((2, grid.nx, grid.ny))
    cf[0] = c[0]
    cf[1] = c[1]
    Kf = np.full((grid.nx, grid.ny), K)
    return model, sf, cf, Kf


# ---------------------------------------------------------------------------
# grid and boundary classification


def test_grid_requires_two_cells_per_direction():
    Grid2D(2, 2)
    with pytest.raises(ValueError):
        Grid2D(1, 8)


def test_all_wall_boundary_is_rejected():
    n = 4
    nan = np.full(n, np.nan)
    with pytest.raises(ValueError):
        PressureBC(nan, nan, nan, nan)


def test_strip_flow_classification():
    grid = Grid2D(6, 4)
    bc = PressureBC.strip_flow(grid, 8.0, 1.0)
    assert np.all(bc.left == 8.0) and np.all(bc.right == 1.0)
    assert np.all(np.isnan(bc.bottom)) and np.all(np.isnan(bc.top))
    assert bc.p_min == 1.0 and bc.p_max == 8.0
    with pytest.raises(ValueError):
        PressureBC.strip_flow(grid, 1.0, 1.0)


def test_quarter_five_spot_port_geometry():
    grid = Grid2D(20, 30)
    bc = PressureBC.quarter_five_spot(grid, 8.0, 1.0, inlet_fraction=0.1,
                                      outlet_fraction=0.1)
    # inlet: first 3 faces of the left edge (0.1*30), first 2 of the bottom
    assert np.all(bc.left[:3] == 8.0) and np.all(np.isnan(bc.left[3:]))
    assert np.all(bc.bottom[:2] == 8.0) and np.all(np.isnan(bc.bottom[2:]))
    # outlet: mirrored at the far corner
    assert np.all(bc.right[-3:] == 1.0) and np.all(np.isnan(bc.right[:-3]))
    assert np.all(bc.top[-2:] == 1.0) and np.all(np.isnan(bc.top[:-2]))


def test_quarter_five_spot_keeps_one_face_minimum():
    grid = Grid2D(4, 4)
    bc = PressureBC.quarter_five_spot(grid, 2.0, 1.0, inlet_fraction=0.01,
                                      outlet_fraction=0.01)
    assert np.sum(~np.isnan(bc.left)) == 1
    assert np.sum(~np.isnan(bc.bottom)) == 1


def test_quarter_five_spot_validates_fractions():
    grid = Grid2D(8, 8)
    with pytest.raises(ValueError):
        PressureBC.quarter_five_spot(grid, 2.0, 1.0, inlet_fraction=0.0)
    with pytest.raises(ValueError):
        PressureBC.quarter_five_spot(grid, 2.0, 1.0, outlet_fraction=1.5)


# ---------------------------------------------------------------------------
# face coefficients


def test_face_mobility_harmonic_mean_example():
    assert _harmonic(1.0, 3.0) == pytest.approx(1.5)
    grid = Grid2D(2, 2)
    model = PhysicsModel(m=2)
    s = np.ones((2, 2))
    c = np.zeros((2, 2, 2))
    K = np.array([[0.5, 0.5], [1.5, 1.5]])  # mu = 2K: columns 1 and 3
    coeffs = face_coefficients(s, c, K, model)
    assert np.allclose(coeffs.mu[0], 1.0) and np.allclose(coeffs.mu[1], 3.0)
    assert np.allclose(coeffs.mu_x[1], 1.5)        # interior harmonic mean
    assert np.allclose(coeffs.mu_x[0], 2.0)        # half-cell boundary
    assert np.allclose(coeffs.mu_x[2], 6.0)


def test_gravity_off_zeroes_gravity_coefficients():
    grid = Grid2D(4, 4)
    model = PhysicsModel(m=2, gravity_on=False)
    _, s, c, K = uniform_inputs(grid)
    coeffs = face_coefficients(s, c, K, model)
    assert np.all(coeffs.theta == 0.0)
    assert np.all(coeffs.theta_y == 0.0)


def test_gravity_coefficients_weight_phase_densities():
    grid = Grid2D(3, 3)
    model, s, c, K = uniform_inputs(grid, s=0.5)
    coeffs = face_coefficients(s, c, K, model)
    lw, lo = 0.5, 0.25
    assert np.allclose(coeffs.theta, lw * 2.0 + lo * 1.0)
    # uniform state: every face average equals the cell value
    assert np.allclose(coeffs.theta_y, lw * 2.0 + lo * 1.0)


def test_face_coefficients_reject_nonpositive_permeability():
    grid = Grid2D(3, 3)
    model, s, c, K = uniform_inputs(grid)
    K[1, 1] = 0.0
    with pytest.raises(ValueError):
        face_coefficients(s, c, K, model)


# ---------------------------------------------------------------------------
# operator structure


def test_operator_is_symmetric():
    grid = Grid2D(7, 5)
    model = PhysicsModel(m=2)
    rng = np.random.default_rng(13)
    s = rng.uniform(0.1, 0.9, size=(7, 5))
    c = rng.uniform(0.0, 1.0, size=(2, 7, 5))
    K = rng.uniform(0.5, 1.5, size=(7, 5))
    coeffs = face_coefficients(s, c, K, model)
    bc = PressureBC.quarter_five_spot(grid, 8.0, 1.0)
    Gx, Gy = _conductances(coeffs, bc, grid)
    for _ in range(5):
        u = rng.standard_normal((7, 5))
        w = rng.standard_normal((7, 5))
        lhs = float(np.sum(_apply_operator(u, Gx, Gy) * w))
        rhs = float(np.sum(u * _apply_operator(w, Gx, Gy)))
        assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-13)


def test_wall_faces_have_zero_conductance():
    grid = Grid2D(5, 4)
    model, s, c, K = uniform_inputs(grid)
    coeffs = face_coefficients(s, c, K, model)
    bc = PressureBC.strip_flow(grid, 8.0, 1.0)
    Gx, Gy = _conductances(coeffs, bc, grid)
    assert np.all(Gy[:, 0] == 0.0) and np.all(Gy[:, -1] == 0.0)
    assert np.all(Gx[0] > 0.0) and np.all(Gx[-1] > 0.0)


# ---------------------------------------------------------------------------
# exact discrete solutions


def test_uniform_strip_reproduces_linear_profile():
    grid = Grid2D(16, 8)
    model, s, c, K = uniform_inputs(grid, gravity=False)
    coeffs = face_coefficients(s, c, K, model)
    bc = PressureBC.strip_flow(grid, 8.0, 1.0)
    p = assemble_and_solve(coeffs, bc, grid, tol=1e-12)
    x = (np.arange(grid.nx) + 0.5) * grid.dx
    exact = 8.0 - 7.0 * x
    assert np.abs(p - exact[:, None]).max() < 1e-9


def test_uniform_strip_velocity_is_uniform():
    grid = Grid2D(16, 8)
    model, s, c, K = uniform_inputs(grid, gravity=False)
    mu = float(face_coefficients(s, c, K, model).mu[0, 0])
    coeffs = face_coefficients(s, c, K, model)
    bc = PressureBC.strip_flow(grid, 8.0, 1.0)
    p = assemble_and_solve(coeffs, bc, grid, tol=1e-12)
    vel = face_velocities(p, coeffs, bc, grid)
    want = mu * (8.0 - 1.0) / 1.0
    assert np.abs(vel.vx - want).max() < 1e-9
    assert np.abs(vel.vy).max() < 1e-9


def test_hydrostatic_column_is_stationary():
    """Dirichlet top and bottom holding the exact gravity head: the
    pressure is linear in y and all velocities vanish."""
    grid = Grid2D(4, 12)
    model, s, c, K = uniform_inputs(grid, s=0.5)
    coeffs = face_coefficients(s, c, K, model)
    mu = float(coeffs.mu[0, 0])
    th = float(coeffs.theta[0, 0])
    slope = -th / mu
    p_bottom, p_top = 10.0, 10.0 + slope
    nan = np.full(grid.ny, np.nan)
    bc = PressureBC(nan, nan, np.full(grid.nx, p_bottom),
                    np.full(grid.nx, p_top))
    p = assemble_and_solve(coeffs, bc, grid, tol=1e-13)
    y = (np.arange(grid.ny) + 0.5) * grid.dy
    assert np.abs(p - (10.0 + slope * y)[None, :]).max() < 1e-9
    vel = face_velocities(p, coeffs, bc, grid)
    assert vel.max_abs < 1e-9
    assert np.abs(divergence(vel, grid)).max() < 1e-9


# ---------------------------------------------------------------------------
# solver behavior on heterogeneous media


def heterogeneous_case(grid, kind, gravity=True):
    model = PhysicsModel(m=2, gravity_on=gravity)
    rng = np.random.default_rng(7)
    s = rng.uniform(0.1, 0.9, size=(grid.nx, grid.ny))
    c = rng.uniform(0.0, 1.0, size=(2, grid.nx, grid.ny))
    K = fields.generate(FieldSpec(kind=kind, seed=11), grid.nx, grid.ny)
    return model, s, c, K


@pytest.mark.parametrize("kind", [fields.GAUSSIAN_BUMPS, fields.HARD_ROCK])
def test_divergence_small_on_random_media(kind):
    grid = Grid2D(32, 32)
    model, s, c, K = heterogeneous_case(grid, kind)
    coeffs = face_coefficients(s, c, K, model)
    bc = PressureBC.quarter_five_spot(grid, 8.0, 1.0)
    p = assemble_and_solve(coeffs, bc, grid, tol=1e-10)
    vel = face_velocities(p, coeffs, bc, grid)
    assert np.abs(divergence(vel, grid)).max() < 1e-9


def test_pressure_max_principle_without_gravity():
    grid = Grid2D(24, 24)
    model, s, c, K = heterogeneous_case(grid, fields.GAUSSIAN_BUMPS,
                                        gravity=False)
    coeffs = face_coefficients(s, c, K, model)
    bc = PressureBC.quarter_five_spot(grid, 8.0, 1.0)
    p = assemble_and_solve(coeffs, bc, grid, tol=1e-12)
    assert p.min() >= 1.0 - 1e-9
    assert p.max() <= 8.0 + 1e-9


def test_wall_faces_carry_exactly_zero_velocity():
    grid = Grid2D(16, 16)
    model, s, c, K = heterogeneous_case(grid, fields.GAUSSIAN_BUMPS)
    coeffs = face_coefficients(s, c, K, model)
    bc = PressureBC.quarter_five_spot(grid, 8.0, 1.0)
    p = assemble_and_solve(coeffs, bc, grid)
    vel = face_velocities(p, coeffs, bc, grid)
    assert np.all(vel.vx[0, np.isnan(bc.left)] == 0.0)
    assert np.all(vel.vx[-1, np.isnan(bc.right)] == 0.0)
    assert np.all(vel.vy[np.isnan(bc.bottom), 0] == 0.0)
    assert np.all(vel.vy[np.isnan(bc.top), -1] == 0.0)
    # port faces do carry flow
    assert np.any(vel.vx[0, ~np.isnan(bc.left)] != 0.0)


def test_jacobi_preconditioner_matches_plain_solve():
    grid = Grid2D(24, 24)
    model, s, c, K = heterogeneous_case(grid, fields.HARD_ROCK)
    coeffs = face_coefficients(s, c, K, model)
    bc = PressureBC.quarter_five_spot(grid, 8.0, 1.0)
    p0 = assemble_and_solve(coeffs, bc, grid, tol=1e-12)
    p1 = assemble_and_solve(coeffs, bc, grid, tol=1e-12,
                            preconditioner="jacobi")
    assert np.abs(p0 - p1).max() < 1e-7


def test_unknown_preconditioner_rejected():
    grid = Grid2D(4, 4)
    model, s, c, K = uniform_inputs(grid)
    coeffs = face_coefficients(s, c, K, model)
    bc = PressureBC.strip_flow(grid, 2.0, 1.0)
    with pytest.raises(ValueError):
        assemble_and_solve(coeffs, bc, grid, preconditioner="ilu")


def test_iteration_cap_raises_with_residual():
    grid = Grid2D(24, 24)
    model, s, c, K = heterogeneous_case(grid, fields.HARD_ROCK)
    coeffs = face_coefficients(s, c, K, model)
    bc = PressureBC.quarter_five_spot(grid, 8.0, 1.0)
    with pytest.raises(PressureError) as err:
        assemble_and_solve(coeffs, bc, grid, tol=1e-12, maxiter=3)
    assert "residual" in str(err.value)


def test_converges_within_default_iteration_budget():
    """The default cap is five times the cell count; the hard-rock medium
    with a million-to-one contrast still converges inside it."""
    grid = Grid2D(32, 32)
    model, s, c, K = heterogeneous_case(grid, fields.HARD_ROCK)
    coeffs = face_coefficients(s, c, K, model)
    bc = PressureBC.quarter_five_spot(grid, 8.0, 1.0)
    p = assemble_and_solve(coeffs, bc, grid, tol=1e-10)
    assert np.all(np.isfinite(p))


# ---------------------------------------------------------------------------
# divergence bookkeeping


def test_divergence_of_hand_built_velocity_field():
    grid = Grid2D(2, 2)
    vx = np.zeros((3, 2))
    vy = np.zeros((2, 3))
    vx[1, 0] = 2.0   # flow from cell (0,0) into (1,0)
    vel = pressure2d.FaceVelocities(vx, vy)
    div = divergence(vel, grid)
    # outflow of (0,0) positive, inflow of (1,0) negative, scaled by dy
    assert div[0, 0] == pytest.approx(2.0 * grid.dy)
    assert div[1, 0] == pytest.approx(-2.0 * grid.dy)
    assert div[0, 1] == div[1, 1] == 0.0
