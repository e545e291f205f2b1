"""Pressure solve and face velocities for the 2D incompressible flow.

The total velocity obeys div(v) = 0 with v = -mu grad(p) - (0, theta),
where mu = (lambda_w + lambda_o) K is the total mobility and
theta = (lambda_w rho_w g + lambda_o rho_o g) K the gravity term acting
along y.  A five-point finite-volume discretization with harmonic face
mobilities yields a symmetric positive system solved by conjugate
gradients; the resulting face velocities are exactly divergence-free up
to the linear-solve residual, which is what the transport step needs
for its maximum principles.

Boundary faces are Dirichlet (pressure held at an inlet or outlet
value) or walls (zero normal velocity).  A Dirichlet face uses the
half-cell transmissibility 2 mu_cell / dx, i.e. the boundary pressure
lives on the face itself, so a uniform medium between two full-edge
strips reproduces the linear pressure profile exactly.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Grid2D",
    "PressureBC",
    "FaceCoefficients",
    "FaceVelocities",
    "PressureError",
    "face_coefficients",
    "assemble_and_solve",
    "face_velocities",
    "divergence",
]


class PressureError(RuntimeError):
    """Conjugate-gradient failure, carrying the final residual."""


class Grid2D:
    """nx-by-ny cells on the unit square, first index along x."""

    def __init__(self, nx, ny):
        if nx < 2 or ny < 2:
            raise ValueError("grid needs at least 2 cells per direction")
        self.nx = int(nx)
        self.ny = int(ny)
        self.dx = 1.0 / self.nx
        self.dy = 1.0 / self.ny

    @property
    def n_cells(self):
        return self.nx * self.ny

    def cell_centers(self):
        x = (np.arange(self.nx) + 0.5) * self.dx
        y = (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y, indexing="ij")


class PressureBC:
    """Boundary classification: Dirichlet pressure per face, NaN = wall.

    Each edge array runs along the edge (left/right indexed by j,
    bottom/top by i).  Every boundary face is classified exactly once by
    construction; at least one Dirichlet face is required or the
    pressure system would be singular.
    """

    def __init__(self, left, right, bottom, top):
        self.left = np.asarray(left, dtype=float)
        self.right = np.asarray(right, dtype=float)
        self.bottom = np.asarray(bottom, dtype=float)
        self.top = np.asarray(top, dtype=float)
        if not any(np.any(~np.isnan(e)) for e in
                   (self.left, self.right, self.bottom, self.top)):
            raise ValueError(
                "pressure needs at least one inlet or outlet face")
        values = np.concatenate([
            e[~np.isnan(e)]
            for e in (self.left, self.right, self.bottom, self.top)
        ])
        self.p_min = float(values.min())
        self.p_max = float(values.max())

    @classmethod
    def strip_flow(cls, grid, p_in, p_out):
        """Full left edge at p_in, full right edge at p_out, walls elsewhere."""
        if p_in <= p_out:
            raise ValueError("inlet pressure must exceed outlet pressure")
        return cls(
            left=np.full(grid.ny, float(p_in)),
            right=np.full(grid.ny, float(p_out)),
            bottom=np.full(grid.nx, np.nan),
            top=np.full(grid.nx, np.nan),
        )

    @classmethod
    def quarter_five_spot(cls, grid, p_in, p_out,
                          inlet_fraction=0.1, outlet_fraction=0.1):
        """Injection near the origin corner, production near (1,1).

        The inlet covers the given fraction of the left and bottom
        edges adjacent to the origin; the outlet the same fraction of
        the right and top edges adjacent to the opposite corner; the
        rest are walls.  At least one face per port is kept so the
        system stays nonsingular.
        """
        if p_in <= p_out:
            raise ValueError("inlet pressure must exceed outlet pressure")
        if not (0.0 < inlet_fraction <= 1.0 and 0.0 < outlet_fraction <= 1.0):
            raise ValueError("port fractions must lie in (0, 1]")
        n_in_y = max(1, round(inlet_fraction * grid.ny))
        n_in_x = max(1, round(inlet_fraction * grid.nx))
        n_out_y = max(1, round(outlet_fraction * grid.ny))
        n_out_x = max(1, round(outlet_fraction * grid.nx))
        left = np.full(grid.ny, np.nan)
        bottom = np.full(grid.nx, np.nan)
        right = np.full(grid.ny, np.nan)
        top = np.full(grid.nx, np.nan)
        left[:n_in_y] = p_in
        bottom[:n_in_x] = p_in
        right[-n_out_y:] = p_out
        top[-n_out_x:] = p_out
        return cls(left, right, bottom, top)


class FaceCoefficients:
    """Cell mobilities and their face averages.

    mu, theta: cellwise (nx, ny).
    mu_x (nx+1, ny), mu_y (nx, ny+1): harmonic means at interior faces;
    boundary entries hold the half-cell value 2*mu_cell used when the
    face is Dirichlet (walls zero the face at assembly instead).
    theta_y (nx, ny+1): mobility-weighted gravity average at horizontal
    faces, one-sided on the boundary.
    """

    def __init__(self, mu, theta, mu_x, mu_y, theta_y):
        self.mu = mu
        self.theta = theta
        self.mu_x = mu_x
        self.mu_y = mu_y
        self.theta_y = theta_y


class FaceVelocities:
    """Normal velocities at all faces: vx (nx+1, ny), vy (nx, ny+1)."""

    def __init__(self, vx, vy):
        self.vx = vx
        self.vy = vy

    @property
    def max_abs(self):
        return max(float(np.abs(self.vx).max()), float(np.abs(self.vy).max()))


def _harmonic(a, b):
    return 2.0 * a * b / (a + b)


def face_coefficients(s, c, K, model):
    """Cell and face mobility coefficients from the current state."""
    s = np.asarray(s, dtype=float)
    K = np.asarray(K, dtype=float)
    if np.any(K <= 0.0):
        raise ValueError("permeability must be positive")
    lw = model.water_mobility(s, c)
    lo = model.oil_mobility(s)
    mu = (lw + lo) * K
    if np.any(mu <= 0.0):
        raise ValueError("total mobility vanished in a cell")
    if model.gravity_on:
        theta = (lw * model.rho_w_g + lo * model.rho_o_g) * K
    else:
        theta = np.zeros_like(mu)
    nx, ny = mu.shape
    mu_x = np.empty((nx + 1, ny))
    mu_x[1:-1] = _harmonic(mu[:-1], mu[1:])
    mu_x[0] = 2.0 * mu[0]
    mu_x[-1] = 2.0 * mu[-1]
    mu_y = np.empty((nx, ny + 1))
    mu_y[:, 1:-1] = _harmonic(mu[:, :-1], mu[:, 1:])
    mu_y[:, 0] = 2.0 * mu[:, 0]
    mu_y[:, -1] = 2.0 * mu[:, -1]
    theta_y = np.empty((nx, ny + 1))
    theta_y[:, 1:-1] = 0.5 * mu_y[:, 1:-1] * (
        theta[:, :-1] / mu[:, :-1] + theta[:, 1:] / mu[:, 1:])
    theta_y[:, 0] = theta[:, 0]
    theta_y[:, -1] = theta[:, -1]
    return FaceCoefficients(mu, theta, mu_x, mu_y, theta_y)


def _conductances(coeffs, bc, grid):
    """Per-face conductances with walls zeroed, plus Dirichlet masks."""
    Gx = coeffs.mu_x * (grid.dy / grid.dx)
    Gy = coeffs.mu_y * (grid.dx / grid.dy)
    Gx = Gx.copy()
    Gy = Gy.copy()
    Gx[0, np.isnan(bc.left)] = 0.0
    Gx[-1, np.isnan(bc.right)] = 0.0
    Gy[np.isnan(bc.bottom), 0] = 0.0
    Gy[np.isnan(bc.top), -1] = 0.0
    return Gx, Gy


def _apply_operator(p, Gx, Gy, diag=None, out=None):
    if diag is None:
        diag = Gx[:-1] + Gx[1:] + Gy[:, :-1] + Gy[:, 1:]
    out = np.multiply(diag, p, out=out)
    out[1:] -= Gx[1:-1] * p[:-1]
    out[:-1] -= Gx[1:-1] * p[1:]
    out[:, 1:] -= Gy[:, 1:-1] * p[:, :-1]
    out[:, :-1] -= Gy[:, 1:-1] * p[:, 1:]
    return out


def assemble_and_solve(coeffs, bc, grid, tol=1e-10, maxiter=None,
                       preconditioner=None, p0=None):
    """Pressure field solving the five-point system to relative tol.

    The system couples each cell to its neighbors through the face
    conductances; Dirichlet faces contribute to the diagonal and the
    right-hand side, gravity face terms go entirely to the right-hand
    side.  preconditioner: None or "jacobi".  ``p0`` warm-starts the
    iteration (for example with the previous time step's pressure); the
    convergence criterion is unchanged.
    """
    Gx, Gy = _conductances(coeffs, bc, grid)
    b = np.zeros_like(coeffs.mu)
    for edge, face, sl in (
        (bc.left, Gx[0], (0, slice(None))),
        (bc.right, Gx[-1], (-1, slice(None))),
        (bc.bottom, Gy[:, 0], (slice(None), 0)),
        (bc.top, Gy[:, -1], (slice(None), -1)),
    ):
        held = ~np.isnan(edge)
        contrib = np.zeros_like(edge)
        contrib[held] = face[held] * edge[held]
        b[sl] += contrib
    # gravity: wall faces carry no flux, every other horizontal face
    # contributes its theta average
    th = coeffs.theta_y.copy()
    th[np.isnan(bc.bottom), 0] = 0.0
    th[np.isnan(bc.top), -1] = 0.0
    b += (th[:, 1:] - th[:, :-1]) * grid.dx

    if maxiter is None:
        maxiter = 5 * grid.n_cells
    diag = Gx[:-1] + Gx[1:] + Gy[:, :-1] + Gy[:, 1:]
    jacobi = preconditioner == "jacobi"
    if preconditioner is not None and not jacobi:
        raise ValueError("unknown preconditioner %r" % (preconditioner,))

    if p0 is not None and p0.shape == b.shape:
        p = np.array(p0, dtype=float)
    else:
        p = np.full_like(b, 0.5 * (bc.p_min + bc.p_max))
    r = b - _apply_operator(p, Gx, Gy, diag)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        b_norm = 1.0
    # the loop reuses fixed buffers; z aliases r when M = I
    z = np.empty_like(r) if jacobi else r
    if jacobi:
        np.divide(r, diag, out=z)
    d = z.copy()
    Ad = np.empty_like(r)
    tmp = np.empty_like(r)
    rr = float(np.vdot(r, r))
    rz = float(np.vdot(r, z)) if jacobi else rr
    stop2 = (tol * b_norm) ** 2
    for _ in range(maxiter):
        if rr <= stop2:
            return p
        _apply_operator(d, Gx, Gy, diag, out=Ad)
        alpha = rz / float(np.vdot(d, Ad))
        np.multiply(d, alpha, out=tmp)
        p += tmp
        np.multiply(Ad, alpha, out=tmp)
        r -= tmp
        if jacobi:
            np.divide(r, diag, out=z)
        rr = float(np.vdot(r, r))
        rz_new = float(np.vdot(r, z)) if jacobi else rr
        np.multiply(d, rz_new / rz, out=d)
        d += z
        rz = rz_new
    resid = float(np.sqrt(rr)) / b_norm
    if resid <= tol:
        return p
    raise PressureError(
        "conjugate gradients stalled at relative residual %.3e "
        "after %d iterations" % (resid, maxiter))


def face_velocities(p, coeffs, bc, grid):
    """Normal velocities at every face from the solved pressure."""
    nx, ny = p.shape
    vx = np.zeros((nx + 1, ny))
    vx[1:-1] = -coeffs.mu_x[1:-1] * (p[1:] - p[:-1]) / grid.dx
    held = ~np.isnan(bc.left)
    vx[0, held] = -coeffs.mu_x[0, held] * (p[0, held] - bc.left[held]) / grid.dx
    held = ~np.isnan(bc.right)
    vx[-1, held] = -coeffs.mu_x[-1, held] * (bc.right[held] - p[-1, held]) / grid.dx
    vy = np.zeros((nx, ny + 1))
    vy[:, 1:-1] = (-coeffs.mu_y[:, 1:-1] * (p[:, 1:] - p[:, :-1]) / grid.dy
                   - coeffs.theta_y[:, 1:-1])
    held = ~np.isnan(bc.bottom)
    vy[held, 0] = (-coeffs.mu_y[held, 0] * (p[held, 0] - bc.bottom[held]) / grid.dy
                   - coeffs.theta_y[held, 0])
    held = ~np.isnan(bc.top)
    vy[held, -1] = (-coeffs.mu_y[held, -1] * (bc.top[held] - p[held, -1]) / grid.dy
                    - coeffs.theta_y[held, -1])
    return FaceVelocities(vx, vy)


def divergence(vel, grid):
    """Net outflow of each cell; bounded by the linear-solve residual."""
    return ((vel.vx[1:] - vel.vx[:-1]) * grid.dy
            + (vel.vy[:, 1:] - vel.vy[:, :-1]) * grid.dx)
