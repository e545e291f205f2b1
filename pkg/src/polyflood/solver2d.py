"""Two-dimensional sequential solver: pressure, CFL, split transport.

Each cycle solves the incompressible pressure equation for face
velocities, bounds the wave speeds to pick a stable time step, then
advances saturation and concentrations with the finite-volume transport
update.  Horizontal faces carry the gravity-free flux v*f(s,c); vertical
faces carry the buoyancy form [v - (rho_w-rho_o) g K lambda_o] f(s,c).
High order uses per-direction limited reconstruction with three-stage
strong-stability time stepping; concentrations are recovered from their
conserved loads cell by cell after every stage.

Boundary faces come classified by the pressure boundary spec: Dirichlet
faces at the highest held pressure inject water (ghost state s=1 with
the configured inlet concentrations), other Dirichlet faces are free
outflow (zero-gradient ghosts), walls mirror the interior cell and
carry exactly zero flux.
"""

from __future__ import annotations

import logging

import numpy as np

from . import numflux, pressure2d, scheme, solver1d
from .physics import HORIZONTAL, VERTICAL
from .pressure2d import Grid2D  # re-export: the grid type is part of this API

__all__ = ["Grid2D", "Solver2D", "WALL", "INLET", "OUTLET", "edge_roles"]

_log = logging.getLogger(__name__)

WALL = 0
INLET = 1
OUTLET = 2


def edge_roles(bc):
    """Transport role of every boundary face, per edge.

    Dirichlet faces held at the highest pressure anywhere on the
    boundary inject water; Dirichlet faces at any lower pressure
    produce; NaN faces are walls.  Returns (left, right, bottom, top)
    integer arrays of WALL/INLET/OUTLET.
    """
    def classify(edge):
        role = np.full(edge.shape, WALL, dtype=int)
        held = ~np.isnan(edge)
        role[held] = np.where(edge[held] == bc.p_max, INLET, OUTLET)
        return role

    return (classify(bc.left), classify(bc.right),
            classify(bc.bottom), classify(bc.top))


class Solver2D:
    """March the coupled pressure-transport system on the unit square."""

    def __init__(
        self,
        model,
        grid,
        s0,
        c0,
        K,
        bc,
        inlet_c=None,
        flux="dflu",
        order=2,
        theta=None,
        cfl_safety=1.0,
        pressure_every=1,
        pressure_tol=1e-10,
        preconditioner=None,
    ):
        if flux not in ("dflu", "godunov", "upstream"):
            raise ValueError("unknown flux %r" % (flux,))
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        # reconstruction with theta=1 keeps face concentrations ordered
        # wherever the cells are, which the exact interface flux requires
        if theta is None:
            theta = 1.0 if (flux == "godunov" and order == 2) else 2.0
        if flux == "godunov" and order == 2 and theta > 1.0:
            raise ValueError(
                "the exact interface flux requires theta=1 reconstruction; "
                "sharper limiters can produce increasing face concentrations"
            )
        if not 1.0 <= theta <= 2.0:
            raise ValueError("limiter parameter must lie in [1, 2]")
        if pressure_every < 1:
            raise ValueError("pressure must be solved at least every step")
        self.model = model
        self.grid = grid
        self.bc = bc
        self.flux_name = flux
        self.order = int(order)
        self.theta = float(theta)
        self.cfl_safety = float(cfl_safety)
        self.pressure_every = int(pressure_every)
        self.pressure_tol = float(pressure_tol)
        self.preconditioner = preconditioner

        nx, ny = grid.nx, grid.ny
        self.s = np.array(np.broadcast_to(np.asarray(s0, float), (nx, ny)))
        self.c = np.array(
            np.broadcast_to(np.asarray(c0, float).reshape(model.m, 1, 1)
                            if np.ndim(c0) == 1 else np.asarray(c0, float),
                            (model.m, nx, ny)))
        self.K = np.array(np.broadcast_to(np.asarray(K, float), (nx, ny)))
        if np.any(self.K <= 0.0):
            raise ValueError("permeability must be positive")
        if flux == "godunov" and np.ptp(self.K) != 0.0:
            raise ValueError(
                "the exact interface solution requires uniform permeability"
            )
        if np.any(self.s < 0.0) or np.any(self.s > 1.0):
            raise ValueError("initial saturation must lie in [0, 1]")
        self.inlet_c = np.zeros(model.m) if inlet_c is None else \
            np.asarray(inlet_c, dtype=float).reshape(model.m)
        self.roles = edge_roles(bc)

        # invariant data box for concentrations: initial data plus the
        # injected state
        stacked = np.concatenate(
            [self.c.reshape(model.m, -1), self.inlet_c[:, None]], axis=1)
        self.c_lo = stacked.min(axis=1)
        self.c_hi = stacked.max(axis=1)

        self.t = 0.0
        self.steps = 0
        self._pressure_step = -1
        self._speed_cache = {}
        self._pressure_prev = None
        self.pressure = None
        self.velocities = None
        self.max_speed = None
        self.dt_stable = None
        self.max_s_excess = 0.0
        self.max_c_excess = 0.0
        self.max_local_excess = 0.0
        self.max_divergence = 0.0
        self.current_divergence = 0.0
        self._bound_slack = 0.0
        # time-integrated boundary totals (positive into the domain)
        self.net_water_in = 0.0
        self.net_species_in = np.zeros(model.m)
        self.history = {
            "t": [], "dt": [], "water": [], "species": [],
            "s_min": [], "s_max": [], "p_min": [], "p_max": [],
        }

    # -- pressure ------------------------------------------------------------

    def solve_pressure(self):
        """Update pressure, face velocities, wave-speed bound and dt."""
        coeffs = pressure2d.face_coefficients(
            self.s, self.c, self.K, self.model)
        # warm-start the iteration from the pressure drift between the
        # last two solves; the convergence criterion is unaffected
        p0 = self.pressure
        if p0 is not None and self._pressure_prev is not None:
            p0 = 2.0 * p0 - self._pressure_prev
        self._pressure_prev = self.pressure
        self.pressure = pressure2d.assemble_and_solve(
            coeffs, self.bc, self.grid, tol=self.pressure_tol,
            preconditioner=self.preconditioner, p0=p0)
        self.velocities = pressure2d.face_velocities(
            self.pressure, coeffs, self.bc, self.grid)
        div = float(np.abs(
            pressure2d.divergence(self.velocities, self.grid)).max())
        self.current_divergence = div
        if div > self.max_divergence:
            self.max_divergence = div
        vx, vy = self.velocities.vx, self.velocities.vy
        m_x = self._speed_bound(
            HORIZONTAL, float(vx.min()), float(vx.max()))
        m_y = self._speed_bound(
            VERTICAL, float(vy.min()), float(vy.max()))
        self.max_speed = max(m_x, m_y)
        self.dt_stable = scheme.cfl_dt(
            self.max_speed, self.grid.dx, self.grid.dy,
            dimension=2, safety=self.cfl_safety)

    def _speed_bound(self, direction, v_lo, v_hi):
        """Wave-speed bound for one direction, cached over a padded
        velocity interval.

        The bound over a velocity range grows with the range, so the
        value computed for an enclosing interval stays a valid (merely
        slightly conservative) bound while the step-to-step velocities
        drift inside it.  Only the velocity range changes between calls;
        the permeability range and the concentration box are fixed.
        """
        cached = self._speed_cache.get(direction)
        if cached is not None and cached[0] <= v_lo and v_hi <= cached[1]:
            return cached[2]
        pad = 0.1 * max(abs(v_lo), abs(v_hi), 1e-30)
        lo, hi = v_lo - pad, v_hi + pad
        k_range = (float(self.K.min()), float(self.K.max()))
        bound = scheme.max_wave_speed(
            self.model, (lo, hi), k_range, direction,
            self.c_lo, self.c_hi)
        self._speed_cache[direction] = (lo, hi, bound)
        return bound

    # -- boundary ghosts -----------------------------------------------------

    def _edge_ghost(self, role, s_edge, c_edge):
        """Ghost states along one edge from its face roles.

        Inlet faces see the injected state; walls and outlets copy the
        interior cell (a wall mirror and a zero-gradient outflow agree
        for a one-cell ghost layer).
        """
        inlet = role == INLET
        s_g = np.where(inlet, 1.0, s_edge)
        c_g = np.where(inlet[None, :], self.inlet_c[:, None], c_edge)
        return s_g, c_g

    def ghost_extend(self, s=None, c=None):
        """State arrays with the boundary ghost layer attached.

        Returns (s_x, c_x, s_y, c_y): the x-extended arrays have shape
        (nx+2, ny) / (m, nx+2, ny), the y-extended (nx, ny+2) and
        (m, nx, ny+2).
        """
        s = self.s if s is None else s
        c = self.c if c is None else c
        rl, rr, rb, rt = self.roles
        s_gl, c_gl = self._edge_ghost(rl, s[0], c[:, 0])
        s_gr, c_gr = self._edge_ghost(rr, s[-1], c[:, -1])
        s_gb, c_gb = self._edge_ghost(rb, s[:, 0], c[:, :, 0])
        s_gt, c_gt = self._edge_ghost(rt, s[:, -1], c[:, :, -1])
        s_x = np.concatenate([s_gl[None, :], s, s_gr[None, :]], axis=0)
        c_x = np.concatenate([c_gl[:, None, :], c, c_gr[:, None, :]], axis=1)
        s_y = np.concatenate([s_gb[:, None], s, s_gt[:, None]], axis=1)
        c_y = np.concatenate([c_gb[:, :, None], c, c_gt[:, :, None]], axis=2)
        return s_x, c_x, s_y, c_y

    # -- face states and fluxes ----------------------------------------------

    def _face_states_x(self, s_x, c_x):
        if self.order == 1:
            s_l, s_r = s_x[:-1], s_x[1:]
            c_l, c_r = c_x[:, :-1], c_x[:, 1:]
        else:
            lo, hi = scheme.reconstruct_faces(
                np.moveaxis(s_x, 0, -1), self.theta)
            s_hi = np.moveaxis(hi, -1, 0)
            s_lo = np.moveaxis(lo, -1, 0)
            clo, chi = scheme.reconstruct_faces(
                np.moveaxis(c_x, 1, -1), self.theta)
            c_hi = np.moveaxis(chi, -1, 1)
            c_lo = np.moveaxis(clo, -1, 1)
            s_l = np.concatenate([s_x[:1], s_hi], axis=0)
            s_r = np.concatenate([s_lo, s_x[-1:]], axis=0)
            c_l = np.concatenate([c_x[:, :1], c_hi], axis=1)
            c_r = np.concatenate([c_lo, c_x[:, -1:]], axis=1)
        return s_l, s_r, c_l, c_r

    def _face_states_y(self, s_y, c_y):
        if self.order == 1:
            s_l, s_r = s_y[:, :-1], s_y[:, 1:]
            c_l, c_r = c_y[:, :, :-1], c_y[:, :, 1:]
        else:
            s_lo, s_hi = scheme.reconstruct_faces(s_y, self.theta)
            c_lo, c_hi = scheme.reconstruct_faces(c_y, self.theta)
            s_l = np.concatenate([s_y[:, :1], s_hi], axis=1)
            s_r = np.concatenate([s_lo, s_y[:, -1:]], axis=1)
            c_l = np.concatenate([c_y[:, :, :1], c_hi], axis=2)
            c_r = np.concatenate([c_lo, c_y[:, :, -1:]], axis=2)
        return s_l, s_r, c_l, c_r

    def _batch_flux(self, s_l, s_r, c_l, c_r, v, K_l, K_r, direction):
        """Flux batch over flattened faces; inputs keep their face shape."""
        shape = s_l.shape
        m = self.model.m
        sl, sr = s_l.reshape(-1), s_r.reshape(-1)
        cl, cr = c_l.reshape(m, -1), c_r.reshape(m, -1)
        v_flat = np.broadcast_to(v, shape).reshape(-1)
        kl = np.broadcast_to(K_l, shape).reshape(-1)
        kr = np.broadcast_to(K_r, shape).reshape(-1)
        if self.flux_name == "dflu":
            F, G = numflux.dflu_flux_arrays(
                self.model, sl, sr, cl, cr, v_flat, kl, v_flat, kr, direction)
        elif self.flux_name == "upstream":
            F, G = numflux.upstream_mobility_flux_arrays(
                self.model, sl, sr, cl, cr, v_flat, kl, kr, direction)
        else:
            # the exact fan needs nonincreasing face concentrations; the
            # pressure residual leaks noise-scale jumps of either sign
            # across faces, so jumps below a noise allowance collapse to
            # the left state (genuine increases still refuse)
            span = max(1.0, float(self.c_hi.max() - self.c_lo.min()))
            cr = np.where(np.abs(cl - cr) <= 1e-9 * span, cl, cr)
            F, G = numflux.godunov_flux_arrays(
                self.model, sl, sr, cl, cr, v_flat,
                float(self.K[0, 0]), direction)
        return F.reshape(shape), G.reshape((m,) + shape)

    def _fluxes(self, s, c):
        """(F_x, G_x, F_y, G_y) on all faces, wall faces exactly zero."""
        s_x, c_x, s_y, c_y = self.ghost_extend(s, c)
        K = self.K
        sl, sr, cl, cr = self._face_states_x(s_x, c_x)
        K_l = np.concatenate([K[:1], K], axis=0)
        K_r = np.concatenate([K, K[-1:]], axis=0)
        F_x, G_x = self._batch_flux(
            sl, sr, cl, cr, self.velocities.vx, K_l, K_r, HORIZONTAL)
        sl, sr, cl, cr = self._face_states_y(s_y, c_y)
        K_b = np.concatenate([K[:, :1], K], axis=1)
        K_t = np.concatenate([K, K[:, -1:]], axis=1)
        F_y, G_y = self._batch_flux(
            sl, sr, cl, cr, self.velocities.vy, K_b, K_t, VERTICAL)
        rl, rr, rb, rt = self.roles
        F_x[0, rl == WALL] = 0.0
        F_x[-1, rr == WALL] = 0.0
        G_x[:, 0, rl == WALL] = 0.0
        G_x[:, -1, rr == WALL] = 0.0
        F_y[rb == WALL, 0] = 0.0
        F_y[rt == WALL, -1] = 0.0
        G_y[:, rb == WALL, 0] = 0.0
        G_y[:, rt == WALL, -1] = 0.0
        return F_x, G_x, F_y, G_y

    # -- transport -----------------------------------------------------------

    def conserved(self, s, c):
        return s, s * c + self.model.adsorption.value(c)

    def _admit_s(self, s):
        # the maximum-principle proof needs exactly divergence-free face
        # velocities; the linear solve leaves a residual, so the bounds
        # hold up to the divergence defect a step can transport
        ex = max(-float(s.min()), float(s.max()) - 1.0, 0.0)
        if ex > self.max_s_excess:
            self.max_s_excess = ex
        if ex > solver1d._S_BOUND_TOL + self._bound_slack:
            raise RuntimeError(
                "saturation left [0,1] by %.3e at t=%.6g" % (ex, self.t))
        return np.clip(s, 0.0, 1.0)

    def _recover(self, s, q, c_start):
        c, excess = solver1d.recover_concentration(
            self.model, s, q, c_start, self.c_lo, self.c_hi)
        if excess > self.max_c_excess:
            self.max_c_excess = excess
            if excess > solver1d._C_RANGE_TOL:
                _log.warning(
                    "recovered concentration left its data range by %.3e "
                    "at t=%.6g; clipped", excess, self.t)
        return c

    def _check_local_principle(self, c_new, c_x, c_y):
        """Each cell stays inside the hull of its five-point stencil."""
        lo = np.minimum(
            np.minimum(c_x[:, :-2], c_x[:, 2:]),
            np.minimum(c_y[:, :, :-2], c_y[:, :, 2:]))
        lo = np.minimum(lo, c_x[:, 1:-1])
        hi = np.maximum(
            np.maximum(c_x[:, :-2], c_x[:, 2:]),
            np.maximum(c_y[:, :, :-2], c_y[:, :, 2:]))
        hi = np.maximum(hi, c_x[:, 1:-1])
        ex = float(np.maximum(lo - c_new, c_new - hi).max())
        if ex > self.max_local_excess:
            self.max_local_excess = ex
        span = max(1.0, float(self.c_hi.max() - self.c_lo.min()))
        if ex > (solver1d._S_BOUND_TOL + self._bound_slack) * span:
            raise RuntimeError(
                "concentration left its five-point stencil hull by %.3e "
                "at t=%.6g" % (ex, self.t))

    def _euler(self, s, c, dt):
        cell = self.grid.dx * self.grid.dy
        self._bound_slack = dt * self.current_divergence / cell
        F_x, G_x, F_y, G_y = self._fluxes(s, c)
        u, q = self.conserved(s, c)
        u = u - dt * ((F_x[1:] - F_x[:-1]) / self.grid.dx
                      + (F_y[:, 1:] - F_y[:, :-1]) / self.grid.dy)
        q = q - dt * ((G_x[:, 1:] - G_x[:, :-1]) / self.grid.dx
                      + (G_y[:, :, 1:] - G_y[:, :, :-1]) / self.grid.dy)
        s_new = self._admit_s(u)
        c_new = self._recover(s_new, q, c)
        s_x, c_x, s_y, c_y = self.ghost_extend(s, c)
        self._check_local_principle(c_new, c_x, c_y)
        return s_new, c_new, (F_x, G_x, F_y, G_y)

    def _account_boundary(self, dt, stages):
        dx, dy = self.grid.dx, self.grid.dy
        for (F_x, G_x, F_y, G_y), w in stages:
            self.net_water_in += w * dt * (
                F_x[0].sum() * dy - F_x[-1].sum() * dy
                + F_y[:, 0].sum() * dx - F_y[:, -1].sum() * dx)
            self.net_species_in += w * dt * (
                G_x[:, 0].sum(axis=1) * dy - G_x[:, -1].sum(axis=1) * dy
                + G_y[:, :, 0].sum(axis=1) * dx
                - G_y[:, :, -1].sum(axis=1) * dx)

    def _ensure_pressure(self):
        due = (self.velocities is None
               or (self.steps % self.pressure_every == 0
                   and self._pressure_step != self.steps))
        if due:
            self.solve_pressure()
            self._pressure_step = self.steps

    def step(self, dt=None):
        """One transport step; solves pressure first when it is due."""
        self._ensure_pressure()
        dt = self.dt_stable if dt is None else float(dt)
        if self.order == 1:
            s1, c1, fluxes = self._euler(self.s, self.c, dt)
            self._account_boundary(dt, ((fluxes, 1.0),))
            self.s, self.c = s1, c1
        else:
            u0, q0 = self.conserved(self.s, self.c)
            s1, c1, fa = self._euler(self.s, self.c, dt)
            s1b, c1b, fb = self._euler(s1, c1, dt)
            u1b, q1b = self.conserved(s1b, c1b)
            u2 = 0.75 * u0 + 0.25 * u1b
            q2 = 0.75 * q0 + 0.25 * q1b
            s2 = self._admit_s(u2)
            c2 = self._recover(s2, q2, c1b)
            s3, c3, fc = self._euler(s2, c2, dt)
            u3, q3 = self.conserved(s3, c3)
            self.s = self._admit_s((u0 + 2.0 * u3) / 3.0)
            self.c = self._recover(self.s, (q0 + 2.0 * q3) / 3.0, c3)
            w = scheme.RK3_FLUX_WEIGHTS
            self._account_boundary(
                dt, ((fa, w[0]), (fb, w[1]), (fc, w[2])))
        self.t += dt
        self.steps += 1

    def run(self, T, callback=None, record=True):
        while self.t < T - 1e-13:
            self._ensure_pressure()
            dt = min(self.dt_stable, T - self.t)
            self.step(dt)
            if record:
                self._record()
            if callback is not None:
                callback(self)
        return self

    def _record(self):
        water, species = self.mass()
        self.history["t"].append(self.t)
        self.history["dt"].append(self.dt_stable)
        self.history["water"].append(water)
        self.history["species"].append(species)
        self.history["s_min"].append(float(self.s.min()))
        self.history["s_max"].append(float(self.s.max()))
        self.history["p_min"].append(float(self.pressure.min()))
        self.history["p_max"].append(float(self.pressure.max()))

    # -- diagnostics ---------------------------------------------------------

    def mass(self):
        """Cell-integrated water volume and conserved species loads."""
        u, q = self.conserved(self.s, self.c)
        cell = self.grid.dx * self.grid.dy
        return cell * float(u.sum()), cell * q.sum(axis=(1, 2))
