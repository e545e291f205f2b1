"""One-dimensional finite-volume solver for two-phase polymer transport.

Cell averages of the conserved pair (s, s c_l + a_l(c_l)) advance with a
chosen interface flux (exact solution, discontinuous-flux, or upstream
mobility), first order in time or with limited reconstruction and
three-stage strong-stability time stepping.  Boundary cells see frozen
ghost states, matching injection problems where the inflow state is held.

The time step is fixed at the start of a run from a sharp bound on all
wave speeds over the invariant data box, so every step satisfies the
stability constraint lambda * M = cfl.
"""

import logging

import numpy as np

from . import numflux, scheme
from .physics import AffineAdsorption, State, VERTICAL


_log = logging.getLogger(__name__)

_FLUX_NAMES = ("dflu", "godunov", "upstream")

#: roundoff slack allowed on the saturation bounds before a step is rejected
_S_BOUND_TOL = 1e-12
#: recovered concentrations may leave the data range by at most this much
#: before a warning is logged; they are clipped back in either case
_C_RANGE_TOL = 1e-10


def recover_concentration(model, s, q, c_start, c_lo, c_hi):
    """Concentrations solving s c + a(c) = q, clipped to the data range.

    Works for any array shape with components along the first axis.
    Affine adsorption inverts in closed form; otherwise Newton iterates
    from c_start (the map is increasing with derivative >= a' > 0) and
    entries missing a 1e-12 residual after 50 sweeps fall back to
    bisection over the data range.  Returns (c, excess) where excess is
    the largest distance any recovered value lay outside [c_lo, c_hi]
    before clipping.
    """
    ads = model.adsorption
    if isinstance(ads, AffineAdsorption):
        c = (q - ads.a0) / (s + ads.a1)
    else:
        c = np.array(c_start, dtype=float, copy=True)
        tol = 1e-12 * np.maximum(1.0, np.abs(q))
        with np.errstate(invalid="ignore"):
            res = s * c + ads.value(c) - q
            # entries whose residual turns NaN (adsorption probed outside
            # its domain) must stay active so bisection rescues them
            active = ~(np.abs(res) <= tol)
            for _ in range(50):
                if not active.any():
                    break
                c = np.where(active, c - res / (s + ads.deriv(c)), c)
                res = s * c + ads.value(c) - q
                active = ~(np.abs(res) <= tol)
        if active.any():
            c = np.where(
                active,
                _recover_bisect(model, s, q, float(np.min(c_lo)),
                                float(np.max(c_hi))),
                c,
            )
    tail = (None,) * (q.ndim - 1)
    lo = np.asarray(c_lo, dtype=float)[(slice(None),) + tail]
    hi = np.asarray(c_hi, dtype=float)[(slice(None),) + tail]
    excess = max(float(np.maximum(lo - c, c - hi).max()), 0.0) if c.size else 0.0
    return np.clip(c, lo, hi), excess


def _recover_bisect(model, s, q, c_min, c_max):
    ads = model.adsorption
    lo = np.full(q.shape, c_min - 1e-9)
    hi = np.full(q.shape, c_max + 1e-9)
    f_lo = s * lo + ads.value(lo) - q
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = s * mid + ads.value(mid) - q
        keep = (fm < 0.0) == (f_lo < 0.0)
        lo = np.where(keep, mid, lo)
        f_lo = np.where(keep, fm, f_lo)
        hi = np.where(keep, hi, mid)
    return 0.5 * (lo + hi)


class Solver1D:
    """March one 1D problem; state lives as cell averages on [x_lo, x_hi]."""

    def __init__(
        self,
        model,
        s0,
        c0,
        v,
        K=1.0,
        x_lo=0.0,
        x_hi=1.0,
        direction=VERTICAL,
        flux="dflu",
        order=1,
        theta=None,
        cfl=0.5,
        left_state=None,
        right_state=None,
    ):
        if flux not in _FLUX_NAMES:
            raise ValueError("unknown flux %r" % (flux,))
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        # Reconstruction with theta=1 keeps face concentrations ordered
        # wherever the cell data is ordered (each slope is bounded by both
        # neighbouring jumps, so facing values bracket the cell midpoint
        # average); sharper limiters can order a face increasingly, which
        # has no exact interface solution.  The exact flux therefore only
        # admits theta=1.
        if theta is None:
            theta = 1.0 if (flux == "godunov" and order == 2) else 2.0
        if flux == "godunov" and order == 2 and theta > 1.0:
            raise ValueError(
                "the exact interface flux requires theta=1 reconstruction; "
                "sharper limiters can produce increasing face concentrations"
            )
        self.model = model
        self.flux_name = flux
        self.order = int(order)
        self.theta = float(theta)
        self.cfl = float(cfl)
        self.direction = direction

        self.s = np.asarray(s0, dtype=float).copy()
        self.N = self.s.shape[0]
        self.c = np.asarray(c0, dtype=float).reshape(model.m, self.N).copy()
        self.x_lo = float(x_lo)
        self.x_hi = float(x_hi)
        self.h = (self.x_hi - self.x_lo) / self.N
        self.x = self.x_lo + self.h * (np.arange(self.N) + 0.5)

        self.v = float(v)
        K = np.asarray(K, dtype=float)
        self.K = np.broadcast_to(K, (self.N,)).copy()
        if flux == "godunov" and np.ptp(self.K) != 0.0:
            raise ValueError(
                "the exact interface solution requires uniform permeability"
            )

        self.left_state = left_state or State(self.s[0], self.c[:, 0])
        self.right_state = right_state or State(self.s[-1], self.c[:, -1])

        # frozen data box -> frozen dt
        cs = [self.c, self.left_state.c[:, None], self.right_state.c[:, None]]
        call = np.concatenate(cs, axis=1)
        self.c_lo = call.min(axis=1)
        self.c_hi = call.max(axis=1)
        self.max_speed = scheme.max_wave_speed(
            model, self.v, (self.K.min(), self.K.max()), direction,
            self.c_lo, self.c_hi,
        )
        self.dt_stable = self.cfl * self.h / self.max_speed

        self.t = 0.0
        self.steps = 0
        self.outflow_left = 0.0
        self.outflow_right = 0.0
        self.species_out_left = np.zeros(model.m)
        self.species_out_right = np.zeros(model.m)
        # largest bound excursions seen before clipping, for diagnostics
        self.max_s_excess = 0.0
        self.max_c_excess = 0.0
        self.history = {
            "t": [], "water": [], "species": [],
            "tv_c": [], "s_min": [], "s_max": [],
        }

    # -- conserved transform -------------------------------------------------

    def conserved(self, s, c):
        ads = self.model.adsorption
        return s, s * c + ads.value(c)

    def recover(self, s, q, c_start=None):
        """Concentrations from (s, q) with q = s c + a(c).

        Affine adsorption inverts in closed form.  Otherwise Newton starts
        from the previous values (the map c -> s c + a(c) is increasing
        with derivative bounded away from zero) and any entry that has not
        met a 1e-12 residual after 50 sweeps falls back to bisection on
        the data range.  Values outside the data range are clipped; leaving
        it by more than a roundoff allowance is logged.
        """
        if c_start is None:
            c_start = np.broadcast_to(
                (0.5 * (self.c_lo + self.c_hi))[:, None], q.shape
            )
        c, excess = recover_concentration(
            self.model, s, q, c_start, self.c_lo, self.c_hi
        )
        if excess > self.max_c_excess:
            self.max_c_excess = excess
            if excess > _C_RANGE_TOL:
                _log.warning(
                    "recovered concentration left its data range by %.3e "
                    "at t=%.6g; clipped", excess, self.t,
                )
        return c

    # -- interface values ----------------------------------------------------

    def _face_states(self, s, c):
        """(s_l, s_r, c_l, c_r, K_l, K_r) at the N+1 interfaces."""
        gl, gr = self.left_state, self.right_state
        if self.order == 1:
            s_l = np.concatenate([[gl.s], s])
            s_r = np.concatenate([s, [gr.s]])
            c_l = np.concatenate([gl.c[:, None], c], axis=1)
            c_r = np.concatenate([c, gr.c[:, None]], axis=1)
        else:
            s_ext = np.concatenate([[gl.s], s, [gr.s]])
            c_ext = np.concatenate([gl.c[:, None], c, gr.c[:, None]], axis=1)
            s_lo, s_hi = scheme.reconstruct_faces(s_ext, self.theta)
            c_lo, c_hi = scheme.reconstruct_faces(c_ext, self.theta)
            s_l = np.concatenate([[gl.s], s_hi])
            s_r = np.concatenate([s_lo, [gr.s]])
            c_l = np.concatenate([gl.c[:, None], c_hi], axis=1)
            c_r = np.concatenate([c_lo, gr.c[:, None]], axis=1)
        K_l = np.concatenate([[self.K[0]], self.K])
        K_r = np.concatenate([self.K, [self.K[-1]]])
        return s_l, s_r, c_l, c_r, K_l, K_r

    def _interface_fluxes(self, s, c):
        s_l, s_r, c_l, c_r, K_l, K_r = self._face_states(s, c)
        if self.flux_name == "dflu":
            return numflux.dflu_flux_arrays(
                self.model, s_l, s_r, c_l, c_r,
                self.v, K_l, self.v, K_r, self.direction,
            )
        if self.flux_name == "upstream":
            return numflux.upstream_mobility_flux_arrays(
                self.model, s_l, s_r, c_l, c_r,
                self.v, K_l, K_r, self.direction,
            )
        return numflux.godunov_flux_arrays(
            self.model, s_l, s_r, c_l, c_r,
            self.v, self.K[0], self.direction,
        )

    # -- stepping ------------------------------------------------------------

    def _euler(self, s, c, dt):
        F, G = self._interface_fluxes(s, c)
        lam = dt / self.h
        u, q = self.conserved(s, c)
        u = u - lam * (F[1:] - F[:-1])
        q = q - lam * (G[:, 1:] - G[:, :-1])
        s_new = self._admit_s(u)
        c_new = self.recover(s_new, q, c)
        return s_new, c_new, F, G

    def _admit_s(self, s):
        """Assert the saturation bounds (roundoff slack only) and clip."""
        ex = max(-float(s.min()), float(s.max()) - 1.0, 0.0)
        if ex > self.max_s_excess:
            self.max_s_excess = ex
        if ex > _S_BOUND_TOL:
            raise RuntimeError(
                "saturation left [0,1] by %.3e at t=%.6g" % (ex, self.t)
            )
        return np.clip(s, 0.0, 1.0)

    def step(self, dt=None):
        dt = self.dt_stable if dt is None else float(dt)
        if self.order == 1:
            s1, c1, F, G = self._euler(self.s, self.c, dt)
            self._account_boundary(dt, ((F, G, 1.0),))
            self.s, self.c = s1, c1
        else:
            u0, q0 = self.conserved(self.s, self.c)
            s1, c1, Fa, Ga = self._euler(self.s, self.c, dt)
            s1b, c1b, Fb, Gb = self._euler(s1, c1, dt)
            u1b, q1b = self.conserved(s1b, c1b)
            # convex stage combinations act on the conserved variables
            u2 = 0.75 * u0 + 0.25 * u1b
            q2 = 0.75 * q0 + 0.25 * q1b
            s2 = self._admit_s(u2)
            c2 = self.recover(s2, q2, c1b)
            s3, c3, Fc, Gc = self._euler(s2, c2, dt)
            u3, q3 = self.conserved(s3, c3)
            u = (u0 + 2.0 * u3) / 3.0
            q = (q0 + 2.0 * q3) / 3.0
            self.s = self._admit_s(u)
            self.c = self.recover(self.s, q, c3)
            w = scheme.RK3_FLUX_WEIGHTS
            self._account_boundary(
                dt, ((Fa, Ga, w[0]), (Fb, Gb, w[1]), (Fc, Gc, w[2]))
            )
        self.t += dt
        self.steps += 1

    def _account_boundary(self, dt, stages):
        for F, G, w in stages:
            self.outflow_left -= w * dt * F[0]
            self.outflow_right += w * dt * F[-1]
            self.species_out_left -= w * dt * G[:, 0]
            self.species_out_right += w * dt * G[:, -1]

    def run(self, T, callback=None, record=True, require_interior=False):
        """Advance to time T in stable steps.

        With ``record`` the per-step diagnostics (masses, total variation
        of each concentration, saturation range) accumulate in ``history``.
        ``require_interior`` rejects any step after which the boundary
        cells have drifted from the frozen ghost states, which would
        invalidate a comparison against a fan that assumes an unbounded
        domain.
        """
        while self.t < T - 1e-13:
            dt = min(self.dt_stable, T - self.t)
            self.step(dt)
            if record:
                self._record()
            if require_interior:
                self._assert_interior_waves()
            if callback is not None:
                callback(self)
        return self

    def _record(self):
        water, species = self.mass()
        gl, gr = self.left_state, self.right_state
        tv = (
            np.abs(self.c[:, 0] - gl.c)
            + np.abs(np.diff(self.c, axis=1)).sum(axis=1)
            + np.abs(gr.c - self.c[:, -1])
        )
        self.history["t"].append(self.t)
        self.history["water"].append(water)
        self.history["species"].append(species)
        self.history["tv_c"].append(tv)
        self.history["s_min"].append(float(self.s.min()))
        self.history["s_max"].append(float(self.s.max()))

    def _assert_interior_waves(self, tol=1e-8):
        gl, gr = self.left_state, self.right_state
        edges = max(
            abs(self.s[0] - gl.s),
            abs(self.s[-1] - gr.s),
            float(np.abs(self.c[:, 0] - gl.c).max(initial=0.0)),
            float(np.abs(self.c[:, -1] - gr.c).max(initial=0.0)),
        )
        if edges > tol:
            raise RuntimeError(
                "a wave reached the domain boundary at t=%.6g" % self.t
            )

    # -- diagnostics ---------------------------------------------------------

    def mass(self):
        """Cell-integrated conserved quantities (water, species loads)."""
        u, q = self.conserved(self.s, self.c)
        return self.h * u.sum(), self.h * q.sum(axis=1)


def coarsen(u, ratio):
    """Average groups of `ratio` fine cells onto the coarse grid."""
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    if n % ratio:
        raise ValueError("fine grid must refine the coarse grid evenly")
    return u.reshape(u.shape[:-1] + (n // ratio, ratio)).mean(axis=-1)


def l1_distance(u, w, h):
    """Discrete L1 distance of two cell-average fields on the same grid."""
    return float(h * np.sum(np.abs(np.asarray(u) - np.asarray(w))))


def convergence_table(errors, ns):
    """Observed orders log2(e_coarse/e_fine) for successive grid doublings."""
    orders = [float("nan")]
    for k in range(1, len(errors)):
        ratio = ns[k] / ns[k - 1]
        if errors[k] == 0.0 or errors[k - 1] == 0.0:
            orders.append(float("nan"))
            continue
        orders.append(
            float(np.log(errors[k - 1] / errors[k]) / np.log(ratio))
        )
    return orders
