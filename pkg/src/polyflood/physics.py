"""Constitutive laws and flux evaluation for two-phase polymer flooding.

Water containing m dissolved polymer species displaces oil.  The water
fractional flow depends on saturation s and on the concentration vector c
through the water viscosity; each species adsorbs onto the rock according
to an increasing law a_l(c_l).  All evaluators accept scalars or numpy
arrays broadcast against each other, so the same code backs both the
scalar solver API and the vectorized schemes.
"""

import numpy as np

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


class AffineAdsorption:
    """Adsorption a_l(c_l) = a0 + a1*c_l with a1 > 0, shared by all species."""

    def __init__(self, a0=1.0, a1=0.5):
        if a1 <= 0.0:
            raise ValueError("adsorption slope must be positive")
        self.a0 = float(a0)
        self.a1 = float(a1)

    def value(self, c):
        return self.a0 + self.a1 * np.asarray(c, dtype=float)

    def deriv(self, c):
        return np.full_like(np.asarray(c, dtype=float), self.a1)

    def secant(self, c_from, c_to):
        """Chord slope of a between two concentrations; derivative at ties."""
        c_from = np.asarray(c_from, dtype=float)
        c_to = np.asarray(c_to, dtype=float)
        return np.full_like(np.broadcast_arrays(c_from, c_to)[0], self.a1)


class TabulatedAdsorption:
    """Adsorption given by a smooth callable and its derivative.

    The derivative must stay positive on [0, c_max]; this is checked on a
    sample grid when a model is built.
    """

    def __init__(self, func, dfunc):
        self.func = func
        self.dfunc = dfunc

    def value(self, c):
        return np.asarray(self.func(np.asarray(c, dtype=float)), dtype=float)

    def deriv(self, c):
        return np.asarray(self.dfunc(np.asarray(c, dtype=float)), dtype=float)

    def secant(self, c_from, c_to):
        c_from, c_to = np.broadcast_arrays(
            np.asarray(c_from, dtype=float), np.asarray(c_to, dtype=float)
        )
        dc = c_to - c_from
        tie = np.abs(dc) < 1e-14
        safe = np.where(tie, 1.0, dc)
        chord = (self.value(c_to) - self.value(c_from)) / safe
        return np.where(tie, self.deriv(c_from), chord)


class LinearSumViscosity:
    """mu_w(c) = base + sum_l c_l."""

    def __init__(self, base=0.5):
        if base <= 0.0:
            raise ValueError("viscosity base must be positive")
        self.base = float(base)

    def __call__(self, c):
        c = np.asarray(c, dtype=float)
        return self.base + c.sum(axis=0)


class SqrtSumViscosity:
    """mu_w(c) = base + sum_l sqrt(c_l)."""

    def __init__(self, base=0.5):
        if base <= 0.0:
            raise ValueError("viscosity base must be positive")
        self.base = float(base)

    def __call__(self, c):
        c = np.asarray(c, dtype=float)
        return self.base + np.sqrt(np.maximum(c, 0.0)).sum(axis=0)


class AffineViscosity:
    """mu_w(c) = base + sum_l coef_l * c_l with coef_l >= 0."""

    def __init__(self, base, coefs):
        coefs = np.asarray(coefs, dtype=float)
        if base <= 0.0 or np.any(coefs < 0.0):
            raise ValueError("viscosity must stay positive and nondecreasing")
        self.base = float(base)
        self.coefs = coefs

    def __call__(self, c):
        c = np.asarray(c, dtype=float)
        return self.base + np.tensordot(self.coefs, c, axes=(0, 0))


class State:
    """Point value (s, c) with s in [0,1] and c componentwise in [0, c_max]."""

    __slots__ = ("s", "c")

    def __init__(self, s, c):
        self.s = float(s)
        self.c = np.atleast_1d(np.asarray(c, dtype=float)).copy()
        if not (-1e-12 <= self.s <= 1.0 + 1e-12):
            raise ValueError("saturation %g outside [0,1]" % self.s)
        if np.any(self.c < -1e-12):
            raise ValueError("negative concentration")

    def __repr__(self):
        return "State(s=%g, c=%s)" % (self.s, np.array2string(self.c))


class FluxContext:
    """Frozen local flux data: total velocity, permeability, orientation."""

    __slots__ = ("v", "K", "direction")

    def __init__(self, v, K, direction=VERTICAL):
        if direction not in (HORIZONTAL, VERTICAL):
            raise ValueError("direction must be horizontal or vertical")
        if K <= 0.0:
            raise ValueError("permeability must be positive")
        self.v = float(v)
        self.K = float(K)
        self.direction = direction

    def same_coefficients(self, other):
        return (
            self.v == other.v
            and self.K == other.K
            and self.direction == other.direction
        )


class PhysicsModel:
    """Fluid and rock properties for the (m+1)-equation flow system.

    Gravity enters through the product densities rho_w*g and rho_o*g; the
    buoyancy term acts only on vertical flux contexts and only when
    gravity_on is set.
    """

    def __init__(
        self,
        m=2,
        mu_o=1.0,
        water_viscosity=None,
        adsorption=None,
        rho_w_g=2.0,
        rho_o_g=1.0,
        gravity_on=True,
        c_max=1.0,
    ):
        if mu_o <= 0.0:
            raise ValueError("oil viscosity must be positive")
        if m < 0:
            raise ValueError("component count must be nonnegative")
        self.m = int(m)
        self.mu_o = float(mu_o)
        self.water_viscosity = water_viscosity or LinearSumViscosity(0.5)
        self.adsorption = adsorption or AffineAdsorption(1.0, 0.5)
        self.rho_w_g = float(rho_w_g)
        self.rho_o_g = float(rho_o_g)
        self.gravity_on = bool(gravity_on)
        self.c_max = float(c_max)
        self._check_laws()

    def _check_laws(self):
        cs = np.linspace(0.0, self.c_max, 33)
        grid = np.tile(cs, (max(self.m, 1), 1))
        if self.m > 0:
            if np.any(self.adsorption.deriv(cs) <= 0.0):
                raise ValueError("adsorption law must be strictly increasing")
            mu = self.water_viscosity(grid)
            if np.any(mu <= 0.0):
                raise ValueError("water viscosity must be positive")
            if np.any(np.diff(mu) < -1e-12):
                raise ValueError("water viscosity must be nondecreasing in c")

    # -- gravity ------------------------------------------------------------

    def gamma(self, direction=VERTICAL):
        """Buoyancy factor (rho_w - rho_o)*g, zero when it does not act."""
        if self.gravity_on and direction == VERTICAL:
            return self.rho_w_g - self.rho_o_g
        return 0.0

    # -- basic constitutive quantities --------------------------------------

    def water_mobility(self, s, c):
        s = np.asarray(s, dtype=float)
        return s * s / self.water_viscosity(c)

    def oil_mobility(self, s):
        s = np.asarray(s, dtype=float)
        return (1.0 - s) * (1.0 - s) / self.mu_o

    def fractional_flow(self, s, c):
        lw = self.water_mobility(s, c)
        lo = self.oil_mobility(s)
        return lw / (lw + lo)

    # -- flux and its saturation derivative ---------------------------------

    def flux(self, s, c, v, K, direction=VERTICAL):
        """Water flux F(s,c) = [v - (rho_w-rho_o) g K lambda_o] f(s,c)."""
        g = self.gamma(direction)
        f = self.fractional_flow(s, c)
        if g == 0.0:
            return np.asarray(v, dtype=float) * f
        return (np.asarray(v, dtype=float) - g * np.asarray(K, dtype=float) * self.oil_mobility(s)) * f

    def flux_deriv_s(self, s, c, v, K, direction=VERTICAL):
        """Analytic dF/ds; vanishes at s=0 and s=1."""
        s = np.asarray(s, dtype=float)
        mu_w = self.water_viscosity(c)
        lw = s * s / mu_w
        lo = (1.0 - s) * (1.0 - s) / self.mu_o
        pref = 2.0 * s * (1.0 - s) / (mu_w * self.mu_o * (lw + lo) ** 2)
        g = self.gamma(direction)
        drive = np.asarray(v, dtype=float)
        if g != 0.0:
            drive = drive + g * np.asarray(K, dtype=float) * (s * lw - (1.0 - s) * lo)
        return pref * drive

    def flux_state(self, state, ctx):
        return float(self.flux(state.s, state.c, ctx.v, ctx.K, ctx.direction))

    # -- interior critical saturation ---------------------------------------

    def critical_saturation(self, c, v, K, direction=VERTICAL):
        """Interior root of dF/ds when gravity makes the flux non-monotone.

        Solves r s^3 - (1-s)^3 + z = 0 with r = mu_o/mu_w and
        z = v mu_o / ((rho_w - rho_o) g K) by the closed cubic formula,
        falling back to bisection when cancellation degrades it.  Returns
        None when no interior critical point exists.  The point is a
        minimum of F when (rho_w-rho_o) g K > 0 and a maximum otherwise.
        """
        g = self.gamma(direction)
        if g == 0.0:
            return None
        gK = g * float(K)
        r = self.mu_o / float(self.water_viscosity(np.asarray(c, dtype=float)))
        z = float(v) * self.mu_o / gK
        # strictly increasing cubic: interior root iff endpoint signs differ
        if not (z - 1.0 < 0.0 and r + z > 0.0):
            return None
        s = _cubic_root_closed_form(r, z)
        if s is not None and 0.0 < s < 1.0:
            resid = r * s ** 3 - (1.0 - s) ** 3 + z
            if abs(resid) <= 1e-10 * (abs(r) + abs(z) + 1.0):
                return s
        return _cubic_root_bisect(r, z)

    def argmin_flux(self, c, v, K, direction=VERTICAL):
        """Global minimizer of F(.,c) over [0,1]; ties go to the smaller s."""
        candidates = [0.0, 1.0]
        g = self.gamma(direction)
        if g != 0.0 and g * K > 0.0:
            sc = self.critical_saturation(c, v, K, direction)
            if sc is not None:
                candidates.append(sc)
        vals = [float(self.flux(s, c, v, K, direction)) for s in candidates]
        best = min(range(len(vals)), key=lambda i: (vals[i], candidates[i]))
        return candidates[best]

    def argmin_flux_arrays(self, c, v, K, direction=VERTICAL):
        """Vectorized argmin of F(.,c) over [0,1] for stacked concentration data.

        c has shape (m, ...) with v, K broadcast against its trailing shape.
        Since F(0,c)=0 and F(1,c)=v, the endpoint minimum sits at s=1 exactly
        when v < 0; an interior candidate exists only when buoyancy opposes
        the drive strongly enough to open a trough.
        """
        c = np.asarray(c, dtype=float)
        shape = np.broadcast_shapes(c.shape[1:], np.shape(v), np.shape(K))
        v = np.broadcast_to(np.asarray(v, dtype=float), shape)
        theta = np.where(v < 0.0, 1.0, 0.0)
        g = self.gamma(direction)
        if g <= 0.0:
            return theta
        K = np.broadcast_to(np.asarray(K, dtype=float), shape)
        r = np.broadcast_to(self.mu_o / self.water_viscosity(c), shape)
        sc = _cubic_root_arrays(r, v * self.mu_o / (g * K))
        have = ~np.isnan(sc)
        if np.any(have):
            f_int = np.asarray(self.flux(np.where(have, sc, 0.5), c, v, K, direction))
            f_end = np.minimum(0.0, v)
            take = have & ((f_int < f_end) | ((f_int == f_end) & (theta == 1.0)))
            theta = np.where(take, sc, theta)
        return theta

    # -- eigenvalues ---------------------------------------------------------

    def eigenvalues(self, s, c, v, K, direction=VERTICAL):
        """(lambda_s, lambda_c[l]) of the quasilinear system at a state."""
        lam_s = self.flux_deriv_s(s, c, v, K, direction)
        F = self.flux(s, c, v, K, direction)
        h = self.adsorption.deriv(np.asarray(c, dtype=float))
        lam_c = F / (np.asarray(s, dtype=float) + h)
        return lam_s, lam_c


def _cubic_root_closed_form(r, z):
    """Real root of r s^3 - (1-s)^3 + z via the depressed-cubic radicals."""
    alpha = -27.0 * r + 27.0 * r * r - 27.0 * z - 54.0 * r * z - 27.0 * r * r * z
    beta = 2916.0 * r ** 3 + alpha * alpha
    if beta < 0.0:
        return None
    t = alpha + np.sqrt(beta)
    if t <= 0.0:
        return None
    cr = t ** (1.0 / 3.0)
    tw = 2.0 ** (1.0 / 3.0)
    s = (1.0 - 3.0 * tw * r / cr + cr / (3.0 * tw)) / (1.0 + r)
    if not np.isfinite(s):
        return None
    return float(s)


def _cubic_root_bisect(r, z, tol=1e-14):
    """Bisection for the unique root of the increasing cubic on [0,1]."""
    lo, hi = 0.0, 1.0
    flo = z - 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = r * mid ** 3 - (1.0 - mid) ** 3 + z
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def _cubic_root_arrays(r, z):
    """Vectorized interior cubic root; NaN where no interior root exists."""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    if r.shape != z.shape:
        r, z = np.broadcast_arrays(r, z)
    out = np.full(r.shape, np.nan)
    # the cubic is strictly increasing, so a root lies in (0,1) exactly
    # when the endpoint values z-1 and r+z straddle zero
    inside = (z < 1.0) & (r + z > 0.0)
    if not np.any(inside):
        return out
    rp1 = 1.0 + r
    alpha = 27.0 * (r * (r - 1.0) - z * rp1 * rp1)
    # negative beta or nonpositive alpha+sqrt(beta) surface as NaN/inf
    # and fail the residual check, landing in the bisection fallback
    with np.errstate(invalid="ignore", divide="ignore"):
        cr = np.cbrt(alpha + np.sqrt(2916.0 * (r * r * r) + alpha * alpha))
        tw = 2.0 ** (1.0 / 3.0)
        s = (1.0 - 3.0 * tw * r / cr + cr / (3.0 * tw)) / rp1
        one_ms = 1.0 - s
        resid = r * (s * s * s) - one_ms * one_ms * one_ms + z
        good = (inside & np.isfinite(s) & (s > 0.0) & (s < 1.0)
                & (np.abs(resid) <= 1e-10 * (np.abs(r) + np.abs(z) + 1.0)))
    out[good] = s[good]
    redo = inside & ~good
    if np.any(redo):
        rr = r[redo]
        zz = z[redo]
        llo = np.zeros(rr.shape)
        lhi = np.ones(rr.shape)
        for _ in range(60):
            mid = 0.5 * (llo + lhi)
            om = 1.0 - mid
            fm = rr * (mid * mid * mid) - om * om * om + zz
            neg = fm < 0.0
            llo = np.where(neg, mid, llo)
            lhi = np.where(neg, lhi, mid)
        out[redo] = 0.5 * (llo + lhi)
    return out
