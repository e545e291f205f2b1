"""Spatial reconstruction, strong-stability time stepping, CFL bounds.

The solvers advance cell averages of the conserved pair (s, s c + a(c)).
Second-order spatial accuracy comes from limited linear reconstruction of
the primitive fields (saturation and concentrations) inside each cell;
time accuracy from the three-stage strong-stability-preserving
Runge-Kutta combination, whose stage fluxes also yield time-integrated
boundary fluxes with weights 1/6, 1/6, 2/3.
"""

import numpy as np

# stage weights of the three-stage strong-stability scheme, used to
# accumulate time-integrated boundary fluxes exactly as the state sees them
RK3_FLUX_WEIGHTS = (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0)


def minmod3(a, b, c):
    """Componentwise minmod of three slope candidates."""
    pos = np.minimum(np.minimum(a, b), c)
    neg = np.maximum(np.maximum(a, b), c)
    out = np.where((a > 0.0) & (b > 0.0) & (c > 0.0), pos, 0.0)
    return np.where((a < 0.0) & (b < 0.0) & (c < 0.0), neg, out)


def limited_slopes(u, theta=2.0):
    """Limited cell slopes for a field with one ghost value on each side.

    u has shape (..., N+2); the result has shape (..., N).  theta=1 gives
    the most dissipative limiter, theta=2 the sharpest.
    """
    if not 1.0 <= theta <= 2.0:
        raise ValueError("limiter parameter must lie in [1, 2]")
    left = u[..., 1:-1] - u[..., :-2]
    right = u[..., 2:] - u[..., 1:-1]
    centered = 0.5 * (u[..., 2:] - u[..., :-2])
    return minmod3(theta * left, centered, theta * right)


def reconstruct_faces(u, theta=2.0):
    """Face values (u_left_face, u_right_face) of each interior cell.

    u carries one ghost on each side; both outputs have shape (..., N)
    holding the reconstructed value at the cell's left and right edge.
    """
    slope = limited_slopes(u, theta)
    mid = u[..., 1:-1]
    return mid - 0.5 * slope, mid + 0.5 * slope


def ssp_rk3_combine(u0, u1, u2, stage):
    """State entering the next stage of the strong-stability scheme.

    Stage 0: u1 = u0 + dt L(u0)        (caller passes the Euler result)
    Stage 1: u2 = 3/4 u0 + 1/4 (u1 + dt L(u1))
    Stage 2: u  = 1/3 u0 + 2/3 (u2 + dt L(u2))
    Callers compute the Euler update themselves; this helper applies the
    convex combination for stages 1 and 2.
    """
    if stage == 1:
        return 0.75 * u0 + 0.25 * u1
    if stage == 2:
        return (u0 + 2.0 * u2) / 3.0
    raise ValueError("combination applies to stages 1 and 2")


def cfl_dt(M, dx, dy=None, dimension=1, safety=1.0):
    """Largest stable time step for the given wave-speed bound.

    1D: dt = safety * dx / (2M), enforcing lambda*M <= 1/2.
    2D: dt = safety * min(dx, dy) / (4M), enforcing
    max(lambda_x*M, lambda_y*M) <= 1/4.
    """
    if M <= 0.0:
        raise ValueError("wave-speed bound must be positive")
    if not 0.0 < safety <= 1.0:
        raise ValueError("safety factor must lie in (0, 1]")
    if dimension == 1:
        return safety * dx / (2.0 * M)
    if dimension == 2:
        if dy is None:
            dy = dx
        return safety * min(dx, dy) / (4.0 * M)
    raise ValueError("dimension must be 1 or 2")


def max_wave_speed(model, v, K, direction, c_lo, c_hi, refine=True):
    """Sharp bound on all characteristic speeds over a data box.

    Bounds max(|dF/ds|, |F|/(s+a')) over s in [0,1], c in [c_lo, c_hi],
    and v, K ranging over the supplied scalars or (min, max) pairs.  Both
    F and dF/ds are affine in (v, gamma*K) at fixed (s, mu_w), so the
    extremes in the coefficients sit at box corners; the water viscosity
    enters as a scalar, scanned over its own range.  The s-extremum is
    polished by golden-section refinement around the scan argmax.
    """
    v_lo, v_hi = _as_range(v)
    K_lo, K_hi = _as_range(K)
    g = model.gamma(direction)
    c_lo = np.atleast_1d(np.asarray(c_lo, dtype=float))
    c_hi = np.atleast_1d(np.asarray(c_hi, dtype=float))
    mu_lo = float(model.water_viscosity(c_lo))
    mu_hi = float(model.water_viscosity(c_hi))
    cc = np.concatenate([c_lo, c_hi])
    # no species: only the saturation family contributes
    h_min = float(np.min(model.adsorption.deriv(cc))) if cc.size else np.inf

    s = np.linspace(0.0, 1.0, 1025)
    best = 0.0
    corners = {(v_lo, K_lo), (v_lo, K_hi), (v_hi, K_lo), (v_hi, K_hi)}
    for mu_w in np.linspace(mu_lo, mu_hi, 17):
        for vv, KK in corners:
            for fun in (
                lambda t, vv=vv, KK=KK, mu_w=mu_w: np.abs(
                    _deriv_at_mu(model, t, mu_w, vv, KK, g)
                ),
                lambda t, vv=vv, KK=KK, mu_w=mu_w: np.abs(
                    _flux_at_mu(model, t, mu_w, vv, KK, g)
                ) / (t + h_min),
            ):
                vals = fun(s)
                k = int(np.argmax(vals))
                cand = float(vals[k])
                if refine and 0 < k < s.size - 1:
                    cand = max(cand, _golden_max(fun, s[k - 1], s[k + 1]))
                best = max(best, cand)
    return best


def _as_range(x):
    if np.ndim(x) == 0:
        return float(x), float(x)
    x = np.asarray(x, dtype=float)
    return float(x.min()), float(x.max())


def _flux_at_mu(model, s, mu_w, v, K, g):
    lw = s * s / mu_w
    lo = (1.0 - s) ** 2 / model.mu_o
    return (v - g * K * lo) * lw / (lw + lo)


def _deriv_at_mu(model, s, mu_w, v, K, g):
    lw = s * s / mu_w
    lo = (1.0 - s) ** 2 / model.mu_o
    pref = 2.0 * s * (1.0 - s) / (mu_w * model.mu_o * (lw + lo) ** 2)
    return pref * (v + g * K * (s * lw - (1.0 - s) * lo))


def _golden_max(fun, lo, hi, iters=60):
    """Golden-section maximization on a bracket around a scan argmax."""
    phi = 0.5 * (np.sqrt(5.0) - 1.0)
    a, b = float(lo), float(hi)
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1 = float(fun(np.asarray(x1)))
    f2 = float(fun(np.asarray(x2)))
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = float(fun(np.asarray(x2)))
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = float(fun(np.asarray(x1)))
    return max(f1, f2)
