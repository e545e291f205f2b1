"""Exact Riemann solutions for the two-phase polymer flooding system.

The system couples a scalar saturation law with linearly degenerate
concentration fields.  A Riemann solution is a fan of three pieces: a group
of saturation waves on the upstream concentration curve, a single
concentration contact whose speed matches the chord of the adsorption law,
and a second group of saturation waves on the downstream curve.  Saturation
groups are built from convex/concave envelopes of the flux restricted to
one curve, so composite shock-rarefaction waves come out naturally where
the flux inflects.

The contact is located by candidate search: it either leaves directly from
an end state or attaches tangentially to one of the groups (the ray from
(-hbar, 0) tangent to a flux curve).  Every candidate is verified against
the wave-speed ordering and the survivors must agree; well-posed data keep
exactly one composition.

Only jumps with every concentration component nonincreasing across the
interface are constructed (at least as much polymer upstream); the reverse
ordering is refused.  Wave structure narrower than the internal sampling
grid is represented to second order in the grid spacing.
"""

import math

import numpy as np

from .physics import State

_GRID = 1537          # curve sampling for envelopes and root scans
_SPEED_TOL = 1e-9     # admissibility slack on wave-speed comparisons
_ZERO_WAVE = 1e-12    # waves thinner than this in s are dropped

SHOCK = "shock"
RAREFACTION = "rarefaction"
CONTACT = "contact"


class RiemannError(Exception):
    """Construction failed; indicates a bug or ill-posed data."""


class UnsupportedConfiguration(RiemannError):
    """Input outside the constructed class of Riemann problems."""


class Wave:
    """One wave of the fan: states on both sides and a speed range."""

    __slots__ = ("kind", "left", "right", "speed_lo", "speed_hi", "curve")

    def __init__(self, kind, left, right, speed_lo, speed_hi, curve=None):
        self.kind = kind
        self.left = left
        self.right = right
        self.speed_lo = float(speed_lo)
        self.speed_hi = float(speed_hi)
        self.curve = curve

    def __repr__(self):
        return "Wave(%s, s:%.6g->%.6g, speed %.6g..%.6g)" % (
            self.kind, self.left.s, self.right.s, self.speed_lo, self.speed_hi
        )


class WaveFan:
    """Ordered waves of a Riemann solution plus the flanking states."""

    def __init__(self, left, right, waves, model, ctx, case=""):
        self.left = left
        self.right = right
        self.waves = waves
        self.model = model
        self.ctx = ctx
        self.case = case

    def speeds(self):
        return [(w.speed_lo, w.speed_hi) for w in self.waves]

    def sample(self, xi):
        return sample(self, xi)


class RiemannProblem:
    """Left/right states and local flux data for one interface."""

    def __init__(self, left, right, ctx_left, ctx_right, model):
        if model.m > 2:
            raise UnsupportedConfiguration(
                "exact construction is limited to at most two species"
            )
        if len(left.c) != model.m or len(right.c) != model.m:
            raise ValueError("state concentration size does not match model")
        self.left = left
        self.right = right
        self.ctx_left = ctx_left
        self.ctx_right = ctx_right
        self.model = model


class _Curve:
    """Flux restricted to one concentration vector and one context.

    Scalar evaluations run on plain floats; this is the hot path of the
    envelope refinements and the rarefaction inversions.
    """

    __slots__ = ("model", "c", "ctx", "muw", "muo", "gK", "v", "_crit")

    def __init__(self, model, c, ctx):
        self.model = model
        self.c = np.asarray(c, dtype=float)
        self.ctx = ctx
        self.muw = float(model.water_viscosity(self.c))
        self.muo = float(model.mu_o)
        self.gK = model.gamma(ctx.direction) * ctx.K
        self.v = ctx.v
        self._crit = model.critical_saturation(self.c, ctx.v, ctx.K, ctx.direction)

    def F(self, s):
        lw = s * s / self.muw
        lo = (1.0 - s) * (1.0 - s) / self.muo
        return (self.v - self.gK * lo) * lw / (lw + lo)

    def dF(self, s):
        lw = s * s / self.muw
        lo = (1.0 - s) * (1.0 - s) / self.muo
        pref = 2.0 * s * (1.0 - s) / (self.muw * self.muo * (lw + lo) ** 2)
        return pref * (self.v + self.gK * (s * lw - (1.0 - s) * lo))

    def critical(self):
        return self._crit

    def state(self, s):
        return State(s, self.c)

    def check_shape(self):
        """Refuse fluxes with an interior local maximum."""
        s = np.linspace(0.0, 1.0, _GRID)
        d = self.dF(s[1:-1])
        sign = np.sign(d[np.abs(d) > 1e-13])
        if sign.size and np.any(np.diff(sign) < 0):
            raise UnsupportedConfiguration(
                "flux has an interior local maximum; construction needs a "
                "single-trough or monotone profile"
            )


def _hull_indices(x, y, lower):
    """Andrew monotone-chain hull of points sorted by x; returns indices."""
    keep = []
    sgn = 1.0 if lower else -1.0
    for i in range(len(x)):
        while len(keep) >= 2:
            a, b = keep[-2], keep[-1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a])
            if sgn * cross <= 0.0:
                keep.pop()
            else:
                break
        keep.append(i)
    return keep


def _bisect(fun, lo, hi, iters=80):
    """Sign-change bisection; assumes fun(lo) and fun(hi) differ in sign."""
    flo = fun(lo)
    if flo == 0.0:
        return lo
    if fun(hi) == 0.0:
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _refine_tangency(curve, lo, hi, slope_of):
    """Solve dF(s) = slope_of(s) on [lo, hi]; None without a sign change."""
    g = lambda t: curve.dF(t) - slope_of(t)
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if (glo < 0.0) == (ghi < 0.0):
        return None
    return _bisect(g, lo, hi)


def _scalar_waves(curve, a, b):
    """Entropy wave group from value a to value b along one flux curve.

    Uses the lower convex envelope of the flux for a < b and the upper
    concave envelope for a > b.  Returns waves ordered by increasing speed;
    shock endpoints interior to [min, max] are polished onto the tangency
    conditions so attached waves share speeds to roundoff.
    """
    if a == b:
        return []
    increasing = a < b
    lo, hi = (a, b) if increasing else (b, a)
    s = np.linspace(lo, hi, _GRID)
    sc = curve.critical()
    if sc is not None and lo < sc < hi:
        s = np.unique(np.append(s, sc))
    F = np.asarray(curve.F(s), dtype=float)
    keep = _hull_indices(s, F, lower=increasing)
    spacing = (hi - lo) / (_GRID - 1)
    scale = max(float(np.max(np.abs(F))), 1e-30)

    # classify hull edges (sample-index space) and merge curve-following runs
    runs = []  # ["curve", i0, i1] or ["chord", i, j], with i < j
    for k in range(len(keep) - 1):
        i, j = keep[k], keep[k + 1]
        shock = False
        if j - i > 1:
            midm = 0.5 * (s[i] + s[j])
            dev = curve.F(midm) - 0.5 * (F[i] + F[j])
            shock = (dev if increasing else -dev) > 1e-10 * scale
        if shock:
            runs.append(["chord", i, j])
        elif runs and runs[-1][0] == "curve" and runs[-1][2] == i:
            runs[-1][2] = j
        else:
            runs.append(["curve", i, j])
    if not increasing:
        runs = runs[::-1]

    # refine every chord; endpoints may pull inward off a or b when the
    # entry/exit tangency test shows a curve-following piece hides there
    chords = []  # (s_in, s_out, sigma) in traversal order
    for kind, i, j in runs:
        if kind != "chord":
            continue
        p, q = _refine_chord(curve, float(s[i]), float(s[j]), lo, hi, spacing,
                             increasing)
        s_in, s_out = (p, q) if increasing else (q, p)
        if abs(q - p) < 1e-13:
            sigma = curve.dF(0.5 * (p + q))
        else:
            sigma = (curve.F(q) - curve.F(p)) / (q - p)
        chords.append((s_in, s_out, sigma))

    # assemble: every gap between a, the chords, and b is a rarefaction
    waves = []
    cursor = a
    for s_in, s_out, sigma in chords:
        if abs(s_in - cursor) > _ZERO_WAVE:
            waves.append(
                Wave(RAREFACTION, curve.state(cursor), curve.state(s_in),
                     curve.dF(cursor), curve.dF(s_in), curve=curve)
            )
        if abs(s_out - s_in) > _ZERO_WAVE:
            waves.append(
                Wave(SHOCK, curve.state(s_in), curve.state(s_out), sigma, sigma,
                     curve=curve)
            )
        cursor = s_out
    if abs(b - cursor) > _ZERO_WAVE:
        waves.append(
            Wave(RAREFACTION, curve.state(cursor), curve.state(b),
                 curve.dF(cursor), curve.dF(b), curve=curve)
        )

    prev_s = a
    for w in waves:
        if abs(w.left.s - prev_s) > 1e-12:
            raise RiemannError("wave group lost state continuity")
        prev_s = w.right.s
    if waves and abs(waves[-1].right.s - b) > 1e-12:
        raise RiemannError("wave group does not span its states")
    return waves


def _refine_chord(curve, p, q, lo, hi, spacing, increasing):
    """Polish chord endpoints onto their curve tangencies.

    Endpoints interior to [lo, hi] always sit on tangencies.  Endpoints at
    lo or hi stay put unless the entry/exit characteristic inequality
    F'(entry) >= sigma >= F'(exit) fails there; a failure means the true
    envelope follows the curve briefly before the chord, so the endpoint is
    released and pulled inward onto its tangency.
    """

    def chord_slope(t, other):
        if abs(t - other) < 1e-13:
            return curve.dF(other)
        return (curve.F(t) - curve.F(other)) / (t - other)

    def polish_inner(e, other):
        return _refine_tangency(
            curve, max(lo, e - 2.0 * spacing), min(hi, e + 2.0 * spacing),
            lambda t: chord_slope(t, other),
        )

    def release(e, other):
        # march inward until the tangency residual changes sign, then bisect
        g = lambda t: curve.dF(t) - chord_slope(t, other)
        ge = g(e)
        if ge == 0.0:
            return e
        step = spacing if other > e else -spacing
        width = 2.0
        t_prev = e
        while True:
            t = e + width * step
            if (t - other) * step >= 0.0:
                t = other - 1e-13 * step
            if (g(t) < 0.0) != (ge < 0.0):
                lo_b, hi_b = sorted((t_prev, t))
                return _bisect(g, lo_b, hi_b)
            if abs(t - other) <= 1e-12:
                return e  # no tangency found; keep the endpoint
            t_prev = t
            width *= 4.0

    p_free = min(p - lo, hi - p) > 1e-13
    q_free = min(q - lo, hi - q) > 1e-13
    for _ in range(12):
        moved = 0.0
        if p_free:
            newp = polish_inner(p, q)
            if newp is not None:
                moved = max(moved, abs(newp - p))
                p = newp
        if q_free:
            newq = polish_inner(q, p)
            if newq is not None:
                moved = max(moved, abs(newq - q))
                q = newq
        if moved < 1e-14:
            # entry/exit characteristic test on the pinned endpoints
            sigma = chord_slope(p, q)
            slack = 1e-12 * max(1.0, abs(sigma))
            s_in, s_out = (p, q) if increasing else (q, p)
            split = False
            if not (p_free if increasing else q_free):
                if curve.dF(s_in) < sigma - slack:
                    t = release(s_in, s_out)
                    if abs(t - s_in) > 1e-13:
                        if increasing:
                            p, p_free = t, True
                        else:
                            q, q_free = t, True
                        split = True
            if not (q_free if increasing else p_free):
                if curve.dF(s_out) > sigma + slack:
                    t = release(s_out, s_in)
                    if abs(t - s_out) > 1e-13:
                        if increasing:
                            q, q_free = t, True
                        else:
                            p, p_free = t, True
                        split = True
            if not split:
                break
    return p, q


def _group_speed_range(waves):
    if not waves:
        return math.inf, -math.inf
    return waves[0].speed_lo, waves[-1].speed_hi


def _ray_tangencies(curve, hbar):
    """Roots of dF(s)*(s + hbar) = F(s) on (0, 1)."""
    s = np.linspace(0.0, 1.0, _GRID)
    g = np.asarray(curve.dF(s)) * (s + hbar) - np.asarray(curve.F(s))
    fun = lambda t: curve.dF(t) * (t + hbar) - curve.F(t)
    roots = []
    for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
        r = _bisect(fun, float(s[i]), float(s[i + 1]))
        if 1e-12 < r < 1.0 - 1e-12:
            roots.append(r)
    return roots


def _ray_crossings(curve, hbar, sigma):
    """Roots of F(s) = sigma*(s + hbar) on [0, 1].

    The domain endpoints are frequent exact crossings (the flux vanishes at
    s=0 and equals the total velocity at s=1) that roundoff can hide from
    the sign-change scan, so they are admitted on a small absolute slack.
    """
    s = np.linspace(0.0, 1.0, _GRID)
    phi = np.asarray(curve.F(s)) - sigma * (s + hbar)
    fun = lambda t: curve.F(t) - sigma * (t + hbar)
    roots = [float(s[i]) for i in np.nonzero(phi == 0.0)[0]]
    tol = 1e-11 * max(1.0, abs(sigma) * (1.0 + hbar), abs(curve.v))
    if abs(phi[0]) <= tol:
        roots.append(0.0)
    if abs(phi[-1]) <= tol:
        roots.append(1.0)
    for i in np.nonzero(np.sign(phi[:-1]) * np.sign(phi[1:]) < 0)[0]:
        roots.append(_bisect(fun, float(s[i]), float(s[i + 1])))
    # a nearly tangent ray crosses in a pair too close for the node scan;
    # recover such pairs from interior extrema of phi via its derivative
    dphi = np.asarray(curve.dF(s)) - sigma
    dfun = lambda t: curve.dF(t) - sigma
    for i in np.nonzero(np.sign(dphi[:-1]) * np.sign(dphi[1:]) < 0)[0]:
        e = _bisect(dfun, float(s[i]), float(s[i + 1]))
        pe = fun(e)
        if abs(pe) <= tol:
            roots.append(e)
            continue
        if np.sign(pe) * np.sign(phi[i]) < 0:
            roots.append(_bisect(fun, float(s[i]), e))
        if np.sign(pe) * np.sign(phi[i + 1]) < 0:
            roots.append(_bisect(fun, e, float(s[i + 1])))
    roots.sort()
    out = []
    for r in roots:
        if not out or r - out[-1] > 1e-12:
            out.append(r)
    return out


def _chord_slope_bar(model, left_state, right_state):
    """Shared adsorption chord slope across a concentration jump."""
    ads = model.adsorption
    slopes = [
        float(ads.secant(left_state.c[l], right_state.c[l]))
        for l in range(model.m)
        if left_state.c[l] != right_state.c[l]
    ]
    if not slopes:
        return float(np.min(ads.deriv(left_state.c)))
    span = max(slopes) - min(slopes)
    if span > 1e-10 * max(abs(x) for x in slopes):
        raise UnsupportedConfiguration(
            "species adsorb with different chord slopes across this jump; "
            "a single contact cannot carry it"
        )
    return slopes[0]


def match_c_wave(model, left_state, target_c, ctx):
    """State on the far side of a concentration jump from a given near state.

    Returns (s_bar, sigma): the downstream saturation solving
    F(s_bar, c_down)/(s_bar + hbar) = F(s, c_up)/(s + hbar) with a
    nonnegative flux slope at the landing point, and the contact speed.
    Among several admissible landings the smallest is returned.
    """
    target = np.asarray(target_c, dtype=float)
    hbar = _chord_slope_bar(model, left_state, State(left_state.s, target))
    curve_l = _Curve(model, left_state.c, ctx)
    curve_r = _Curve(model, target, ctx)
    sigma = curve_l.F(left_state.s) / (left_state.s + hbar)
    good = [
        r for r in _ray_crossings(curve_r, hbar, sigma)
        if curve_r.dF(r) >= -_SPEED_TOL
    ]
    if not good:
        raise RiemannError("no admissible matched state across the jump")
    return good[0], sigma


def solve(problem):
    """Construct the full wave fan for one Riemann problem."""
    model = problem.model
    if not problem.ctx_left.same_coefficients(problem.ctx_right):
        raise UnsupportedConfiguration(
            "interface jumps in velocity or permeability are handled by the "
            "interface fluxes, not by the exact fan"
        )
    ctx = problem.ctx_left
    sL, sR = problem.left.s, problem.right.s
    cL, cR = problem.left.c, problem.right.c

    curve_l = _Curve(model, cL, ctx)
    curve_l.check_shape()

    if np.array_equal(cL, cR):
        waves = _scalar_waves(curve_l, sL, sR)
        fan = WaveFan(problem.left, problem.right, waves, model, ctx, case="scalar")
        _validate_fan(fan)
        return fan

    if np.any(cL < cR):
        raise UnsupportedConfiguration(
            "construction requires every species to be nonincreasing across "
            "the interface (at least as much polymer upstream)"
        )

    curve_r = _Curve(model, cR, ctx)
    curve_r.check_shape()
    hbar = _chord_slope_bar(model, problem.left, problem.right)

    candidates = [("left-end", sL, curve_l.F(sL) / (sL + hbar), None)]
    for t in _ray_tangencies(curve_l, hbar):
        candidates.append(("left-tangent", t, curve_l.dF(t), None))
    for t in _ray_tangencies(curve_r, hbar):
        candidates.append(("right-tangent", None, curve_r.dF(t), t))
    candidates.append(("right-end", None, curve_r.F(sR) / (sR + hbar), sR))

    passes = []
    for tag, s_m, sigma, s_bar in candidates:
        passes.extend(
            _try_candidate(curve_l, curve_r, hbar, sL, sR, tag, s_m, sigma, s_bar)
        )
    if not passes:
        raise RiemannError("no admissible wave composition found")

    fan = _select_fan(passes, problem, model, ctx)
    _validate_fan(fan)
    return fan


def _try_candidate(curve_l, curve_r, hbar, sL, sR, tag, s_m, sigma, s_bar):
    """Verify one contact candidate; return compositions that pass.

    Beyond the speed ordering of the groups, the saturation family has to
    cross the contact transversally (or tangentially): compositions where
    its characteristics emanate from both faces, or impinge on both, hide
    an inadmissible saturation jump inside the contact and are discarded.
    """
    landings = [s_m] if s_m is not None else _ray_crossings(curve_l, hbar, sigma)
    targets = [s_bar] if s_bar is not None else _ray_crossings(curve_r, hbar, sigma)
    out = []
    for sm in landings:
        try:
            left_group = _scalar_waves(curve_l, sL, sm)
        except RiemannError:
            continue
        _, hi_l = _group_speed_range(left_group)
        if left_group and hi_l > sigma + _SPEED_TOL:
            continue
        lam_l = curve_l.dF(sm) - sigma
        # at s = 0 or 1 the flux and its slope both vanish, so a contact face
        # there is marginal for any sigma = 0; such faces count as emanating
        # when paired with a strictly emanating opposite face, because they
        # are limits of strictly undercompressive jumps as the end state is
        # pulled into the interior
        l_degen = abs(lam_l) <= _SPEED_TOL and min(sm, 1.0 - sm) <= 1e-9
        for sb in targets:
            lam_r = curve_r.dF(sb) - sigma
            r_degen = abs(lam_r) <= _SPEED_TOL and min(sb, 1.0 - sb) <= 1e-9
            emanate_l = lam_l < -_SPEED_TOL
            emanate_r = lam_r > _SPEED_TOL
            if (emanate_l and (emanate_r or r_degen)) or \
                    ((emanate_l or l_degen) and emanate_r):
                continue
            if lam_l > _SPEED_TOL and lam_r < -_SPEED_TOL:
                continue
            try:
                right_group = _scalar_waves(curve_r, sb, sR)
            except RiemannError:
                continue
            lo_r, _ = _group_speed_range(right_group)
            if right_group and lo_r < sigma - _SPEED_TOL:
                continue
            contact = Wave(CONTACT, curve_l.state(sm), curve_r.state(sb), sigma, sigma)
            out.append((tag, left_group + [contact] + right_group))
    return out


def _select_fan(passes, problem, model, ctx):
    """Pick the surviving composition; degenerate ties must agree."""
    tag0, waves0 = passes[0]
    fan0 = WaveFan(problem.left, problem.right, waves0, model, ctx, case=tag0)
    for tag, waves in passes[1:]:
        fan = WaveFan(problem.left, problem.right, waves, model, ctx, case=tag)
        if not _fans_agree(fan0, fan):
            raise RiemannError(
                "distinct admissible compositions found (%s vs %s)" % (tag0, tag)
            )
    return fan0


def _fans_agree(f1, f2, tol=1e-6):
    """Almost-everywhere agreement: points on wave speeds are skipped."""
    speeds = sorted(
        {w.speed_lo for w in f1.waves + f2.waves}
        | {w.speed_hi for w in f1.waves + f2.waves}
    )
    if not speeds:
        return True
    edges = [speeds[0] - 0.1] + speeds + [speeds[-1] + 0.1]
    probes = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo > 1e-9:
            probes.extend(np.linspace(lo, hi, 9)[1:-1])
    for xi in probes:
        p = sample(f1, xi)
        q = sample(f2, xi)
        if abs(p.s - q.s) > tol or np.any(np.abs(p.c - q.c) > tol):
            return False
    return True


def _validate_fan(fan):
    scale = max(abs(fan.ctx.v), 1.0)
    prev_speed = -math.inf
    state = fan.left
    for w in fan.waves:
        if w.speed_lo < prev_speed - 1e-9 * scale:
            raise RiemannError("wave speeds out of order")
        if w.speed_hi < w.speed_lo - 1e-12:
            raise RiemannError("wave has an inverted speed range")
        if abs(w.left.s - state.s) > 1e-9:
            raise RiemannError("saturation not continuous between waves")
        if w.kind != CONTACT and np.any(w.left.c != w.right.c):
            raise RiemannError("concentration changed outside a contact")
        if np.any(w.left.c != state.c):
            raise RiemannError("concentration not continuous between waves")
        if w.kind == SHOCK:
            model, ctx = fan.model, fan.ctx
            fL = model.flux(w.left.s, w.left.c, ctx.v, ctx.K, ctx.direction)
            fR = model.flux(w.right.s, w.right.c, ctx.v, ctx.K, ctx.direction)
            resid = float(fR - fL) - w.speed_lo * (w.right.s - w.left.s)
            if abs(resid) > 1e-10 * scale:
                raise RiemannError("jump condition violated on a shock")
        prev_speed = w.speed_hi
        state = w.right
    if abs(state.s - fan.right.s) > 1e-9 or np.any(state.c != fan.right.c):
        raise RiemannError("fan does not reach the right state")


def sample(fan, xi):
    """State of the self-similar solution on the ray xi = x/t."""
    upstream = fan.left
    for w in fan.waves:
        if xi < w.speed_lo:
            return upstream
        if xi <= w.speed_hi:
            if w.kind != RAREFACTION:
                return w.right
            return _invert_rarefaction(fan, w, xi)
        upstream = w.right
    return fan.right


def _invert_rarefaction(fan, w, xi):
    curve = w.curve if w.curve is not None else _Curve(fan.model, w.left.c, fan.ctx)
    root = _bisect(lambda t: curve.dF(t) - xi, w.left.s, w.right.s)
    return State(root, w.left.c)


def godunov_interface_flux(problem):
    """Water and species fluxes of the exact solution on the interface ray.

    Returns (F, G, fan) where G holds the species fluxes c_l(0) * F taken
    from the fan state on the interface; both vanish together when the
    contact rides exactly on the interface.
    """
    fan = solve(problem)
    st = sample(fan, 0.0)
    ctx = problem.ctx_left
    F = float(problem.model.flux(st.s, st.c, ctx.v, ctx.K, ctx.direction))
    return F, st.c * F, fan
