"""Interface fluxes: consistency, monotonicity, upwinding, exactness."""

import numpy as np
import pytest

from polyflood import numflux, physics, riemann1d
from polyflood.physics import (
    FluxContext,
    HORIZONTAL,
    PhysicsModel,
    State,
    VERTICAL,
)


def model2():
    return PhysicsModel(m=2)


def ctx(v=0.2, K=1.0, direction=VERTICAL):
    return FluxContext(v, K, direction)


# ---------------------------------------------------------------------------
# consistency and frozen examples


def test_all_fluxes_consistent_at_equal_states():
    model = model2()
    c = ctx()
    st = State(0.42, [0.3, 0.1])
    want = model.flux_state(st, c)
    for fn in (numflux.dflu_flux, numflux.godunov_flux,
               numflux.upstream_mobility_flux):
        F, G = fn(model, st, st, c, c)
        assert F == pytest.approx(want, abs=1e-12)


def test_dflu_permeability_jump_frozen_example():
    """Hand-evaluated one-sided values: the left branch wins.

    Left (K=1, s=0.7 above its trough): F_l = (0.2 - 0.3^2) * f(0.7);
    right (K=2, s=0.3 below its trough): F_r < 0, so F = F_l.
    """
    model = model2()
    L, R = State(0.7, [0.0, 0.0]), State(0.3, [0.0, 0.0])
    F, G = numflux.dflu_flux(model, L, R, ctx(K=1.0), ctx(K=2.0))
    f07 = 0.98 / (0.98 + 0.09)
    assert F == pytest.approx(0.11 * f07, abs=1e-14)
    assert F == pytest.approx(0.1007476635514019, abs=1e-14)


def test_upstream_mobility_cross_upwinded_frozen_example():
    """Water and oil mobilities come from opposite sides.

    With s_L = 0.1 the oil drive v + g lambda_w,L is positive (oil from the
    left, lambda_o = 0.81) while the water drive v - g lambda_o,L is
    negative (water from the right, lambda_w = 0.81/0.5).
    """
    model = model2()
    L, R = State(0.1, [1.0, 0.6]), State(0.9, [0.0, 0.0])
    F, G = numflux.upstream_mobility_flux(model, L, R, ctx(), ctx())
    lw, lo = 0.81 / 0.5, 0.81
    assert F == pytest.approx((lw / (lw + lo)) * (0.2 - lo), abs=1e-14)
    assert F == pytest.approx(-0.4066666666666667, abs=1e-14)


def test_upstream_mobility_zero_total_mobility():
    """s_L = 1, s_R = 0 with upwinding selecting the vanishing mobilities
    must not divide by zero."""
    model = PhysicsModel(m=2, gravity_on=False)
    L, R = State(0.0, [0.0, 0.0]), State(1.0, [0.0, 0.0])
    F, G = numflux.upstream_mobility_flux(model, L, R, ctx(v=0.2), ctx(v=0.2))
    assert F == 0.0 and np.all(G == 0.0)


# ---------------------------------------------------------------------------
# species upwinding by flux sign


def test_species_follow_flux_sign():
    model = model2()
    cL, cR = np.array([1.0, 0.6]), np.array([0.2, 0.1])
    # positive horizontal drive: species carried from the left
    F, G = numflux.dflu_flux(
        model, State(0.8, cL), State(0.2, cR),
        ctx(0.3, 1.0, HORIZONTAL), ctx(0.3, 1.0, HORIZONTAL),
    )
    assert F > 0.0
    assert np.allclose(G, cL * F)
    # negative drive: species carried from the right
    F2, G2 = numflux.dflu_flux(
        model, State(0.8, cL), State(0.2, cR),
        ctx(-0.3, 1.0, HORIZONTAL), ctx(-0.3, 1.0, HORIZONTAL),
    )
    assert F2 < 0.0
    assert np.allclose(G2, cR * F2)


def test_zero_flux_carries_no_species():
    model = model2()
    cL, cR = np.array([1.0, 0.6]), np.array([0.2, 0.1])
    F, G = numflux.dflu_flux(
        model, State(0.0, cL), State(0.0, cR),
        ctx(0.3, 1.0, HORIZONTAL), ctx(0.3, 1.0, HORIZONTAL),
    )
    assert F == 0.0 and np.all(G == 0.0)


def test_array_species_selector_matches_scalar_rule():
    F = np.array([0.5, -0.25, 0.0])
    c_l = np.array([[1.0, 1.0, 1.0], [0.6, 0.6, 0.6]])
    c_r = np.array([[0.2, 0.2, 0.2], [0.0, 0.0, 0.0]])
    G = numflux._upwind_species_arrays(F, c_l, c_r)
    assert np.allclose(G[:, 0], c_l[:, 0] * 0.5)
    assert np.allclose(G[:, 1], c_r[:, 1] * -0.25)
    assert np.all(G[:, 2] == 0.0)


# ---------------------------------------------------------------------------
# monotonicity of the interface value


def test_dflu_monotone_in_both_saturations():
    model = model2()
    c = np.zeros(2)
    cl = cr = ctx()
    sgrid = np.linspace(0.0, 1.0, 41)
    for s_other in (0.0, 0.3, 0.7, 1.0):
        FL = [numflux.dflu_flux(model, State(s, c), State(s_other, c), cl, cr)[0]
              for s in sgrid]
        assert np.all(np.diff(FL) >= -1e-12)
        FR = [numflux.dflu_flux(model, State(s_other, c), State(s, c), cl, cr)[0]
              for s in sgrid]
        assert np.all(np.diff(FR) <= 1e-12)


def test_dflu_monotone_with_permeability_jump():
    model = model2()
    c = np.zeros(2)
    cl, cr = ctx(K=0.6), ctx(K=1.4)
    sgrid = np.linspace(0.0, 1.0, 41)
    for s_other in (0.2, 0.8):
        FL = [numflux.dflu_flux(model, State(s, c), State(s_other, c), cl, cr)[0]
              for s in sgrid]
        assert np.all(np.diff(FL) >= -1e-12)
        FR = [numflux.dflu_flux(model, State(s_other, c), State(s, c), cl, cr)[0]
              for s in sgrid]
        assert np.all(np.diff(FR) <= 1e-12)


# ---------------------------------------------------------------------------
# equivalence with the exact interface solution


def test_dflu_equals_exact_flux_for_equal_concentrations():
    model = model2()
    c0 = ctx()
    rng = np.random.default_rng(17)
    for _ in range(40):
        sL, sR = rng.uniform(0.0, 1.0, size=2)
        c = rng.uniform(0.0, 1.0, size=2)
        L, R = State(sL, c), State(sR, c)
        F_dflu, _ = numflux.dflu_flux(model, L, R, c0, c0)
        F_god, _ = numflux.godunov_flux(model, L, R, c0, c0)
        assert F_dflu == pytest.approx(F_god, abs=1e-9)


def test_dflu_dominates_exact_flux_and_matches_when_positive():
    """Across polymer fronts the shortcut evaluation never falls below the
    exact interface flux, and coincides with it whenever that flux is
    positive.  (A negative interface flux moves the concentration contact
    upstream, where the frozen-concentration picture behind the shortcut
    breaks down and the two values genuinely differ.)"""
    model = model2()
    c0 = ctx()
    rng = np.random.default_rng(29)
    positives = 0
    for _ in range(300):
        sL, sR = rng.uniform(0.0, 1.0, size=2)
        cR = rng.uniform(0.0, 0.9, size=2)
        cL = np.minimum(cR + rng.uniform(0.0, 0.4, size=2), 1.0)
        L, R = State(sL, cL), State(sR, cR)
        F_dflu, _ = numflux.dflu_flux(model, L, R, c0, c0)
        F_god, _ = numflux.godunov_flux(model, L, R, c0, c0)
        assert F_dflu >= F_god - 1e-10
        if F_god > 1e-10:
            positives += 1
            assert F_dflu == pytest.approx(F_god, abs=1e-10)
    assert positives > 50


# ---------------------------------------------------------------------------
# array versions agree with the scalar versions


def test_dflu_arrays_match_scalar_loop():
    model = model2()
    rng = np.random.default_rng(41)
    n = 100
    s_l, s_r = rng.uniform(0.0, 1.0, size=(2, n))
    c_l = rng.uniform(0.0, 1.0, size=(2, n))
    c_r = rng.uniform(0.0, 1.0, size=(2, n))
    K_l = rng.uniform(0.5, 1.5, size=n)
    K_r = rng.uniform(0.5, 1.5, size=n)
    v = 0.2
    F, G = numflux.dflu_flux_arrays(
        model, s_l, s_r, c_l, c_r, v, K_l, v, K_r, VERTICAL
    )
    for i in range(n):
        Fi, Gi = numflux.dflu_flux(
            model, State(s_l[i], c_l[:, i]), State(s_r[i], c_r[:, i]),
            ctx(v, K_l[i]), ctx(v, K_r[i]),
        )
        assert F[i] == pytest.approx(Fi, abs=1e-13)
        assert np.allclose(G[:, i], Gi, atol=1e-13)


def test_upstream_arrays_match_scalar_loop():
    model = model2()
    rng = np.random.default_rng(43)
    n = 100
    s_l, s_r = rng.uniform(0.0, 1.0, size=(2, n))
    c_l = rng.uniform(0.0, 1.0, size=(2, n))
    c_r = rng.uniform(0.0, 1.0, size=(2, n))
    K_l = rng.uniform(0.5, 1.5, size=n)
    K_r = rng.uniform(0.5, 1.5, size=n)
    v = 0.2
    F, G = numflux.upstream_mobility_flux_arrays(
        model, s_l, s_r, c_l, c_r, v, K_l, K_r, VERTICAL
    )
    for i in range(n):
        Fi, Gi = numflux.upstream_mobility_flux(
            model, State(s_l[i], c_l[:, i]), State(s_r[i], c_r[:, i]),
            ctx(v, K_l[i]), ctx(v, K_r[i]),
        )
        assert F[i] == pytest.approx(Fi, abs=1e-13)
        assert np.allclose(G[:, i], Gi, atol=1e-13)


def test_godunov_arrays_match_scalar_loop():
    model = model2()
    rng = np.random.default_rng(47)
    n = 80
    s_l, s_r = rng.uniform(0.0, 1.0, size=(2, n))
    c_r = rng.uniform(0.0, 0.8, size=(2, n))
    c_l = np.minimum(c_r + rng.uniform(0.0, 0.3, size=(2, n)), 1.0)
    v, K = 0.2, 1.0
    F, G = numflux.godunov_flux_arrays(model, s_l, s_r, c_l, c_r, v, K, VERTICAL)
    for i in range(n):
        Fi, Gi = numflux.godunov_flux(
            model, State(s_l[i], c_l[:, i]), State(s_r[i], c_r[:, i]),
            ctx(v, K), ctx(v, K),
        )
        assert F[i] == pytest.approx(Fi, abs=1e-9)


def test_godunov_arrays_negative_drive():
    model = model2()
    rng = np.random.default_rng(53)
    n = 40
    s_l, s_r = rng.uniform(0.0, 1.0, size=(2, n))
    c_r = rng.uniform(0.0, 0.8, size=(2, n))
    c_l = np.minimum(c_r + rng.uniform(0.0, 0.3, size=(2, n)), 1.0)
    v, K = -0.15, 1.0
    F, G = numflux.godunov_flux_arrays(model, s_l, s_r, c_l, c_r, v, K, VERTICAL)
    for i in range(n):
        Fi, _ = numflux.godunov_flux(
            model, State(s_l[i], c_l[:, i]), State(s_r[i], c_r[:, i]),
            ctx(v, K), ctx(v, K),
        )
        assert F[i] == pytest.approx(Fi, abs=1e-9)


# ---------------------------------------------------------------------------
# tolerance handling in the vectorized exact flux


def test_godunov_arrays_snap_roundoff_level_jumps():
    """Concentration jumps at roundoff scale act as equal concentrations,
    including 'wrong-way' jumps below the tolerance."""
    model = model2()
    base = np.array([0.4, 0.2])
    for eps in (1e-14, -1e-14):
        c_l = base[:, None]
        c_r = (base + eps)[:, None]
        F, G = numflux.godunov_flux_arrays(
            model, np.array([0.3]), np.array([0.8]), c_l, c_r, 0.2, 1.0, VERTICAL
        )
        F_eq, _ = numflux.godunov_flux(
            model, State(0.3, base), State(0.8, base), ctx(), ctx()
        )
        assert F[0] == pytest.approx(F_eq, abs=1e-10)


def test_godunov_arrays_refuse_genuinely_increasing_concentration():
    model = model2()
    c_l = np.array([[0.1], [0.0]])
    c_r = np.array([[0.5], [0.0]])
    with pytest.raises(riemann1d.UnsupportedConfiguration):
        numflux.godunov_flux_arrays(
            model, np.array([0.3]), np.array([0.8]), c_l, c_r, 0.2, 1.0, VERTICAL
        )


# ---------------------------------------------------------------------------
# gravity-free equivalence of all three fluxes


def test_all_fluxes_agree_without_gravity_positive_drive():
    model = PhysicsModel(m=2, gravity_on=False)
    c0 = ctx(0.3, 1.0, HORIZONTAL)
    rng = np.random.default_rng(59)
    for _ in range(30):
        sL, sR = rng.uniform(0.0, 1.0, size=2)
        cc = rng.uniform(0.0, 1.0, size=2)
        L, R = State(sL, cc), State(sR, cc)
        F_d, _ = numflux.dflu_flux(model, L, R, c0, c0)
        F_u, _ = numflux.upstream_mobility_flux(model, L, R, c0, c0)
        F_g, _ = numflux.godunov_flux(model, L, R, c0, c0)
        want = model.flux(sL, cc, 0.3, 1.0, HORIZONTAL)
        assert F_d == pytest.approx(want, abs=1e-12)
        assert F_u == pytest.approx(want, abs=1e-12)
        assert F_g == pytest.approx(want, abs=1e-9)
