"""Exact interface Riemann solution: fan structure, conservation, refusals."""

import numpy as np
import pytest

from polyflood import physics, riemann1d
from polyflood.physics import FluxContext, PhysicsModel, State, TabulatedAdsorption
from polyflood.riemann1d import (
    RiemannProblem,
    UnsupportedConfiguration,
    godunov_interface_flux,
    solve,
)

CONTACT = "contact"
RAREFACTION = "rarefaction"
SHOCK = "shock"


def benchmark_problem():
    """Downward water drive against buoyant oil with a polymer front."""
    model = PhysicsModel(m=2)
    ctx = FluxContext(0.2, 1.0, physics.VERTICAL)
    left = State(0.1, [1.0, 0.6])
    right = State(1.0, [0.0, 0.0])
    return RiemannProblem(left, right, ctx, ctx, model)


def conserved(model, st):
    q = st.s * st.c + model.adsorption.value(st.c)
    return np.concatenate([[st.s], q])


def flux_vector(model, st, ctx):
    F = float(model.flux(st.s, st.c, ctx.v, ctx.K, ctx.direction))
    return np.concatenate([[F], st.c * F])


# ---------------------------------------------------------------------------
# benchmark fan


def test_benchmark_fan_structure():
    fan = solve(benchmark_problem())
    kinds = [w.kind for w in fan.waves]
    assert kinds == [SHOCK, RAREFACTION, CONTACT, SHOCK]


def test_benchmark_fan_reference_values():
    """States and speeds match the four-decimal reference fan."""
    fan = solve(benchmark_problem())
    sh1, rare, contact, sh2 = fan.waves
    assert sh1.right.s == pytest.approx(0.2852, abs=1.5e-4)
    assert sh1.speed_lo == pytest.approx(-0.09906, abs=1.5e-5)
    assert rare.right.s == pytest.approx(0.3661, abs=1.5e-4)
    assert rare.speed_lo == pytest.approx(-0.09906, abs=1.5e-5)
    assert rare.speed_hi == pytest.approx(-0.03194, abs=1.5e-5)
    assert contact.right.s == pytest.approx(0.5023, abs=1.5e-4)
    assert contact.speed_lo == pytest.approx(-0.03194, abs=1.5e-5)
    assert sh2.right.s == 1.0
    assert sh2.speed_lo == pytest.approx(0.4661, abs=1.5e-4)


def test_benchmark_fan_regression_full_precision():
    fan = solve(benchmark_problem())
    sh1, rare, contact, sh2 = fan.waves
    assert sh1.right.s == pytest.approx(0.28523222577475, rel=1e-10)
    assert rare.right.s == pytest.approx(0.3661153338241083, rel=1e-10)
    assert contact.right.s == pytest.approx(0.5022749505715896, rel=1e-10)
    assert contact.speed_lo == pytest.approx(-0.03193993841568505, rel=1e-9)
    assert sh2.speed_lo == pytest.approx(0.4661461191541086, rel=1e-10)


def test_benchmark_interface_flux_frozen():
    F, G, fan = godunov_interface_flux(benchmark_problem())
    assert F == pytest.approx(-0.03201260019684, rel=1e-10)
    # the interface sits right of the contact where no polymer remains
    assert np.allclose(G, 0.0)


def test_concentration_changes_only_across_contact():
    fan = solve(benchmark_problem())
    for w in fan.waves:
        if w.kind == CONTACT:
            assert not np.array_equal(w.left.c, w.right.c)
        else:
            assert np.array_equal(w.left.c, w.right.c)


def test_wave_speeds_are_ordered():
    fan = solve(benchmark_problem())
    speeds = [sp for w in fan.waves for sp in (w.speed_lo, w.speed_hi)]
    assert all(a <= b + 1e-12 for a, b in zip(speeds, speeds[1:]))


# ---------------------------------------------------------------------------
# jump and entropy conditions


def test_rankine_hugoniot_on_every_discontinuity():
    prob = benchmark_problem()
    fan = solve(prob)
    for w in fan.waves:
        if w.kind == RAREFACTION:
            continue
        sigma = w.speed_lo
        du = conserved(prob.model, w.right) - conserved(prob.model, w.left)
        dF = flux_vector(prob.model, w.right, prob.ctx_left) - flux_vector(
            prob.model, w.left, prob.ctx_left
        )
        assert np.allclose(sigma * du, dF, atol=1e-10)


def test_oleinik_chord_condition_on_saturation_shocks():
    prob = benchmark_problem()
    fan = solve(prob)
    model, ctx = prob.model, prob.ctx_left
    for w in fan.waves:
        if w.kind != SHOCK:
            continue
        a, b = w.left.s, w.right.s
        c = w.left.c
        Fa = model.flux(a, c, ctx.v, ctx.K, ctx.direction)
        Fb = model.flux(b, c, ctx.v, ctx.K, ctx.direction)
        sigma = (Fb - Fa) / (b - a)
        ts = np.linspace(min(a, b), max(a, b), 501)[1:-1]
        Ft = model.flux(ts, np.repeat(c[:, None], ts.size, axis=1), ctx.v, ctx.K, ctx.direction)
        assert np.all((Ft - Fa) / (ts - a) >= sigma - 1e-9)
        assert np.all((Ft - Fb) / (ts - b) <= sigma + 1e-9)


def test_rarefaction_edges_move_at_characteristic_speed():
    prob = benchmark_problem()
    fan = solve(prob)
    model, ctx = prob.model, prob.ctx_left
    for w in fan.waves:
        if w.kind != RAREFACTION:
            continue
        for s_edge, speed in ((w.left.s, w.speed_lo), (w.right.s, w.speed_hi)):
            lam = model.flux_deriv_s(s_edge, w.left.c, ctx.v, ctx.K, ctx.direction)
            assert lam == pytest.approx(speed, abs=1e-9)
        # characteristic speed grows monotonically through the wave
        ss = np.linspace(w.left.s, w.right.s, 101)
        lams = model.flux_deriv_s(
            ss, np.repeat(w.left.c[:, None], ss.size, axis=1), ctx.v, ctx.K, ctx.direction
        )
        assert np.all(np.diff(lams) >= -1e-12)


def test_contact_balances_adsorbed_transport():
    """The contact speed equals F/(s + hbar) seen from both sides."""
    prob = benchmark_problem()
    fan = solve(prob)
    model, ctx = prob.model, prob.ctx_left
    contact = next(w for w in fan.waves if w.kind == CONTACT)
    # affine adsorption: chord slope equals the constant derivative
    hbar = model.adsorption.deriv(np.zeros(1))[0]
    for st in (contact.left, contact.right):
        F = model.flux(st.s, st.c, ctx.v, ctx.K, ctx.direction)
        assert F / (st.s + hbar) == pytest.approx(contact.speed_lo, abs=1e-10)


def test_weak_form_conservation_of_sampled_solution():
    """Space integral of the sampled fan honors the conservation law.

    For step data, integrating u(.,T) - u(.,0) over a window that contains
    the whole fan must equal T * (flux(left) - flux(right)) componentwise.
    """
    prob = benchmark_problem()
    fan = solve(prob)
    model, ctx = prob.model, prob.ctx_left
    T = 1.0
    A, B, n = -0.6, 1.0, 30000
    xs = A + (B - A) * (np.arange(n) + 0.5) / n
    w = (B - A) / n
    total = np.zeros(3)
    for x in xs:
        st = fan.sample(x / T)
        total += w * conserved(model, st)
    initial = conserved(model, prob.left) * (0.0 - A) + conserved(model, prob.right) * B
    expected = T * (
        flux_vector(model, prob.left, ctx) - flux_vector(model, prob.right, ctx)
    )
    assert np.allclose(total - initial, expected, atol=2e-3)


# ---------------------------------------------------------------------------
# sampling


def test_sample_returns_flank_states_outside_fan():
    prob = benchmark_problem()
    fan = solve(prob)
    far_left = fan.sample(-10.0)
    far_right = fan.sample(10.0)
    assert far_left.s == prob.left.s and np.array_equal(far_left.c, prob.left.c)
    assert far_right.s == prob.right.s and np.array_equal(far_right.c, prob.right.c)


def test_sample_inside_rarefaction_tracks_characteristics():
    prob = benchmark_problem()
    fan = solve(prob)
    model, ctx = prob.model, prob.ctx_left
    rare = next(w for w in fan.waves if w.kind == RAREFACTION)
    xi = 0.5 * (rare.speed_lo + rare.speed_hi)
    st = fan.sample(xi)
    lam = model.flux_deriv_s(st.s, st.c, ctx.v, ctx.K, ctx.direction)
    assert lam == pytest.approx(xi, abs=1e-9)
    assert rare.left.s <= st.s <= rare.right.s


# ---------------------------------------------------------------------------
# scalar (equal-concentration) reduction


def scalar_godunov_oracle(model, sL, sR, c, ctx):
    """min/max of F over the interval between the states, by dense scan."""
    lo, hi = min(sL, sR), max(sL, sR)
    ss = np.linspace(lo, hi, 4001)
    F = model.flux(ss, np.repeat(c[:, None], ss.size, axis=1), ctx.v, ctx.K, ctx.direction)
    return F.min() if sL <= sR else F.max()


def test_equal_concentration_flux_matches_min_max_formula():
    model = PhysicsModel(m=2)
    ctx = FluxContext(0.2, 1.0, physics.VERTICAL)
    rng = np.random.default_rng(11)
    for _ in range(60):
        sL, sR = rng.uniform(0.0, 1.0, size=2)
        c = rng.uniform(0.0, 1.0, size=2)
        prob = RiemannProblem(State(sL, c), State(sR, c), ctx, ctx, model)
        F, G, _ = godunov_interface_flux(prob)
        ref = scalar_godunov_oracle(model, sL, sR, c, ctx)
        assert F == pytest.approx(ref, abs=5e-8)


def test_equal_states_give_pointwise_flux():
    model = PhysicsModel(m=2)
    ctx = FluxContext(0.2, 1.0, physics.VERTICAL)
    st = State(0.37, [0.4, 0.2])
    prob = RiemannProblem(st, st, ctx, ctx, model)
    F, G, fan = godunov_interface_flux(prob)
    assert F == pytest.approx(model.flux(st.s, st.c, 0.2, 1.0, physics.VERTICAL))


def test_horizontal_transport_flux_is_monotone_upwind():
    """Without buoyancy the flux is monotone, so the interface value is
    the upwind evaluation for positive drive."""
    model = PhysicsModel(m=2, gravity_on=False)
    ctx = FluxContext(0.3, 1.0, physics.HORIZONTAL)
    rng = np.random.default_rng(5)
    for _ in range(20):
        sL, sR = rng.uniform(0.0, 1.0, size=2)
        c = rng.uniform(0.0, 1.0, size=2)
        prob = RiemannProblem(State(sL, c), State(sR, c), ctx, ctx, model)
        F, _, _ = godunov_interface_flux(prob)
        ref = scalar_godunov_oracle(model, sL, sR, c, ctx)
        assert F == pytest.approx(ref, abs=5e-8)
        # monotone flux: min/max collapses to the left (upwind) value when
        # the interval is increasing
        if sL <= sR:
            assert F == pytest.approx(
                model.flux(sL, c, 0.3, 1.0, physics.HORIZONTAL), abs=5e-8
            )


# ---------------------------------------------------------------------------
# polymer-front ensemble


def test_random_polymer_fronts_are_conservative():
    """Random admissible fronts all produce fans satisfying the jump
    conditions wave by wave."""
    model = PhysicsModel(m=2)
    ctx = FluxContext(0.2, 1.0, physics.VERTICAL)
    rng = np.random.default_rng(23)
    solved = 0
    for _ in range(50):
        sL, sR = rng.uniform(0.0, 1.0, size=2)
        cR = rng.uniform(0.0, 0.8, size=2)
        cL = cR + rng.uniform(0.0, 0.2, size=2)  # at least as much upstream
        prob = RiemannProblem(State(sL, cL), State(sR, cR), ctx, ctx, model)
        fan = solve(prob)
        solved += 1
        for w in fan.waves:
            if w.kind == RAREFACTION:
                continue
            sigma = w.speed_lo
            du = conserved(model, w.right) - conserved(model, w.left)
            dF = flux_vector(model, w.right, ctx) - flux_vector(model, w.left, ctx)
            assert np.allclose(sigma * du, dF, atol=1e-8)
    assert solved == 50


def test_near_critical_regression_case():
    """Both states at the flux minimum with a tiny concentration jump."""
    model = PhysicsModel(m=2)
    ctx = FluxContext(0.2, 1.0, physics.VERTICAL)
    left = State(0.3445532725694969, [0.9999993716852045, 0.599999623011118])
    right = State(0.3445532725694969, [0.9999988622043292, 0.5999993173225947])
    prob = RiemannProblem(left, right, ctx, ctx, model)
    F, G, fan = godunov_interface_flux(prob)
    assert np.isfinite(F)


# ---------------------------------------------------------------------------
# refusals


def test_increasing_concentration_is_refused():
    model = PhysicsModel(m=2)
    ctx = FluxContext(0.2, 1.0, physics.VERTICAL)
    prob = RiemannProblem(
        State(0.3, [0.0, 0.0]), State(0.7, [1.0, 0.0]), ctx, ctx, model
    )
    with pytest.raises(UnsupportedConfiguration):
        solve(prob)


def test_coefficient_jump_is_refused():
    model = PhysicsModel(m=2)
    ctx_l = FluxContext(0.2, 1.0, physics.VERTICAL)
    ctx_r = FluxContext(0.2, 2.0, physics.VERTICAL)
    prob = RiemannProblem(
        State(0.3, [1.0, 0.0]), State(0.7, [0.0, 0.0]), ctx_l, ctx_r, model
    )
    with pytest.raises(UnsupportedConfiguration):
        solve(prob)


def test_more_than_two_species_is_refused():
    model = PhysicsModel(m=3)
    ctx = FluxContext(0.2, 1.0, physics.VERTICAL)
    with pytest.raises(UnsupportedConfiguration):
        RiemannProblem(
            State(0.3, [1.0, 1.0, 1.0]), State(0.7, [0.0, 0.0, 0.0]),
            ctx, ctx, model,
        )


def test_unequal_adsorption_chords_are_refused():
    ads = TabulatedAdsorption(lambda c: c * c + c, lambda c: 2.0 * c + 1.0)
    model = PhysicsModel(m=2, adsorption=ads)
    ctx = FluxContext(0.2, 1.0, physics.VERTICAL)
    prob = RiemannProblem(
        State(0.3, [1.0, 0.6]), State(0.7, [0.0, 0.0]), ctx, ctx, model
    )
    with pytest.raises(UnsupportedConfiguration):
        solve(prob)
