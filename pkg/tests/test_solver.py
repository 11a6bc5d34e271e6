import numpy as np
import pytest
from hypothesis import given, strategies as st

from bfinterface.model import builtin_convection, builtin_flux
from bfinterface.solver import (
    BlowUpError,
    BoundaryCondition,
    Grid1D,
    InitialDatum,
    SimState,
    gradient,
    initial_profile,
    rhs,
    simulate,
    slope_profile,
    stable_dt,
    step,
)

LIN = builtin_flux("linear")
NONE = builtin_convection("none", {}, LIN)
DIRICHLET = BoundaryCondition("dirichlet", 0.0, 0.0)


def heat_error(n, t_end=0.1):
    g = Grid1D(0.0, 1.0, n)
    tr = simulate(np.sin(np.pi * g.x), g, LIN, NONE, DIRICHLET, t_end, t_end)
    return np.max(np.abs(tr.samples[-1].u - np.exp(-np.pi**2 * t_end) * np.sin(np.pi * g.x)))


def test_grid_rejects_small_n():
    with pytest.raises(ValueError):
        Grid1D(0, 1, 15)


def test_gradient_examples():
    g = Grid1D(0.0, 1.5, 16)  # h = 0.1, node 5 at x = 0.5
    np.testing.assert_array_equal(gradient(np.full(16, 3.0), g), np.zeros(16))
    np.testing.assert_allclose(gradient(g.x, g), np.ones(16), rtol=0, atol=1e-12)
    assert gradient(g.x**2, g)[5] == pytest.approx(1.0, abs=1e-12)


def test_rhs_linear_state_is_stationary(pm):
    g = Grid1D(-3, 3, 61)
    conv = builtin_convection("none", {}, pm)
    u = 0.3 * g.x
    out = rhs(u, g, pm, conv, BoundaryCondition("neumann_slope", 0.3, 0.3))
    np.testing.assert_allclose(out, 0.0, atol=1e-12)


def test_rhs_heat_of_parabola():
    g = Grid1D(-1, 1, 41)
    out = rhs(0.5 * g.x**2, g, LIN, NONE, BoundaryCondition("neumann_slope", -1.0, 1.0))
    np.testing.assert_allclose(out[1:-1], 1.0, atol=1e-10)


def test_rhs_pm_at_origin_approaches_dphi0(pm):
    conv = builtin_convection("none", {}, pm)
    errs = []
    for n in (61, 121):
        g = Grid1D(-3, 3, n)
        out = rhs(0.5 * g.x**2, g, pm, conv, BoundaryCondition("neumann_slope", -3.0, 3.0))
        i = n // 2
        h = g.h
        assert out[i] == pytest.approx((pm.phi(h / 2) - pm.phi(-h / 2)) / h, abs=1e-12)
        errs.append(abs(out[i] - 1.0))
    assert errs[1] < errs[0] / 3.5


def test_stable_dt_examples(pm):
    g = Grid1D(0.0, 1.5, 16)  # h = 0.1
    dt, stiff = stable_dt(g.x, g, LIN, 0.5)
    assert dt == pytest.approx(0.0025, rel=1e-12) and not stiff
    dt, stiff = stable_dt(np.zeros(16), g, pm, 0.9)
    assert dt == pytest.approx(0.9 * g.h**2 / 2, rel=1e-12) and not stiff


def test_stable_dt_floor_when_slopes_critical(pm):
    g = Grid1D(0.0, 1.5, 16)
    for u in (g.x, -g.x, 3.0 - g.x):
        dt, stiff = stable_dt(u, g, pm, 0.9, dt_floor=1e-3)
        assert dt == 1e-3 and stiff


def test_step_zero_rhs_keeps_state():
    g = Grid1D(0, 1, 21)
    s = step(SimState(0.25, 2 * g.x), 1e-3, g, LIN, NONE, BoundaryCondition("neumann_slope", 2.0, 2.0))
    assert s.t == pytest.approx(0.251)
    np.testing.assert_allclose(s.u, 2 * g.x, atol=1e-14)


def test_one_heat_step_against_exact_decay():
    g = Grid1D(0, 1, 101)
    dt = 1e-5
    s = step(SimState(0.0, np.sin(np.pi * g.x)), dt, g, LIN, NONE, DIRICHLET)
    expected = (1 - dt * np.pi**2) * np.sin(np.pi * g.x)
    assert np.max(np.abs(s.u - expected)) < dt * (np.pi**4 * g.h**2 / 12) * 1.1 + dt**2 * np.pi**4


def test_step_blowup_reports_node():
    g = Grid1D(0, 1, 21)
    u = g.x.copy()
    u[7] = np.inf
    with pytest.raises(BlowUpError) as info:
        step(SimState(0.0, u), 1e-3, g, LIN, NONE, DIRICHLET)
    assert info.value.node in (6, 7, 8)


def test_simulate_t_end_zero():
    g = Grid1D(0, 1, 21)
    tr = simulate(np.sin(np.pi * g.x), g, LIN, NONE, DIRICHLET, 0.0, 0.01)
    assert len(tr.samples) == 1 and tr.steps == 0


def test_simulate_hits_sample_times():
    g = Grid1D(0, 1, 41)
    tr = simulate(np.sin(np.pi * g.x), g, LIN, NONE, DIRICHLET, 0.05, 0.01)
    np.testing.assert_allclose(tr.times, np.arange(6) * 0.01, atol=0)


def test_spatial_order_at_least_1_9():
    e1, e2 = heat_error(101), heat_error(201)
    assert np.log2(e1 / e2) >= 1.9


def test_temporal_order_at_least_0_9():
    # oracle: the exact semi-discrete mode decays like exp(-lam t), lam = 4/h^2 sin^2(pi h/2)
    g = Grid1D(0, 1, 21)
    lam = 4 / g.h**2 * np.sin(np.pi * g.h / 2) ** 2
    t_end = 0.1
    errs = []
    for m in (200, 400):
        dt = t_end / m
        s = SimState(0.0, np.sin(np.pi * g.x))
        for _ in range(m):
            s = step(s, dt, g, LIN, NONE, DIRICHLET)
        errs.append(np.max(np.abs(s.u - np.exp(-lam * t_end) * np.sin(np.pi * g.x))))
    assert np.log2(errs[0] / errs[1]) >= 0.9


def test_determinism(pm, pm_conv):
    g = Grid1D(-4, 4, 201)
    u0 = initial_profile(InitialDatum(), g)
    bc = BoundaryCondition("neumann_slope", -2.0, 2.0)
    a = simulate(u0, g, pm, pm_conv, bc, 0.05, 0.01)
    b = simulate(u0, g, pm, pm_conv, bc, 0.05, 0.01)
    for sa, sb in zip(a.samples, b.samples):
        assert sa.t == sb.t
        np.testing.assert_array_equal(sa.u, sb.u)


def test_no_blowup_over_many_steps(pm, pm_conv):
    g = Grid1D(-4, 4, 2001)
    u0 = initial_profile(InitialDatum(), g)
    tr = simulate(u0, g, pm, pm_conv, BoundaryCondition("neumann_slope", -2.0, 2.0), 0.08, 0.08)
    assert tr.steps >= 10_000
    assert np.all(np.isfinite(tr.samples[-1].u))


def test_initial_profile_reproduces_slopes():
    g = Grid1D(-4, 4, 801)
    datum = InitialDatum()
    w = 4 * g.h
    ux = gradient(initial_profile(datum, g), g)
    expected = slope_profile(datum, g.x, w)
    away = (np.abs(g.x - datum.a1) > w + 2 * g.h) & (np.abs(g.x - datum.b1) > w + 2 * g.h)
    np.testing.assert_allclose(ux[away], expected[away], atol=1e-10)
    # inside the joins the smoothstep is resolved to second order
    assert np.max(np.abs(ux - expected)) < 2 * (2 / w**2) * g.h**2


def test_initial_datum_slope_check(pm):
    InitialDatum().check(pm)
    with pytest.raises(ValueError, match="strict"):
        InitialDatum(slope_mid=1.0).check(pm)
    with pytest.raises(ValueError):
        InitialDatum(slope_left=-1.0).check(pm)
    InitialDatum(a1=-0.5, b1=0.5, slope_left=0, slope_mid=2, slope_right=0).check(pm, reversed_=True)
    with pytest.raises(ValueError):
        InitialDatum(slope_left=0, slope_mid=0.5, slope_right=0).check(pm, reversed_=True)


@given(
    seed=st.integers(0, 2**32 - 1),
    slope=st.floats(-3, 3),
    amp=st.floats(0, 0.5),
)
def test_conservation_with_equal_boundary_fluxes(seed, slope, amp):
    pm = builtin_flux("perona_malik")
    conv = builtin_convection("none", {}, pm)
    g = Grid1D(-1, 1, 33)
    u = slope * g.x + amp * np.random.default_rng(seed).standard_normal(g.n)
    bc = BoundaryCondition("neumann_slope", slope, slope)
    dt, _ = stable_dt(u, g, pm, 0.9, 1e-8, bc)
    new = step(SimState(0.0, u), dt, g, pm, conv, bc)
    scale = max(1.0, float(np.sum(np.abs(u))))
    assert abs(g.h * (new.u.sum() - u.sum())) <= 1e-13 * scale
