from dataclasses import replace

import numpy as np
import pytest

from bfinterface.lemma import (
    FrontTrack,
    LemmaConfig,
    VerdictError,
    effective_K,
    front_speed,
    front_track,
    gamma_table,
    initial_v,
    lemma_verdict,
    simulate_lemma,
)
from bfinterface.solver import Grid1D, SimState, Trajectory
from bfinterface.transform import build_g

SMALL = LemmaConfig(n=401, t_end=0.5, sample_interval=0.05)


@pytest.fixture(scope="module")
def small_run():
    return simulate_lemma(SMALL)


@pytest.mark.parametrize(
    "changes",
    [
        {"x2": 0.0, "x3": 0.0},
        {"amplitude": 0.0},
        {"K": 0.0},
        {"C": -1.0},
        {"x1": 0.0},
        {"g_kind": "cubic"},
        {"n": 8},
    ],
)
def test_config_rejections(changes):
    with pytest.raises(ValueError):
        replace(SMALL, **changes).check()


def test_initial_v_is_the_parabola():
    x = np.linspace(-6, 6, 121)
    np.testing.assert_allclose(initial_v(LemmaConfig(), x), np.maximum(0, 1 - x**2), atol=1e-15)


def test_tent_fronts():
    g = Grid1D(-6, 6, 241)
    traj = Trajectory(g, [SimState(0.0, np.maximum(0, 1 - np.abs(g.x)))])
    ft = front_track(traj)
    assert abs(ft.left_front[0] + 1) <= g.h
    assert abs(ft.right_front[0] - 1) <= g.h


def test_all_zero_sample_has_no_front():
    g = Grid1D(-1, 1, 21)
    traj = Trajectory(g, [SimState(0.0, np.maximum(0, 1 - g.x**2)), SimState(1.0, np.zeros(21))])
    ft = front_track(traj)
    assert np.isnan(ft.left_front[1]) and np.isnan(ft.right_front[1])
    with pytest.raises(VerdictError):
        lemma_verdict(ft, 1, 1, -1, 1, 0.1)


def test_verdict_exact_speed():
    t = np.linspace(0, 2, 41)
    ft = FrontTrack(t, -1 - 2 * t, 1 + 2 * t)
    res = lemma_verdict(ft, K=1.0, C=4.0, x2=-1, x3=1, tol=0.01)
    assert res.passed and res.margin == pytest.approx(0.0, abs=1e-14)


def test_verdict_frozen_fronts():
    h = 0.005
    t = np.linspace(0, 2, 41)
    ft = FrontTrack(t, np.full_like(t, -1.0), np.full_like(t, 1.0))
    assert not lemma_verdict(ft, 1, 1, -1, 1, 2 * h).passed
    early = FrontTrack(t[:1], ft.left_front[:1], ft.right_front[:1])
    assert lemma_verdict(early, 1, 1, -1, 1, 2 * h).passed


def test_front_speed_exact():
    t = np.linspace(0, 1, 11)
    assert front_speed(FrontTrack(t, -1 - 0.5 * t, 1 + 2 * t), 0.2) == pytest.approx((0.5, 2.0), abs=1e-12)
    with pytest.raises(VerdictError):
        front_speed(FrontTrack(t, -1 - t, 1 + t), 0.95)


def test_nonnegative(small_run):
    for s in small_run.samples:
        assert np.all(s.u >= 0)


def test_support_expands(small_run):
    ft = front_track(small_run)
    assert np.all(np.diff(ft.right_front) > 0)
    assert np.all(np.diff(ft.left_front) < 0)


def test_symmetric_datum_symmetric_fronts(small_run):
    ft = front_track(small_run)
    np.testing.assert_allclose(ft.left_front, -ft.right_front, atol=1e-9)


def test_comparison_on_nested_tents(small_run):
    bigger = simulate_lemma(replace(SMALL, amplitude=1.5))
    for lo, hi in zip(small_run.samples, bigger.samples):
        assert np.all(hi.u >= lo.u - 1e-12)
    wider = simulate_lemma(replace(SMALL, x2=-1.2, x3=1.2))
    for lo, hi in zip(small_run.samples, wider.samples):
        assert np.all(hi.u >= lo.u - 1e-12)


def test_time_scaling_with_K(small_run):
    c = 2.0
    fast = simulate_lemma(replace(SMALL, K=c, t_end=SMALL.t_end / c, sample_interval=SMALL.sample_interval / c))
    assert len(fast.samples) == len(small_run.samples)
    for a, b in zip(small_run.samples, fast.samples):
        assert b.t == pytest.approx(a.t / c, abs=1e-15)
        np.testing.assert_allclose(b.u, a.u, rtol=0, atol=1e-8)


def test_perturbed_source_still_spreads():
    cfg = replace(SMALL, f_kind="perturbed", p=0.1, q=0.1)
    traj = simulate_lemma(cfg)
    ft = front_track(traj)
    h = traj.grid.h
    assert lemma_verdict(ft, cfg.K, cfg.C, cfg.x2, cfg.x3, 2 * h, 0.1).passed


def test_gamma_table_matches_g():
    from bfinterface.model import builtin_flux

    pm = builtin_flux("perona_malik")
    w, g, K = gamma_table(pm, "upper", points=201)
    gfn = build_g(pm, "upper")
    assert K == gfn.K == 1.0
    inside = (w > 1e-6) & (w**2 < gfn.domain_sup * (1 - 1e-9))
    np.testing.assert_allclose(g[inside], gfn(w[inside] ** 2), rtol=0, atol=1e-9)


def test_from_flux_upper_verdict():
    cfg = replace(LemmaConfig(), g_kind="from_flux_upper", n=1201)
    assert effective_K(cfg) == 1.0
    traj = simulate_lemma(cfg)
    ft = front_track(traj)
    assert lemma_verdict(ft, effective_K(cfg), cfg.C, cfg.x2, cfg.x3, 2 * traj.grid.h, 0.1).passed


def test_from_flux_lower_verdict():
    cfg = replace(LemmaConfig(), g_kind="from_flux_lower", n=601, t_end=1.0)
    traj = simulate_lemma(cfg)
    ft = front_track(traj)
    assert lemma_verdict(ft, effective_K(cfg), cfg.C, cfg.x2, cfg.x3, 2 * traj.grid.h, 0.1).passed
