"""Acceptance criteria A1-A6, each at its stated tolerance.

Every criterion prints one PASS/FAIL line and the same lines are repeated
in the terminal summary.  Run alone with

    pytest tests/test_acceptance.py -v
"""
import subprocess
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from bfinterface.config import SimConfig, override, parse_config
from bfinterface.lemma import LemmaConfig, front_speed, front_track, lemma_verdict, simulate_lemma
from bfinterface.model import builtin_convection, builtin_flux
from bfinterface.runner import run
from bfinterface.solver import BoundaryCondition, Grid1D, simulate
from bfinterface.transform import build_g, g_limit_estimate

from conftest import ACCEPTANCE_LINES

TESTS_DIR = Path(__file__).parent


def report(key: str, passed: bool, detail: str) -> None:
    line = f"{key} {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line)


def test_A1_forward_region_expands_at_theoretical_rates():
    started = time.perf_counter()
    cfg = override(SimConfig(), "regions.delta", 0.0)
    res = run(cfg)
    r = res.rates
    h = res.trajectory.grid.h
    tr = res.track
    t = tr.times
    left_gap = np.max(tr.left_pos - (cfg.initial.a1 - r.k0_theory * t))
    right_gap = np.min(tr.right_pos - (cfg.initial.b1 + r.k1_theory * t))
    wall = time.perf_counter() - started
    passed = r.g_containment and r.pos_tol == pytest.approx(2 * h) and wall < 120
    report(
        "A1",
        passed,
        f"k0={r.k0_theory:g} k1={r.k1_theory:g} g_margin={r.g_margin:.4g} pos_tol={r.pos_tol:g} "
        f"fit speeds left={r.left_speed_fit:.4g} right={r.right_speed_fit:.4g} "
        f"final edges ({tr.left_pos[-1]:.4f}, {tr.right_pos[-1]:.4f}) vs ({cfg.initial.a1 - r.k0_theory * t[-1]:g}, "
        f"{cfg.initial.b1 + r.k1_theory * t[-1]:g}) worst overshoot left={left_gap:.4g} right={-right_gap:.4g} "
        f"wall={wall:.1f}s",
    )
    assert passed


def _heat_error(n, safety):
    lin = builtin_flux("linear")
    g = Grid1D(0.0, 1.0, n)
    tr = simulate(np.sin(np.pi * g.x), g, lin, builtin_convection("none", {}, lin),
                  BoundaryCondition("dirichlet", 0.0, 0.0), 0.1, 0.1, safety=safety)
    return tr.samples[-1].u - np.exp(-np.pi**2 * 0.1) * np.sin(np.pi * g.x)


def test_A2_heat_regression():
    e201 = _heat_error(201, 0.9)
    linf = float(np.max(np.abs(e201)))
    # spatial component: remove the first-order time error by Richardson in dt
    spatial = {n: float(np.max(np.abs(2 * _heat_error(n, 0.45) - _heat_error(n, 0.9)))) for n in (201, 401)}
    factor = spatial[201] / spatial[401]
    passed = linf <= 5e-3 and factor >= 3.5
    report("A2", passed, f"Linf error={linf:.3e} (<= 5e-3) spatial error ratio h->h/2 = {factor:.4f} (>= 3.5)")
    assert passed


def test_A3_lemma_front_speed():
    started = time.perf_counter()
    cfg = LemmaConfig(K=1.0, C=1.0, n=2401, t_end=2.0)
    traj = simulate_lemma(cfg)
    ft = front_track(traj)
    h = traj.grid.h
    verdict = lemma_verdict(ft, cfg.K, cfg.C, cfg.x2, cfg.x3, 2 * h, slack=0.1)
    t_lo = 5 * cfg.sample_interval
    s2401 = front_speed(ft, t_lo)
    fine = simulate_lemma(replace(cfg, n=4801))
    s4801 = front_speed(front_track(fine), t_lo)
    increases = s4801[1] > s2401[1] and s4801[0] > s2401[0]
    wall = time.perf_counter() - started
    passed = verdict.passed and increases
    report(
        "A3",
        passed,
        f"verdict={'true' if verdict.passed else 'false'} (tol 2h + 0.1 t) "
        f"right speed n=2401 {s2401[1]:.6f} n=4801 {s4801[1]:.6f} "
        f"left speed n=2401 {s2401[0]:.6f} n=4801 {s4801[0]:.6f} "
        f"speed increases on refinement: {'yes' if increases else 'no'} wall={wall:.1f}s",
    )
    assert passed


def test_A4_backward_interval_shrinks():
    cfg = parse_config((Path(__file__).parents[1] / "configs" / "reversed.json").read_text())
    res = run(cfg)
    bt = res.backward
    h = res.trajectory.grid.h
    w = bt.width
    bound = w[0] - (res.rates.k0_theory + res.rates.k1_theory) * bt.times + 4 * h
    alive = w > 0
    excess = (w - bound)[alive]
    passed = bool(np.all(excess <= 0))
    first_bad = bt.times[alive][np.argmax(excess > 0)] if not passed else float("nan")
    report(
        "A4",
        passed,
        f"w0={w[0]:.4g} final width={w[-1]:.4g} bound at t_end={w[0] - 2 * bt.times[-1]:.4g} (+4h) "
        f"worst excess={excess.max():.4g} first violation t={first_bad:.3g}",
    )
    assert passed


def test_A5_g_limit():
    pm = builtin_flux("perona_malik")
    sigmas = np.logspace(-2, -6, 9)
    upper = g_limit_estimate(build_g(pm, "upper"), sigmas)
    lower = g_limit_estimate(build_g(pm, "lower"), sigmas)
    target_u = 2 * abs(float(pm.d2phi(pm.beta)))
    target_l = 2 * float(pm.d2phi(pm.alpha))
    passed = abs(upper - target_u) <= 0.01 * target_u and abs(lower - target_l) <= 0.01 * target_l
    report("A5", passed, f"upper limit={upper:.6f} (target {target_u:g}) lower limit={lower:.6f} (target {target_l:g})")
    assert passed


def test_A6_invariant_suites():
    started = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-m", "invariant", "-p", "no:cacheprovider", str(TESTS_DIR)],
        capture_output=True,
        text=True,
        cwd=TESTS_DIR.parent,
    )
    wall = time.perf_counter() - started
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()[-200:]
    passed = proc.returncode == 0 and wall < 60
    report("A6", passed, f"property suites: {summary} wall={wall:.1f}s (< 60 s)")
    assert passed, proc.stdout[-3000:]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
