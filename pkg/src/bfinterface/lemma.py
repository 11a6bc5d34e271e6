"""Direct simulation of the degenerate comparison equation v_t = g(v) (v_xx + f).

With g(v) ~ K sqrt(v) a nodal explicit scheme freezes the edge of the
support (g(0) = 0), and the ODE v' = K C sqrt(v) is non-unique at v = 0,
so any scheme that lets g act on zero nodes spreads positivity instantly.
We therefore evolve w = sqrt(v), which obeys

    w_t = gamma(w) (w w_xx + w_x^2 + f / 2),   gamma(w) = g(w^2) / w -> K,

on the support of w.  Each support edge is extended by a one-node linear
ghost ramp; the node beyond the edge is switched on when that ramp,
lifted at rate gamma(0) (w_x^2 + f / 2), crosses zero there.  Nodes away
from every support edge never change.  On smooth positive solutions this
is the same equation; at a front v ~ a (s - x)^2 it reproduces the front
law ds/dt = K (2a + C) / (2 sqrt(a)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numba
import numpy as np

from .model import FluxSpec, builtin_flux
from .solver import BlowUpError, Grid1D, SimState, Trajectory
from .transform import build_g

GKind = Literal["sqrt_exact", "from_flux_upper", "from_flux_lower"]


class VerdictError(ValueError):
    pass


@dataclass(frozen=True)
class LemmaConfig:
    K: float = 1.0
    C: float = 1.0
    g_kind: GKind = "sqrt_exact"
    f_kind: Literal["constant", "perturbed"] = "constant"
    p: float = 0.0
    q: float = 0.0
    x1: float = -6.0
    x2: float = -1.0
    x3: float = 1.0
    x4: float = 6.0
    amplitude: float = 1.0
    n: int = 2401
    t_end: float = 2.0
    sample_interval: float = 0.05
    safety: float = 0.9
    v_thresh: float | None = None
    flux: str = "perona_malik"
    flux_params: dict = field(default_factory=dict)

    def check(self) -> None:
        if not (self.x1 <= self.x2 <= self.x3 <= self.x4):
            raise ValueError("need x1 <= x2 <= x3 <= x4")
        if not self.x2 < self.x3 or self.amplitude <= 0:
            raise ValueError("initial v0 must be positive on (x2, x3); got an empty support")
        if self.g_kind == "sqrt_exact" and not self.K > 0:
            raise ValueError("K must be > 0")
        if not self.C > 0:
            raise ValueError("C must be > 0")
        if self.g_kind not in ("sqrt_exact", "from_flux_upper", "from_flux_lower"):
            raise ValueError(f"unknown g_kind {self.g_kind!r}")
        if self.f_kind not in ("constant", "perturbed"):
            raise ValueError(f"unknown f_kind {self.f_kind!r}")
        if self.n < 16 or self.t_end < 0 or self.sample_interval <= 0 or not 0 < self.safety <= 1:
            raise ValueError("invalid discretization parameters")


def initial_v(cfg: LemmaConfig, x: np.ndarray) -> np.ndarray:
    """amplitude * (x - x2)(x3 - x) / r^2 on (x2, x3), zero elsewhere."""
    r = 0.5 * (cfg.x3 - cfg.x2)
    return cfg.amplitude * np.maximum(0.0, (x - cfg.x2) * (cfg.x3 - x)) / (r * r)


def gamma_table(flux: FluxSpec, side: str, points: int = 4001) -> tuple[np.ndarray, np.ndarray, float]:
    """Tabulate (w, g(w^2)) along the matching branch of eta.

    Parametrizing by the slope s avoids inverting eta: w = sqrt(|Phi(c) -
    Phi(s)|) and g = Phi'(s), with s clustered toward the critical slope c.
    """
    gfn = build_g(flux, side)
    m = flux.midpoint
    c = flux.beta if side == "upper" else flux.alpha
    u = np.linspace(0.0, 1.0, points)
    s = c + (m - c) * u * u
    w = np.sqrt(np.abs(flux.phi(s) - flux.phi(c)))
    g = flux.dphi(s)
    return w, g, gfn.K


@numba.njit(cache=True)
def _gamma(wi, K, wtab, gtab):
    if wtab.size == 0:
        return K
    if wi <= 0.0:
        return K
    if wi >= wtab[-1]:
        return gtab[-1] / wi
    j = np.searchsorted(wtab, wi) - 1
    if j < 0:
        j = 0
    t = (wi - wtab[j]) / (wtab[j + 1] - wtab[j])
    g = gtab[j] + t * (gtab[j + 1] - gtab[j])
    if j == 0:
        # g ~ K w near the edge; interpolating g/w there is exact to first order
        return K + t * (gtab[1] / wtab[1] - K)
    return g / wi


@numba.njit(cache=True)
def _advance(w, x, h, t, t_target, safety, K, C, p, q, wtab, gtab):
    n = w.size
    gam = np.empty(n)
    rate = np.zeros(n)
    ghost = np.zeros(n)
    steps = 0
    dt_min = np.inf
    dt_max = 0.0
    while t < t_target:
        gmax = 0.0
        gam_max = 0.0
        smax = 0.0
        for i in range(n):
            gam[i] = _gamma(w[i], K, wtab, gtab)
            if gam[i] * w[i] > gmax:
                gmax = gam[i] * w[i]
            if gam[i] > gam_max:
                gam_max = gam[i]
        for i in range(n - 1):
            s = abs(w[i + 1] - w[i]) / h
            if s > smax:
                smax = s
        gam0 = _gamma(0.0, K, wtab, gtab)
        dt = t_target - t
        if gmax > 0.0:
            dt = min(dt, safety * h * h / (2.0 * gmax))
        if smax > 0.0:
            dt = min(dt, safety * h / (2.0 * gam_max * smax))
        if t_target - t - dt < 1e-12 * max(t_target, 1.0):
            dt = t_target - t
        for i in range(1, n - 1):
            rate[i] = 0.0
            ghost[i] = 0.0
            wi = w[i]
            if wi > 0.0:
                wl = w[i - 1]
                wr = w[i + 1]
                if wl == 0.0 and wr > 0.0:
                    wl = 2.0 * wi - wr
                if wr == 0.0 and w[i - 1] > 0.0:
                    wr = 2.0 * wi - w[i - 1]
                wxx = (wl - 2.0 * wi + wr) / (h * h)
                wx = (wr - wl) / (2.0 * h)
                f = C + p * np.sin(x[i]) * wi * wi + q * 2.0 * wi * wx
                rate[i] = gam[i] * (wi * wxx + wx * wx + 0.5 * f)
                ghost[i] = wi
            else:
                best = -np.inf
                if i >= 2 and w[i - 1] > 0.0 and w[i - 2] > 0.0:
                    slope = (w[i - 2] - w[i - 1]) / h
                    ramp = 2.0 * w[i - 1] - w[i - 2]
                    cand = ramp + dt * gam0 * (slope * slope + 0.5 * C)
                    if cand > best:
                        best = cand
                if i <= n - 3 and w[i + 1] > 0.0 and w[i + 2] > 0.0:
                    slope = (w[i + 2] - w[i + 1]) / h
                    ramp = 2.0 * w[i + 1] - w[i + 2]
                    cand = ramp + dt * gam0 * (slope * slope + 0.5 * C)
                    if cand > best:
                        best = cand
                if best > 0.0:
                    ghost[i] = best
                    rate[i] = np.nan  # marks an activated halo node
        for i in range(1, n - 1):
            if w[i] > 0.0:
                w[i] = max(w[i] + dt * rate[i], 0.0)
            elif rate[i] != rate[i]:
                w[i] = ghost[i]
        w[0] = 0.0
        w[n - 1] = 0.0
        t += dt
        steps += 1
        if dt < dt_min:
            dt_min = dt
        if dt > dt_max:
            dt_max = dt
        for i in range(n):
            if not np.isfinite(w[i]):
                return t, steps, dt_min, dt_max, i
    return t_target, steps, dt_min, dt_max, -1


def _g_setup(cfg: LemmaConfig) -> tuple[float, np.ndarray, np.ndarray]:
    if cfg.g_kind == "sqrt_exact":
        return float(cfg.K), np.zeros(0), np.zeros(0)
    side = "upper" if cfg.g_kind == "from_flux_upper" else "lower"
    wtab, gtab, K = gamma_table(builtin_flux(cfg.flux, cfg.flux_params), side)
    return K, wtab, gtab


def effective_K(cfg: LemmaConfig) -> float:
    """The sqrt-limit constant of g actually used by the run."""
    return _g_setup(cfg)[0]


def simulate_lemma(cfg: LemmaConfig) -> Trajectory:
    """Integrate the equality case of the comparison inequality.

    Samples store v = w^2.  Zero Dirichlet data at x1 and x4.
    """
    cfg.check()
    grid = Grid1D(cfg.x1, cfg.x4, cfg.n)
    x = grid.x
    K, wtab, gtab = _g_setup(cfg)
    p, q = (cfg.p, cfg.q) if cfg.f_kind == "perturbed" else (0.0, 0.0)
    w = np.sqrt(initial_v(cfg, x))
    w[0] = w[-1] = 0.0
    traj = Trajectory(grid, [SimState(0.0, w * w)])
    n_samples = int(np.floor(cfg.t_end / cfg.sample_interval + 1e-9))
    targets = [k * cfg.sample_interval for k in range(1, n_samples + 1)]
    if not targets or cfg.t_end - targets[-1] > 1e-12 * max(cfg.t_end, 1.0):
        targets.append(cfg.t_end)
    t = 0.0
    for target in (tt for tt in targets if tt > 0):
        t, steps, dt_min, dt_max, bad = _advance(w, x, grid.h, t, target, cfg.safety, K, cfg.C, p, q, wtab, gtab)
        if bad >= 0:
            err = BlowUpError(f"non-finite value at node {bad}", node=bad, state=traj.samples[-1])
            err.trajectory = traj
            raise err
        traj.samples.append(SimState(target, w * w))
        if steps:
            traj.dt_history.extend([dt_min, dt_max])
        traj.steps += steps
    return traj


@dataclass
class FrontTrack:
    times: np.ndarray
    left_front: np.ndarray
    right_front: np.ndarray

    def __len__(self):
        return len(self.times)


def front_track(traj: Trajectory, v_thresh: float | None = None) -> FrontTrack:
    """Outermost points where v exceeds v_thresh, interpolated linearly in v."""
    x = traj.grid.x
    if v_thresh is None:
        v_thresh = 1e-10 * float(np.max(traj.samples[0].u))
    if not v_thresh > 0:
        raise ValueError("v_thresh must be positive")
    rows = []
    for state in traj.samples:
        v = state.u
        idx = np.flatnonzero(v > v_thresh)
        if idx.size == 0:
            rows.append((state.t, np.nan, np.nan))
            continue
        i, j = int(idx[0]), int(idx[-1])
        left = x[i]
        if i > 0:
            left = x[i - 1] + (v_thresh - v[i - 1]) * (x[i] - x[i - 1]) / (v[i] - v[i - 1])
        right = x[j]
        if j < x.size - 1:
            right = x[j] + (v_thresh - v[j]) * (x[j + 1] - x[j]) / (v[j + 1] - v[j])
        rows.append((state.t, left, right))
    t, lf, rf = (np.array(c, dtype=float) for c in zip(*rows))
    return FrontTrack(t, lf, rf)


class LemmaVerdict(NamedTuple):
    passed: bool
    margin: float


def lemma_verdict(
    ft: FrontTrack, K: float, C: float, x2: float, x3: float, tol: float, slack: float = 0.0
) -> LemmaVerdict:
    """Check that the fronts enclose x2 - k t < x < x3 + k t with k = K sqrt(C).

    The allowance at time t is tol + slack * k * t.  ``margin`` is the
    smallest signed gap over all samples, without the allowance.
    """
    if len(ft) == 0 or np.isnan(ft.left_front).any() or np.isnan(ft.right_front).any():
        raise VerdictError("fronts absent in at least one sample")
    k = K * np.sqrt(C)
    t = ft.times
    gaps = np.minimum((x2 - k * t) - ft.left_front, ft.right_front - (x3 + k * t))
    allowance = tol + slack * k * t
    return LemmaVerdict(bool(np.all(gaps >= -allowance)), float(np.min(gaps)))


def front_speed(ft: FrontTrack, t_lo: float) -> tuple[float, float]:
    """Least-squares (left, right) outward front speeds over t >= t_lo."""
    m = ft.times >= t_lo - 1e-12
    if m.sum() < 2:
        raise VerdictError("too few samples to fit a front speed")
    sl = np.polyfit(ft.times[m], ft.left_front[m], 1)[0]
    sr = np.polyfit(ft.times[m], ft.right_front[m], 1)[0]
    return float(-sl), float(sr)
