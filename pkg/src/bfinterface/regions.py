"""Forward/backward/degenerate regions and the motion of their interfaces."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .model import FluxSpec
from .solver import Grid1D, Trajectory, gradient

SUB, SUPER, DEGENERATE = 0, 1, 2
LABEL_NAMES = ("sub", "super", "degenerate")


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class RegionLabels:
    labels: np.ndarray
    delta: float

    def measure(self, h: float) -> tuple[float, float, float]:
        counts = np.bincount(self.labels, minlength=3)
        return tuple(float(h * c) for c in counts)


def classify(ux, flux: FluxSpec, delta: float = 0.0) -> RegionLabels:
    if delta < 0:
        raise ValueError("delta must be >= 0")
    ux = np.asarray(ux, dtype=float)
    a, b = flux.alpha, flux.beta
    labels = np.full(ux.shape, DEGENERATE, dtype=np.int8)
    labels[(ux > a + delta) & (ux < b - delta)] = SUB
    labels[(ux < a - delta) | (ux > b + delta)] = SUPER
    return RegionLabels(labels, delta)


class Interfaces(NamedTuple):
    left: float | None
    right: float | None
    collapsed: bool = False


def _crossing(x0, x1, f0, f1, level):
    if f1 == f0:
        return 0.5 * (x0 + x1)
    return x0 + (level - f0) * (x1 - x0) / (f1 - f0)


def _component(mask: np.ndarray, anchor: int) -> tuple[int, int] | None:
    """Maximal run of True in mask containing anchor, or the run nearest to it."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return None
    if not mask[anchor]:
        anchor = int(idx[np.argmin(np.abs(idx - anchor))])
    lo = anchor
    while lo > 0 and mask[lo - 1]:
        lo -= 1
    hi = anchor
    while hi < mask.size - 1 and mask[hi + 1]:
        hi += 1
    return lo, hi


def interface_positions(
    ux, grid: Grid1D, flux: FluxSpec, anchors: tuple[float, float], delta: float = 0.0
) -> Interfaces:
    """Edges of the forward component seeded between the two anchors.

    Each edge is placed where the linear interpolant of ux between the
    bracketing nodes crosses the critical slope that is exceeded outside.
    An edge is None if the component reaches the end of the domain.
    """
    ux = np.asarray(ux, dtype=float)
    x = grid.x
    sub = classify(ux, flux, delta).labels == SUB
    mid = 0.5 * (anchors[0] + anchors[1])
    anchor = int(np.clip(round((mid - grid.a) / grid.h), 0, grid.n - 1))
    comp = _component(sub, anchor)
    if comp is None:
        return Interfaces(None, None, True)
    lo, hi = comp
    a, b = flux.alpha, flux.beta
    left = right = None
    if lo > 0:
        level = a if ux[lo - 1] <= a + delta else b
        left = _crossing(x[lo - 1], x[lo], ux[lo - 1], ux[lo], level)
    if hi < grid.n - 1:
        level = b if ux[hi + 1] >= b - delta else a
        right = _crossing(x[hi], x[hi + 1], ux[hi], ux[hi + 1], level)
    return Interfaces(left, right, False)


@dataclass
class InterfaceTrack:
    times: np.ndarray
    left_pos: np.ndarray
    right_pos: np.ndarray
    sub_measure: np.ndarray
    super_measure: np.ndarray
    degen_measure: np.ndarray
    collapsed: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.collapsed is None:
            self.collapsed = np.zeros(len(self.times), dtype=bool)

    def __len__(self):
        return len(self.times)

    @classmethod
    def empty(cls) -> "InterfaceTrack":
        z = np.zeros(0)
        return cls(z, z, z, z, z, z, np.zeros(0, dtype=bool))


def track(traj: Trajectory, flux: FluxSpec, anchors: tuple[float, float], delta: float = 0.0) -> InterfaceTrack:
    if not traj.samples:
        raise ValueError("empty trajectory")
    grid = traj.grid
    rows = []
    for state in traj.samples:
        ux = gradient(state, grid)
        pos = interface_positions(ux, grid, flux, anchors, delta)
        meas = classify(ux, flux, delta).measure(grid.h)
        rows.append((
            state.t,
            np.nan if pos.left is None else pos.left,
            np.nan if pos.right is None else pos.right,
            *meas,
            pos.collapsed,
        ))
    cols = list(zip(*rows))
    return InterfaceTrack(*(np.array(c, dtype=float) for c in cols[:6]), np.array(cols[6], dtype=bool))


@dataclass
class RateReport:
    k0_theory: float
    k1_theory: float
    left_speed_fit: float
    right_speed_fit: float
    fit_window: tuple[float, float]
    fit_residual: float
    g_containment: bool
    g_margin: float
    pos_tol: float
    kind: str = "expansion"

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["fit_window"] = list(self.fit_window)
        d["g_containment"] = bool(self.g_containment)
        return d


def _linear_fit(t, y) -> tuple[float, float, np.ndarray]:
    A = np.column_stack([t, np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), float(coef[1]), y - A @ coef


def _window_mask(times, window) -> np.ndarray:
    lo, hi = window
    mask = (times >= lo - 1e-12) & (times <= hi + 1e-12)
    if mask.sum() < 10:
        raise FitError(f"fit window {window} holds {int(mask.sum())} samples; need at least 10")
    return mask


def fit_rates(
    tr: InterfaceTrack,
    k0: float,
    k1: float,
    window: tuple[float, float],
    anchors: tuple[float, float],
    pos_tol: float,
    domain: tuple[float, float] | None = None,
) -> RateReport:
    """Fit interface speeds and test containment of the cone a1 - k0 t < x < b1 + k1 t.

    A missing edge (forward component touching the domain end) counts as
    sitting on that end of ``domain`` for the containment test; a
    collapsed sample fails it.
    """
    t = np.asarray(tr.times, dtype=float)
    mask = _window_mask(t, window)
    left, right = tr.left_pos[mask], tr.right_pos[mask]
    if np.isnan(left).any() or np.isnan(right).any():
        raise FitError("interface positions absent inside the fit window")
    sl, _, rl = _linear_fit(t[mask], left)
    sr, _, rr = _linear_fit(t[mask], right)
    residual = float(np.sqrt(np.mean(np.concatenate([rl, rr]) ** 2)))

    a1, b1 = anchors
    lo, hi = domain if domain is not None else (-np.inf, np.inf)
    lp = np.where(np.isnan(tr.left_pos), lo, tr.left_pos)
    rp = np.where(np.isnan(tr.right_pos), hi, tr.right_pos)
    margins = np.minimum((a1 - k0 * t) - lp, rp - (b1 + k1 * t))
    margins = np.where(tr.collapsed, -np.inf, margins)
    g_margin = float(np.min(margins))
    return RateReport(
        k0_theory=k0,
        k1_theory=k1,
        left_speed_fit=-sl,
        right_speed_fit=sr,
        fit_window=(float(window[0]), float(window[1])),
        fit_residual=residual,
        g_containment=bool(g_margin >= -pos_tol),
        g_margin=g_margin,
        pos_tol=pos_tol,
    )


@dataclass
class BackwardTrack:
    """Hull of the backward (non-forward) set around the seeded interval."""

    times: np.ndarray
    left_end: np.ndarray
    right_end: np.ndarray

    @property
    def width(self) -> np.ndarray:
        return np.nan_to_num(self.right_end - self.left_end, nan=0.0)


def backward_hull(ux, grid: Grid1D, flux: FluxSpec, delta: float = 0.0) -> tuple[float | None, float | None]:
    """Outermost interpolated crossings bounding every non-forward interior node.

    Only nodes strictly inside the grid are considered so that boundary
    layers do not count; returns (None, None) if no such node exists.
    """
    ux = np.asarray(ux, dtype=float)
    x = grid.x
    notsub = classify(ux, flux, delta).labels != SUB
    notsub[0] = notsub[-1] = False
    idx = np.flatnonzero(notsub)
    if idx.size == 0:
        return None, None
    a, b = flux.alpha, flux.beta
    i, j = int(idx[0]), int(idx[-1])
    lev_l = b if ux[i] >= b else a
    lev_r = b if ux[j] >= b else a
    return (_crossing(x[i - 1], x[i], ux[i - 1], ux[i], lev_l),
            _crossing(x[j], x[j + 1], ux[j], ux[j + 1], lev_r))


def track_backward(traj: Trajectory, flux: FluxSpec, delta: float = 0.0) -> BackwardTrack:
    rows = []
    for state in traj.samples:
        lo, hi = backward_hull(gradient(state, traj.grid), traj.grid, flux, delta)
        rows.append((state.t, np.nan if lo is None else lo, np.nan if hi is None else hi))
    t, lo, hi = (np.array(c, dtype=float) for c in zip(*rows))
    return BackwardTrack(t, lo, hi)


def shrink_report(bt: BackwardTrack, k0: float, k1: float, window: tuple[float, float], tol: float) -> RateReport:
    """Compare the shrinking backward interval with w0 - (k0 + k1) t.

    ``g_margin`` is min over samples with positive width of
    w0 - (k0 + k1) t - w(t); containment holds when it is >= -tol.
    """
    w = bt.width
    if w[0] <= 0:
        raise FitError("backward interval collapsed at t=0")
    t = bt.times
    alive = w > 0
    margins = (w[0] - (k0 + k1) * t - w)[alive]
    mask = _window_mask(t, window) & alive
    if mask.sum() >= 2:
        sl, _, rl = _linear_fit(t[mask], bt.left_end[mask])
        sr, _, rr = _linear_fit(t[mask], bt.right_end[mask])
        residual = float(np.sqrt(np.mean(np.concatenate([rl, rr]) ** 2)))
    else:
        sl = sr = residual = float("nan")
    g_margin = float(np.min(margins))
    return RateReport(
        k0_theory=k0,
        k1_theory=k1,
        left_speed_fit=sl,
        right_speed_fit=-sr,
        fit_window=(float(window[0]), float(window[1])),
        fit_residual=residual,
        g_containment=bool(g_margin >= -tol),
        g_margin=g_margin,
        pos_tol=tol,
        kind="shrink",
    )
