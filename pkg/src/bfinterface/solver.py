"""Explicit finite-volume integration of u_t = (Phi(u_x))_x + Psi(x, u_x)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .model import ConvectionSpec, FluxSpec


class BlowUpError(FloatingPointError):
    """Non-finite values appeared; carries the last good state."""

    def __init__(self, message: str, node: int | None = None, state: "SimState | None" = None):
        super().__init__(message)
        self.node = node
        self.state = state
        self.trajectory: Trajectory | None = None


@dataclass(frozen=True)
class Grid1D:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"grid needs n >= 16 nodes, got {self.n}")
        if not self.b > self.a:
            raise ValueError("grid needs b > a")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.a + np.arange(self.n) * self.h


@dataclass(frozen=True)
class SimState:
    t: float
    u: np.ndarray


@dataclass
class Trajectory:
    grid: Grid1D
    samples: list[SimState] = field(default_factory=list)
    dt_history: list[float] = field(default_factory=list)
    stiff_steps: int = 0
    steps: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])


@dataclass(frozen=True)
class BoundaryCondition:
    kind: Literal["dirichlet", "neumann_slope"] = "neumann_slope"
    left_value: float = 0.0
    right_value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dirichlet", "neumann_slope"):
            raise ValueError(f"unknown boundary condition {self.kind!r}")


@dataclass(frozen=True)
class InitialDatum:
    """Initial profile u0.

    ``piecewise_slope`` integrates a C^1 slope profile (smoothstep joins of
    half-width ``smoothing`` around a1 and b1).  ``sine`` is
    amplitude * sin(pi (x - a) / (b - a)); ``user_table`` interpolates
    (x, u) pairs monotonically.
    """

    kind: Literal["piecewise_slope", "sine", "user_table"] = "piecewise_slope"
    a1: float = -1.0
    b1: float = 1.0
    slope_left: float = -2.0
    slope_mid: float = 0.0
    slope_right: float = 2.0
    smoothing: float | None = None
    amplitude: float = 1.0
    table: tuple[tuple[float, float], ...] = ()

    def check(self, flux: FluxSpec, reversed_: bool = False) -> None:
        """Raise ValueError unless slopes sit in the required regions.

        The normal layout is backward | forward | backward; ``reversed_``
        asks for forward | backward | forward instead.
        """
        if self.kind != "piecewise_slope":
            return
        a, b = flux.alpha, flux.beta
        inside = lambda s: a < s < b
        if not reversed_:
            if not inside(self.slope_mid):
                raise ValueError(f"slope_mid={self.slope_mid} must satisfy alpha < slope_mid < beta (strict)")
            if not self.slope_left < a:
                raise ValueError(f"slope_left={self.slope_left} must be < alpha")
            if not self.slope_right > b:
                raise ValueError(f"slope_right={self.slope_right} must be > beta")
        else:
            if inside(self.slope_mid) or self.slope_mid in (a, b):
                raise ValueError(f"slope_mid={self.slope_mid} must lie outside [alpha, beta]")
            if not (inside(self.slope_left) and inside(self.slope_right)):
                raise ValueError("flank slopes must satisfy alpha < slope < beta")


def _smoothstep_integral(t):
    """Integral of the clamped smoothstep from 0 to t."""
    tc = np.clip(t, 0.0, 1.0)
    return tc**3 - 0.5 * tc**4 + np.maximum(t - 1.0, 0.0)


def slope_profile(datum: InitialDatum, x, smoothing: float | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    w = smoothing if smoothing is not None else datum.smoothing
    if w is None:
        raise ValueError("smoothing width unknown; pass it explicitly")
    t1 = np.clip((x - (datum.a1 - w)) / (2 * w), 0, 1)
    t2 = np.clip((x - (datum.b1 - w)) / (2 * w), 0, 1)
    step = lambda t: t * t * (3 - 2 * t)
    return (
        datum.slope_left
        + (datum.slope_mid - datum.slope_left) * step(t1)
        + (datum.slope_right - datum.slope_mid) * step(t2)
    )


def initial_profile(datum: InitialDatum, grid: Grid1D) -> np.ndarray:
    x = grid.x
    if datum.kind == "sine":
        return datum.amplitude * np.sin(np.pi * (x - grid.a) / (grid.b - grid.a))
    if datum.kind == "user_table":
        pts = np.asarray(datum.table, dtype=float)
        if pts.ndim != 2 or len(pts) < 2:
            raise ValueError("user_table initial datum needs at least two (x, u) pairs")
        pts = pts[np.argsort(pts[:, 0])]
        return PchipInterpolator(pts[:, 0], pts[:, 1], extrapolate=True)(x)
    if datum.kind != "piecewise_slope":
        raise ValueError(f"unknown initial datum kind {datum.kind!r}")
    w = datum.smoothing if datum.smoothing is not None else 4 * grid.h
    if w <= 0:
        raise ValueError("smoothing width must be positive")
    # exact antiderivative of slope_profile, anchored at u(a) = 0
    def antideriv(z):
        return (
            datum.slope_left * (z - grid.a)
            + (datum.slope_mid - datum.slope_left) * 2 * w * _smoothstep_integral((z - (datum.a1 - w)) / (2 * w))
            + (datum.slope_right - datum.slope_mid) * 2 * w * _smoothstep_integral((z - (datum.b1 - w)) / (2 * w))
        )
    return antideriv(x) - antideriv(np.array(grid.a))


def _as_u(state) -> np.ndarray:
    return state.u if isinstance(state, SimState) else np.asarray(state, dtype=float)


def gradient(state, grid: Grid1D) -> np.ndarray:
    """Nodal u_x: central inside, second-order one-sided at both ends."""
    return np.gradient(_as_u(state), grid.h, edge_order=2)


def face_slopes(state, grid: Grid1D, bc: BoundaryCondition | None = None) -> np.ndarray:
    """Face slopes, including the two ghost faces when bc is neumann_slope."""
    s = np.diff(_as_u(state)) / grid.h
    if bc is not None and bc.kind == "neumann_slope":
        s = np.concatenate(([bc.left_value], s, [bc.right_value]))
    return s


def rhs(state, grid: Grid1D, flux: FluxSpec, conv: ConvectionSpec, bc: BoundaryCondition) -> np.ndarray:
    u = _as_u(state)
    h = grid.h
    s = np.diff(u) / h
    F = np.empty(u.size + 1)
    F[1:-1] = flux.phi(s)
    if bc.kind == "neumann_slope":
        F[0] = flux.phi(bc.left_value)
        F[-1] = flux.phi(bc.right_value)
    else:
        F[0] = F[1]
        F[-1] = F[-2]
    out = (F[1:] - F[:-1]) / h + conv.psi(grid.x, gradient(u, grid))
    if bc.kind == "dirichlet":
        out[0] = 0.0
        out[-1] = 0.0
    bad = ~np.isfinite(out)
    if bad.any():
        node = int(np.flatnonzero(bad)[0])
        raise BlowUpError(f"non-finite right-hand side at node {node}", node=node)
    return out


def stable_dt(
    state, grid: Grid1D, flux: FluxSpec, safety: float, dt_floor: float = 0.0, bc: BoundaryCondition | None = None
) -> tuple[float, bool]:
    """safety * h^2 / (2 max |Phi'(face slope)|), floored at dt_floor.

    Returns (dt, stiff); stiff is True when the floor was used, including
    the degenerate case where |Phi'| is below the flux tolerance on every
    face (all slopes critical), where the linear bound says nothing.
    """
    if not 0 < safety <= 1:
        raise ValueError("safety must lie in (0, 1]")
    dmax = float(np.max(np.abs(flux.dphi(face_slopes(state, grid, bc)))))
    if dmax <= flux.tolerance:
        return dt_floor, True
    dt = safety * grid.h**2 / (2.0 * dmax)
    if dt < dt_floor:
        return dt_floor, True
    return dt, False


def step(
    state: SimState, dt: float, grid: Grid1D, flux: FluxSpec, conv: ConvectionSpec, bc: BoundaryCondition
) -> SimState:
    if not dt > 0:
        raise ValueError("dt must be positive")
    try:
        du = rhs(state, grid, flux, conv, bc)
    except BlowUpError as err:
        err.state = state
        raise
    u = state.u + dt * du
    if not np.all(np.isfinite(u)):
        node = int(np.flatnonzero(~np.isfinite(u))[0])
        raise BlowUpError(f"non-finite state at node {node}", node=node, state=state)
    return SimState(state.t + dt, u)


def simulate(
    u0: Sequence[float],
    grid: Grid1D,
    flux: FluxSpec,
    conv: ConvectionSpec,
    bc: BoundaryCondition,
    t_end: float,
    sample_interval: float,
    safety: float = 0.9,
    dt_floor: float | None = None,
) -> Trajectory:
    """Integrate to t_end with adaptive explicit Euler, sampling every sample_interval.

    On blow-up a BlowUpError is raised whose ``trajectory`` attribute holds
    every sample recorded so far.
    """
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    if sample_interval <= 0:
        raise ValueError("sample_interval must be positive")
    if dt_floor is None:
        dt_floor = 1e-10 * t_end
    u = np.array(u0, dtype=float)
    if bc.kind == "dirichlet":
        u[0], u[-1] = bc.left_value, bc.right_value
    state = SimState(0.0, u)
    traj = Trajectory(grid, [state])
    n_samples = int(np.floor(t_end / sample_interval + 1e-9))
    targets = [k * sample_interval for k in range(1, n_samples + 1)]
    if not targets or t_end - targets[-1] > 1e-12 * max(t_end, 1.0):
        targets.append(t_end)
    targets = [t for t in targets if t > 0]
    for target in targets:
        while state.t < target:
            dt, stiff = stable_dt(state, grid, flux, safety, dt_floor, bc)
            traj.stiff_steps += int(stiff)
            remaining = target - state.t
            if dt >= remaining or remaining - dt < 1e-12 * max(target, 1.0):
                dt = remaining
            try:
                new = step(state, dt, grid, flux, conv, bc)
            except BlowUpError as err:
                err.trajectory = traj
                raise
            if dt == remaining:
                new = SimState(target, new.u)
            state = new
            traj.dt_history.append(dt)
            traj.steps += 1
        traj.samples.append(state)
    return traj
