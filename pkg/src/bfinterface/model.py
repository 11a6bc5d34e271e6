"""Problem data for u_t = (Phi(u_x))_x + Psi(x, u_x).

A flux Phi is of backward-forward type when it increases on (alpha, beta)
and decreases outside [alpha, beta].  The convection Psi must have constant
x-derivatives A < 0 and B < 0 along the two critical slopes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.interpolate import PchipInterpolator

ScalarFn = Callable[[np.ndarray], np.ndarray]
PlaneFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

ANALYTIC_TOL = 1e-8
TABLE_TOL = 1e-4


class ModelError(ValueError):
    """Problem data that cannot be constructed."""


class HypothesisError(ModelError):
    """Structural hypotheses on Phi or Psi are violated."""


@dataclass(frozen=True)
class FluxSpec:
    name: str
    alpha: float
    beta: float
    phi: ScalarFn
    dphi: ScalarFn
    d2phi: ScalarFn
    tabulated: bool = False

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise ModelError(f"flux {self.name!r}: need alpha < beta, got {self.alpha}, {self.beta}")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.alpha + self.beta)

    @property
    def tolerance(self) -> float:
        return TABLE_TOL if self.tabulated else ANALYTIC_TOL


@dataclass(frozen=True)
class ConvectionSpec:
    name: str
    psi: PlaneFn
    dpsi_dx: PlaneFn
    dpsi_dy: PlaneFn
    A: float
    B: float


@dataclass
class ModelValidationReport:
    flux_ok: bool
    convection_ok: bool
    violations: list[tuple[str, float, float]] = field(default_factory=list)
    k0: float = float("nan")
    k1: float = float("nan")

    @property
    def ok(self) -> bool:
        return self.flux_ok and self.convection_ok

    def to_dict(self) -> dict:
        return {
            "flux_ok": self.flux_ok,
            "convection_ok": self.convection_ok,
            "violations": [list(v) for v in self.violations],
            "k0": self.k0,
            "k1": self.k1,
        }


def _perona_malik(scale: float) -> FluxSpec:
    k = float(scale)
    if k <= 0:
        raise ModelError("perona_malik scale K must be positive")

    def phi(s):
        r = np.asarray(s, dtype=float) / k
        return k * r / (1.0 + r * r)

    def dphi(s):
        r2 = (np.asarray(s, dtype=float) / k) ** 2
        return (1.0 - r2) / (1.0 + r2) ** 2

    def d2phi(s):
        r = np.asarray(s, dtype=float) / k
        return 2.0 * r * (r * r - 3.0) / (1.0 + r * r) ** 3 / k

    return FluxSpec("perona_malik", -k, k, phi, dphi, d2phi)


def _gaussian(scale: float) -> FluxSpec:
    k = float(scale)
    if k <= 0:
        raise ModelError("gaussian scale K must be positive")

    def phi(s):
        s = np.asarray(s, dtype=float)
        return s * np.exp(-s * s / (2 * k * k))

    def dphi(s):
        s = np.asarray(s, dtype=float)
        return (1.0 - s * s / (k * k)) * np.exp(-s * s / (2 * k * k))

    def d2phi(s):
        s = np.asarray(s, dtype=float)
        return (s**3 / k**4 - 3.0 * s / k**2) * np.exp(-s * s / (2 * k * k))

    return FluxSpec("gaussian", -k, k, phi, dphi, d2phi)


def _linear() -> FluxSpec:
    # Monotone heat flux; only meaningful for forward-regime regression runs.
    return FluxSpec(
        "linear",
        -1.0,
        1.0,
        lambda s: np.asarray(s, dtype=float) * 1.0,
        lambda s: np.ones_like(np.asarray(s, dtype=float)),
        lambda s: np.zeros_like(np.asarray(s, dtype=float)),
    )


def _user_table(params: Mapping) -> FluxSpec:
    table = np.asarray(params.get("table", []), dtype=float)
    if table.ndim != 2 or table.shape[1] != 2 or len(table) < 8:
        raise ModelError("user_table flux needs at least 8 (s, phi) pairs")
    s, vals = table[np.argsort(table[:, 0])].T
    if np.any(np.diff(s) <= 0):
        raise ModelError("user_table abscissae must be distinct")
    try:
        alpha, beta = float(params["alpha"]), float(params["beta"])
    except KeyError as exc:
        raise ModelError("user_table flux needs declared alpha and beta") from exc
    for name, crit in (("alpha", alpha), ("beta", beta)):
        if not np.any(np.isclose(s, crit, rtol=0, atol=1e-12)):
            raise ModelError(f"declared {name}={crit} is not a table abscissa")
    mids = 0.5 * (s[1:] + s[:-1])
    secants = np.diff(vals) / np.diff(s)
    expect_up = (mids > alpha) & (mids < beta)
    if np.any(secants[expect_up] <= 0) or np.any(secants[~expect_up] >= 0):
        raise ModelError(
            f"declared alpha={alpha}, beta={beta} disagree with the sign pattern of the table's slopes"
        )
    spline = PchipInterpolator(s, vals, extrapolate=True)
    d1, d2 = spline.derivative(1), spline.derivative(2)
    return FluxSpec(
        str(params.get("label", "user_table")),
        alpha,
        beta,
        lambda x: spline(np.asarray(x, dtype=float)),
        lambda x: d1(np.asarray(x, dtype=float)),
        lambda x: d2(np.asarray(x, dtype=float)),
        tabulated=True,
    )


def builtin_flux(name: str, params: Mapping | None = None) -> FluxSpec:
    """Construct one of the packaged fluxes.

    ``perona_malik`` is s / (1 + (s/K)^2) with critical slopes -K, K;
    ``gaussian`` is s exp(-s^2 / 2K^2), also with critical slopes -K, K.
    ``user_table`` fits tabulated pairs with a monotone cubic spline.
    ``linear`` (Phi(s) = s) is monotone and fails validation on purpose;
    it exists for heat-equation regression runs.
    """
    params = dict(params or {})
    if name == "perona_malik":
        return _perona_malik(params.get("K", 1.0))
    if name == "gaussian":
        return _gaussian(params.get("K", 1.0))
    if name == "user_table":
        return _user_table(params)
    if name == "linear":
        return _linear()
    raise ModelError(f"unknown flux {name!r}")


def _hermite_step(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _hermite_step_deriv(t):
    inside = (t > 0.0) & (t < 1.0)
    return np.where(inside, 6.0 * t * (1.0 - t), 0.0)


def _blend(y, nodes, values):
    """C^1 piecewise cubic through (nodes, values) with zero slope at every node."""
    y = np.asarray(y, dtype=float)
    out = np.full(y.shape, float(values[0]))
    dout = np.zeros(y.shape)
    for (y0, y1), (v0, v1) in zip(zip(nodes[:-1], nodes[1:]), zip(values[:-1], values[1:])):
        t = (y - y0) / (y1 - y0)
        out = out + (v1 - v0) * _hermite_step(t)
        dout = dout + (v1 - v0) * _hermite_step_deriv(t) / (y1 - y0)
    return out, dout


def builtin_convection(name: str, params: Mapping | None, flux: FluxSpec) -> ConvectionSpec:
    """Construct Psi(x, y) = x * h(y) with h(alpha) = A and h(beta) = B.

    ``separable_linear`` holds h at A below alpha and at B above beta.
    ``zero_extension`` relaxes h to 0 outside the slope window
    [y_lo, y_hi] (defaults: one critical-gap beyond each critical slope).
    ``none`` is Psi = 0 and fails validation; it is for regression runs.
    """
    params = dict(params or {})
    alpha, beta = flux.alpha, flux.beta
    if name == "none":
        zero = lambda x, y: np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
        return ConvectionSpec("none", zero, zero, zero, 0.0, 0.0)

    A, B = float(params.get("A", -1.0)), float(params.get("B", -1.0))
    if A >= 0 or B >= 0:
        raise HypothesisError(f"convection needs A < 0 and B < 0, got A={A}, B={B}")

    if name == "separable_linear":
        nodes, values = (alpha, beta), (A, B)
    elif name == "zero_extension":
        gap = beta - alpha
        y_lo = float(params.get("y_lo", alpha - gap))
        y_hi = float(params.get("y_hi", beta + gap))
        if not (y_lo < alpha and y_hi > beta):
            raise ModelError("zero_extension window must strictly contain [alpha, beta]")
        nodes, values = (y_lo, alpha, beta, y_hi), (0.0, A, B, 0.0)
    else:
        raise ModelError(f"unknown convection {name!r}")

    def h(y):
        return _blend(y, nodes, values)[0]

    def dh(y):
        return _blend(y, nodes, values)[1]

    return ConvectionSpec(
        name,
        psi=lambda x, y: np.asarray(x, dtype=float) * h(y),
        dpsi_dx=lambda x, y: h(y) * np.ones_like(np.asarray(x, dtype=float)),
        dpsi_dy=lambda x, y: np.asarray(x, dtype=float) * dh(y),
        A=A,
        B=B,
    )


def rates(flux: FluxSpec, conv: ConvectionSpec) -> tuple[float, float]:
    """Lower bounds (k0, k1) for the expansion speed of the forward region."""
    c_alpha = float(flux.d2phi(flux.alpha))
    c_beta = float(flux.d2phi(flux.beta))
    if c_alpha <= 0:
        raise HypothesisError(f"Phi''(alpha) must be > 0, got {c_alpha}")
    if c_beta >= 0:
        raise HypothesisError(f"Phi''(beta) must be < 0, got {c_beta}")
    return float(np.sqrt(2.0 * abs(conv.A * c_alpha))), float(np.sqrt(2.0 * abs(conv.B * c_beta)))


def _record(violations, cond, points, observed, bad):
    bad = np.asarray(bad)
    if bad.any():
        idx = int(np.flatnonzero(bad.ravel())[0])
        violations.append((cond, float(np.ravel(points)[idx]), float(np.ravel(observed)[idx])))
        return False
    return True


def validate(
    flux: FluxSpec,
    conv: ConvectionSpec,
    domain: tuple[float, float],
    samples: int = 1000,
    radius: float | None = None,
    fd_step: float = 1e-4,
) -> ModelValidationReport:
    """Check every structural hypothesis on a sample grid.

    Violations are returned as data, one entry per failed condition with
    the first witnessing sample point.
    """
    if samples < 100:
        raise ValueError("validate needs at least 100 samples")
    alpha, beta = flux.alpha, flux.beta
    tol = flux.tolerance
    S = radius if radius is not None else 10.0 * max(abs(alpha), abs(beta))
    violations: list[tuple[str, float, float]] = []
    ok = True

    inner = np.linspace(alpha, beta, samples + 2)[1:-1]
    ok &= _record(violations, "dphi>0 on (alpha,beta)", inner, flux.dphi(inner), flux.dphi(inner) <= 0)

    outer = np.concatenate(
        [np.linspace(-S, alpha, samples // 2 + 1)[:-1], np.linspace(beta, S, samples // 2 + 1)[1:]]
    )
    ok &= _record(violations, "dphi<0 outside [alpha,beta]", outer, flux.dphi(outer), flux.dphi(outer) >= 0)

    crit = np.array([alpha, beta])
    d2 = flux.d2phi(crit)
    ok &= _record(violations, "d2phi(alpha)>0", crit[:1], d2[:1], d2[:1] <= 0)
    ok &= _record(violations, "d2phi(beta)<0", crit[1:], d2[1:], d2[1:] >= 0)
    d1 = flux.dphi(crit)
    ok &= _record(violations, "dphi=0 at critical slopes", crit, d1, np.abs(d1) > tol)

    if not flux.tabulated:
        s = np.linspace(-S, S, samples)
        h = fd_step
        fd1 = (flux.phi(s + h) - flux.phi(s - h)) / (2 * h)
        fd2 = (flux.dphi(s + h) - flux.dphi(s - h)) / (2 * h)
        # O(h^2) truncation; 1e-6 leaves room for moderate third derivatives
        ok &= _record(violations, "dphi finite-difference consistency", s, fd1 - flux.dphi(s),
                      np.abs(fd1 - flux.dphi(s)) > 1e-6)
        ok &= _record(violations, "d2phi finite-difference consistency", s, fd2 - flux.d2phi(s),
                      np.abs(fd2 - flux.d2phi(s)) > 1e-6)
    flux_ok = bool(ok)

    ok = True
    ok &= _record(violations, "A<0", [alpha], [conv.A], [conv.A >= 0])
    ok &= _record(violations, "B<0", [beta], [conv.B], [conv.B >= 0])
    xs = np.linspace(domain[0], domain[1], samples)
    for crit_s, const, label in ((alpha, conv.A, "dpsi_dx(x,alpha)=A"), (beta, conv.B, "dpsi_dx(x,beta)=B")):
        got = conv.dpsi_dx(xs, np.full_like(xs, crit_s))
        ok &= _record(violations, label, xs, got, np.abs(got - const) > tol)
    ys = np.linspace(-S, S, samples)
    h = fd_step
    fdx = (conv.psi(xs + h, ys) - conv.psi(xs - h, ys)) / (2 * h)
    err = fdx - conv.dpsi_dx(xs, ys)
    ok &= _record(violations, "dpsi_dx finite-difference consistency", xs, err, np.abs(err) > 1e-6)
    conv_ok = bool(ok)

    report = ModelValidationReport(flux_ok, conv_ok, violations)
    try:
        report.k0, report.k1 = rates(flux, conv)
    except HypothesisError:
        pass
    return report
