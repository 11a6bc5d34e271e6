"""Change of variables near a critical slope.

Near beta ("upper" side) the gradient is mapped through a clamped,
nondecreasing copy eta of Phi, giving v = Phi(beta) - eta(u_x) >= 0, which
solves a degenerate parabolic equation with diffusivity
g(v) = Phi'(eta^{-1}(Phi(beta) - v)).  The "lower" side does the same
around alpha with v = eta(u_x) - Phi(alpha).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .model import FluxSpec

Side = Literal["upper", "lower"]

SIGMA_MIN = 1e-14


class DomainError(ValueError):
    """Argument outside the open interval where a map is defined."""


class EstimationError(RuntimeError):
    def __init__(self, message: str, sequence):
        super().__init__(message)
        self.sequence = np.asarray(sequence, dtype=float)


def _cubic_hermite(x, x0, x1, y0, y1, m0, m1):
    L = x1 - x0
    t = (x - x0) / L
    t2, t3 = t * t, t * t * t
    return (
        (2 * t3 - 3 * t2 + 1) * y0
        + (t3 - 2 * t2 + t) * L * m0
        + (-2 * t3 + 3 * t2) * y1
        + (t3 - t2) * L * m1
    )


@dataclass(frozen=True)
class EtaFunction:
    side: Side
    flux: FluxSpec
    # upper: (flat end, (a+b)/2, beta); lower: (alpha, (a+b)/2, flat end)
    breakpoints: tuple[float, float, float]

    @property
    def branch(self) -> tuple[float, float]:
        """Open slope interval on which eta coincides with Phi and is invertible."""
        a, b = self.flux.alpha, self.flux.beta
        m = 0.5 * (a + b)
        return (m, b) if self.side == "upper" else (a, m)

    @property
    def image(self) -> tuple[float, float]:
        lo, hi = self.branch
        return float(self.flux.phi(lo)), float(self.flux.phi(hi))

    def __call__(self, s):
        flux = self.flux
        s = np.asarray(s, dtype=float)
        a, b = flux.alpha, flux.beta
        m = 0.5 * (a + b)
        out = np.empty_like(s)
        if self.side == "upper":
            s_flat = self.breakpoints[0]
            flat, top = float(flux.phi(s_flat)), float(flux.phi(b))
            low = s <= s_flat
            blend = (s > s_flat) & (s < m)
            match = (s >= m) & (s <= b)
            out[low] = flat
            out[s > b] = top
            out[blend] = _cubic_hermite(s[blend], s_flat, m, flat, float(flux.phi(m)), 0.0, float(flux.dphi(m)))
            out[match] = flux.phi(s[match])
        else:
            s_flat = self.breakpoints[2]
            flat, bottom = float(flux.phi(s_flat)), float(flux.phi(a))
            high = s >= s_flat
            blend = (s > m) & (s < s_flat)
            match = (s >= a) & (s <= m)
            out[high] = flat
            out[s < a] = bottom
            out[blend] = _cubic_hermite(s[blend], m, s_flat, float(flux.phi(m)), flat, float(flux.dphi(m)), 0.0)
            out[match] = flux.phi(s[match])
        return out


def build_eta(flux: FluxSpec, side: Side) -> EtaFunction:
    """Clamped flux: Phi on the branch next to the critical slope, constant beyond.

    The free segment is a cubic Hermite with zero slope at the flat end and
    slope Phi' at the matching end.  Raises ValueError if that cubic would
    not be monotone (Fritsch-Carlson bound), which no packaged flux hits.
    """
    a, b = flux.alpha, flux.beta
    m = 0.5 * (a + b)
    if side == "upper":
        s_flat = 0.25 * (3 * a + b)
        span, rise = m - s_flat, float(flux.phi(m) - flux.phi(s_flat))
        bp = (s_flat, m, b)
    elif side == "lower":
        s_flat = 0.25 * (a + 3 * b)
        span, rise = s_flat - m, float(flux.phi(s_flat) - flux.phi(m))
        bp = (a, m, s_flat)
    else:
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    if rise <= 0 or float(flux.dphi(m)) > 3.0 * rise / span:
        raise ValueError("cubic blend for eta would not be monotone for this flux")
    return EtaFunction(side, flux, bp)


def _bisect(fn, lo: float, hi: float, y, xtol: float = 1e-12):
    """Vectorized bisection for an increasing fn on [lo, hi]."""
    y = np.asarray(y, dtype=float)
    left = np.full(y.shape, lo)
    right = np.full(y.shape, hi)
    n_iter = int(np.ceil(np.log2((hi - lo) / xtol))) + 1
    for _ in range(n_iter):
        mid = 0.5 * (left + right)
        above = fn(mid) >= y
        right = np.where(above, mid, right)
        left = np.where(above, left, mid)
    return 0.5 * (left + right)


def eta_inverse(etafn: EtaFunction, y):
    lo_y, hi_y = etafn.image
    y_arr = np.asarray(y, dtype=float)
    if np.any((y_arr <= lo_y) | (y_arr >= hi_y)):
        raise DomainError(f"eta^-1 defined only on the open interval ({lo_y}, {hi_y})")
    lo, hi = etafn.branch
    out = _bisect(etafn.flux.phi, lo, hi, y_arr)
    return float(out) if np.ndim(y) == 0 else out


@dataclass(frozen=True)
class GFunction:
    side: Side
    eta: EtaFunction
    domain_sup: float
    K: float

    def __call__(self, sigma):
        sig = np.asarray(sigma, dtype=float)
        if np.any((sig <= 0) | (sig >= self.domain_sup)):
            raise DomainError(f"g defined only on (0, {self.domain_sup})")
        flux = self.eta.flux
        if self.side == "upper":
            y = float(flux.phi(flux.beta)) - sig
        else:
            y = float(flux.phi(flux.alpha)) + sig
        return flux.dphi(eta_inverse(self.eta, y))

    def clamped(self, sigma):
        """g with sigma clipped into [SIGMA_MIN, domain_sup - SIGMA_MIN]."""
        return self(np.clip(sigma, SIGMA_MIN, self.domain_sup - SIGMA_MIN))


def build_g(flux: FluxSpec, side: Side) -> GFunction:
    eta = build_eta(flux, side)
    m = flux.midpoint
    if side == "upper":
        sup = float(flux.phi(flux.beta) - flux.phi(m))
        K = float(np.sqrt(2.0 * abs(flux.d2phi(flux.beta))))
    else:
        sup = float(flux.phi(m) - flux.phi(flux.alpha))
        K = float(np.sqrt(2.0 * flux.d2phi(flux.alpha)))
    return GFunction(side, eta, sup, K)


def g_limit_estimate(gfn: Callable, sigmas) -> float:
    """Extrapolate lim_{sigma->0+} g(sigma)^2 / sigma.

    The ratio behaves like L + c sqrt(sigma), so consecutive pairs are
    Richardson-extrapolated in sqrt(sigma).  The raw ratios must approach
    their limit monotonically over the last three samples.
    """
    sig = np.asarray(sigmas, dtype=float)
    if sig.ndim != 1 or sig.size < 4:
        raise ValueError("need at least 4 sigma values")
    if np.any(sig <= 0) or np.any(np.diff(sig) >= 0):
        raise ValueError("sigmas must be positive and strictly decreasing")
    ratio = np.asarray(gfn(sig), dtype=float) ** 2 / sig
    tail = np.diff(ratio[-3:])
    scale = max(1.0, float(np.max(np.abs(ratio[-3:]))))
    monotone = np.all(tail >= -1e-12 * scale) or np.all(tail <= 1e-12 * scale)
    shrinking = abs(tail[-1]) <= abs(tail[0]) + 1e-12 * scale
    if not (np.all(np.isfinite(ratio)) and monotone and shrinking):
        raise EstimationError("g^2/sigma does not settle monotonically", ratio)
    r = np.sqrt(sig)
    return float((ratio[-1] * r[-2] - ratio[-2] * r[-1]) / (r[-2] - r[-1]))


def v_field(etafn: EtaFunction, ux) -> np.ndarray:
    flux = etafn.flux
    e = etafn(np.asarray(ux, dtype=float))
    if etafn.side == "upper":
        v = float(flux.phi(flux.beta)) - e
    else:
        v = e - float(flux.phi(flux.alpha))
    # rounding of Phi right next to a critical slope can leave -1 ulp
    return np.maximum(v, 0.0)
