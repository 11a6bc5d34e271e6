"""Matplotlib figures written next to the CSV output of a run."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .solver import Trajectory, gradient  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
    "legend.frameon": False,
}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_interfaces(track, k0, k1, anchors, path, title=None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        t = track.times
        ax.plot(t, track.left_pos, "o-", ms=2.5, label="left edge (measured)")
        ax.plot(t, track.right_pos, "o-", ms=2.5, label="right edge (measured)")
        ax.plot(t, anchors[0] - k0 * t, "k--", lw=1, label=r"$a_1 - k_0 t$")
        ax.plot(t, anchors[1] + k1 * t, "k:", lw=1, label=r"$b_1 + k_1 t$")
        ax.set_xlabel("t")
        ax.set_ylabel("x")
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        return _save(fig, path)


def plot_profiles(traj: Trajectory, alpha, beta, path, count: int = 5) -> Path:
    """u_x at a few evenly spaced samples, with the critical slopes marked."""
    x = traj.grid.x
    picks = np.unique(np.linspace(0, len(traj.samples) - 1, count).round().astype(int))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for k in picks:
            s = traj.samples[k]
            ax.plot(x, gradient(s, traj.grid), lw=0.8, label=f"t={s.t:.3g}")
        for c in (alpha, beta):
            ax.axhline(c, color="k", lw=0.6, ls="--")
        ux0 = gradient(traj.samples[0], traj.grid)
        span = max(abs(alpha), abs(beta), float(np.max(np.abs(ux0))))
        ax.set_ylim(-1.5 * span, 1.5 * span)
        ax.set_xlabel("x")
        ax.set_ylabel(r"$u_x$")
        ax.legend(loc="best", fontsize=8)
        return _save(fig, path)


def plot_fronts(ft, k, x2, x3, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        t = ft.times
        ax.plot(t, ft.left_front, "o-", ms=2.5, label="left front")
        ax.plot(t, ft.right_front, "o-", ms=2.5, label="right front")
        ax.plot(t, x2 - k * t, "k--", lw=1, label=r"$x_2 - K\sqrt{C}\,t$")
        ax.plot(t, x3 + k * t, "k:", lw=1, label=r"$x_3 + K\sqrt{C}\,t$")
        ax.set_xlabel("t")
        ax.set_ylabel("x")
        ax.legend(loc="best")
        return _save(fig, path)


def plot_backward_width(bt, k0, k1, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        w = bt.width
        ax.plot(bt.times, w, "o-", ms=2.5, label="backward width (measured)")
        ax.plot(bt.times, np.maximum(w[0] - (k0 + k1) * bt.times, 0), "k--", lw=1,
                label=r"$w_0 - (k_0 + k_1) t$")
        ax.set_xlabel("t")
        ax.set_ylabel("width")
        ax.legend(loc="best")
        return _save(fig, path)
