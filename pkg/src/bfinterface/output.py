"""CSV, SVG and JSON artifacts."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .lemma import FrontTrack
from .model import FluxSpec
from .regions import LABEL_NAMES, InterfaceTrack, RateReport, classify
from .solver import Trajectory, gradient

INTERFACE_COLUMNS = ("t", "left_pos", "right_pos", "sub_measure", "super_measure", "degen_measure")
STATE_COLUMNS = ("t", "x", "u", "ux", "label")
FRONT_COLUMNS = ("t", "left_front", "right_front")


def fmt(value) -> str:
    """Shortest round-trip text for a float; NaN becomes an empty field."""
    v = float(value)
    if math.isnan(v):
        return ""
    r = repr(v)
    return r[:-2] if r.endswith(".0") else r


def _write_rows(path, header, rows) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def emit_interfaces_csv(tr: InterfaceTrack, path) -> Path:
    cols = (tr.times, tr.left_pos, tr.right_pos, tr.sub_measure, tr.super_measure, tr.degen_measure)
    rows = ([fmt(c[i]) for c in cols] for i in range(len(tr)))
    return _write_rows(path, INTERFACE_COLUMNS, rows)


def emit_states_csv(traj: Trajectory, flux: FluxSpec, path, delta: float = 0.0) -> Path:
    x = traj.grid.x

    def rows():
        for state in traj.samples:
            ux = gradient(state, traj.grid)
            labels = classify(ux, flux, delta).labels
            t = fmt(state.t)
            for xi, ui, gi, li in zip(x, state.u, ux, labels):
                yield (t, fmt(xi), fmt(ui), fmt(gi), LABEL_NAMES[li])

    return _write_rows(path, STATE_COLUMNS, rows())


def emit_fronts_csv(ft: FrontTrack, path) -> Path:
    rows = ((fmt(t), fmt(l), fmt(r)) for t, l, r in zip(ft.times, ft.left_front, ft.right_front))
    return _write_rows(path, FRONT_COLUMNS, rows)


def emit_csv(obj, path, flux: FluxSpec | None = None) -> Path:
    if isinstance(obj, InterfaceTrack):
        return emit_interfaces_csv(obj, path)
    if isinstance(obj, FrontTrack):
        return emit_fronts_csv(obj, path)
    if isinstance(obj, Trajectory):
        if flux is None:
            raise ValueError("states.csv needs the flux to label nodes")
        return emit_states_csv(obj, flux, path)
    raise TypeError(f"cannot write {type(obj).__name__} as CSV")


def read_csv(path) -> dict[str, np.ndarray | list[str]]:
    """Read an emitted CSV back into columns; empty numeric fields become NaN."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols: list[list[str]] = [[] for _ in header]
        for row in reader:
            for c, v in zip(cols, row):
                c.append(v)
    out: dict[str, np.ndarray | list[str]] = {}
    for name, values in zip(header, cols):
        if name == "label":
            out[name] = values
        else:
            out[name] = np.array([float(v) if v != "" else np.nan for v in values], dtype=float)
    return out


class _Axes:
    """Maps data coordinates onto an SVG canvas."""

    def __init__(self, xlim, ylim, width=640, height=420, margin=(70, 20, 30, 55)):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        self.w, self.h = width, height
        self.ml, self.mr, self.mt, self.mb = margin

    def px(self, x):
        return self.ml + (x - self.x0) / (self.x1 - self.x0) * (self.w - self.ml - self.mr)

    def py(self, y):
        return self.h - self.mb - (y - self.y0) / (self.y1 - self.y0) * (self.h - self.mt - self.mb)

    def points(self, xs, ys) -> str:
        return " ".join(f"{self.px(x):.3f},{self.py(y):.3f}" for x, y in zip(xs, ys) if np.isfinite(y))


def _limits(lo, hi):
    if not np.isfinite(lo) or not np.isfinite(hi):
        return (0.0, 1.0)
    if hi - lo < 1e-12:
        pad = max(abs(lo) * 0.05, 0.5)
        return (lo - pad, hi + pad)
    pad = 0.05 * (hi - lo)
    return (lo - pad, hi + pad)


def _ticks(lo, hi, count=5):
    return np.linspace(lo, hi, count)


def emit_svg(tr: InterfaceTrack, report: RateReport, anchors, path, title: str = "Interface positions") -> Path:
    """Standalone SVG: measured edges vs t plus the lines a1 - k0 t and b1 + k1 t."""
    if len(tr) == 0:
        raise ValueError("cannot plot an empty track")
    a1, b1 = anchors
    t = np.asarray(tr.times, dtype=float)
    t_lo, t_hi = float(t.min()), float(t.max())
    if t_hi == t_lo:
        t_hi = t_lo + 1.0
    ref_t = np.array([t_lo, t_hi])
    ref_left = a1 - report.k0_theory * ref_t
    ref_right = b1 + report.k1_theory * ref_t
    ys = np.concatenate([tr.left_pos, tr.right_pos, ref_left, ref_right])
    ys = ys[np.isfinite(ys)]
    ax = _Axes((t_lo, t_hi), _limits(float(ys.min()), float(ys.max())))

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{ax.w}" height="{ax.h}" viewBox="0 0 {ax.w} {ax.h}">',
        f'<rect x="0" y="0" width="{ax.w}" height="{ax.h}" fill="white"/>',
        f'<text x="{ax.w / 2:.1f}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>',
    ]
    x_axis_y = ax.h - ax.mb
    parts.append(f'<line x1="{ax.ml}" y1="{x_axis_y}" x2="{ax.w - ax.mr}" y2="{x_axis_y}" stroke="black"/>')
    parts.append(f'<line x1="{ax.ml}" y1="{ax.mt}" x2="{ax.ml}" y2="{x_axis_y}" stroke="black"/>')
    for tv in _ticks(ax.x0, ax.x1):
        px = ax.px(tv)
        parts.append(f'<line x1="{px:.3f}" y1="{x_axis_y}" x2="{px:.3f}" y2="{x_axis_y + 5}" stroke="black"/>')
        parts.append(f'<text x="{px:.3f}" y="{x_axis_y + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{tv:.3g}</text>')
    for yv in _ticks(ax.y0, ax.y1):
        py = ax.py(yv)
        parts.append(f'<line x1="{ax.ml - 5}" y1="{py:.3f}" x2="{ax.ml}" y2="{py:.3f}" stroke="black"/>')
        parts.append(f'<text x="{ax.ml - 8}" y="{py + 4:.3f}" text-anchor="end" font-family="sans-serif" font-size="11">{yv:.3g}</text>')
    parts.append(f'<text x="{(ax.ml + ax.w - ax.mr) / 2:.1f}" y="{ax.h - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">t</text>')
    parts.append(f'<text x="16" y="{(ax.mt + x_axis_y) / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {(ax.mt + x_axis_y) / 2:.1f})">x</text>')

    ref_style = 'fill="none" stroke="#888888" stroke-width="1.5" stroke-dasharray="6,4"'
    parts.append(f'<polyline class="reference-left" points="{ax.points(ref_t, ref_left)}" {ref_style}/>')
    parts.append(f'<polyline class="reference-right" points="{ax.points(ref_t, ref_right)}" {ref_style}/>')
    for cls, ys_, colour in (("measured-left", tr.left_pos, "#1f77b4"), ("measured-right", tr.right_pos, "#d62728")):
        pts = ax.points(t, ys_)
        if pts:
            parts.append(f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{colour}" stroke-width="2"/>')
            for x_, y_ in zip(t, ys_):
                if np.isfinite(y_):
                    parts.append(f'<circle cx="{ax.px(x_):.3f}" cy="{ax.py(y_):.3f}" r="2" fill="{colour}"/>')
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_report(report: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
