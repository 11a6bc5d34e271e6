"""End-to-end experiment pipelines built from a SimConfig."""
from __future__ import annotations

import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import output, plotting
from .config import SimConfig, boundary_of, build_model, config_to_dict, grid_of
from .lemma import (
    FrontTrack,
    LemmaConfig,
    LemmaVerdict,
    effective_K,
    front_speed,
    front_track,
    lemma_verdict,
    simulate_lemma,
)
from .model import ModelValidationReport, rates, validate
from .regions import BackwardTrack, InterfaceTrack, RateReport, fit_rates, shrink_report, track, track_backward
from .solver import Trajectory, initial_profile, simulate


class ValidationFailed(RuntimeError):
    def __init__(self, report: ModelValidationReport):
        super().__init__("model violates the structural hypotheses: " + "; ".join(v[0] for v in report.violations))
        self.report = report


@dataclass
class RunResult:
    config: SimConfig
    validation: ModelValidationReport
    trajectory: Trajectory
    rates: RateReport | None
    track: InterfaceTrack | None = None
    backward: BackwardTrack | None = None
    wall_time: float = 0.0

    def report(self) -> dict:
        dts = np.asarray(self.trajectory.dt_history)
        return {
            "config": config_to_dict(self.config),
            "validation": self.validation.to_dict(),
            "rates": None if self.rates is None else self.rates.to_dict(),
            "stiffness": {"stiff_steps": self.trajectory.stiff_steps},
            "wall_time": self.wall_time,
            "scheme": {
                "h": self.trajectory.grid.h,
                "steps": self.trajectory.steps,
                "dt_min": float(dts.min()) if dts.size else None,
                "dt_max": float(dts.max()) if dts.size else None,
                "samples": len(self.trajectory.samples),
            },
        }


def check_model(cfg: SimConfig) -> ModelValidationReport:
    flux, conv = build_model(cfg)
    return validate(flux, conv, (cfg.grid.a, cfg.grid.b), samples=1000)


def theoretical_rates(cfg: SimConfig) -> tuple[float, float]:
    return rates(*build_model(cfg))


def run(cfg: SimConfig) -> RunResult:
    """Validate, integrate, track interfaces and fit their speeds.

    Dispatches on ``cfg.experiment``: ``theorem`` follows the edges of the
    seeded forward interval, ``time_reversed`` the shrinking backward one.
    """
    started = time.perf_counter()
    flux, conv = build_model(cfg)
    report = validate(flux, conv, (cfg.grid.a, cfg.grid.b), samples=1000)
    if cfg.model.strict and not report.ok:
        raise ValidationFailed(report)
    grid = grid_of(cfg)
    u0 = initial_profile(cfg.initial, grid)
    traj = simulate(u0, grid, flux, conv, boundary_of(cfg), cfg.time.t_end, cfg.time.sample_interval,
                    cfg.time.safety, cfg.dt_floor())
    anchors = (cfg.initial.a1, cfg.initial.b1)
    result = RunResult(cfg, report, traj, None)
    k0, k1 = (report.k0, report.k1)
    if cfg.initial.kind == "piecewise_slope" and np.isfinite(k0) and np.isfinite(k1):
        delta = cfg.delta(flux)
        if cfg.experiment == "time_reversed":
            result.backward = track_backward(traj, flux, delta)
            result.rates = shrink_report(result.backward, k0, k1, cfg.fit_window(), cfg.pos_tol())
        else:
            result.track = track(traj, flux, anchors, delta)
            result.rates = fit_rates(result.track, k0, k1, cfg.fit_window(), anchors, cfg.pos_tol(),
                                     domain=(cfg.grid.a, cfg.grid.b))
    elif cfg.initial.kind == "piecewise_slope":
        result.track = track(traj, flux, anchors, cfg.delta(flux))
    result.wall_time = time.perf_counter() - started
    return result


def time_reversed_experiment(cfg: SimConfig) -> RateReport:
    return run(replace(cfg, experiment="time_reversed")).rates


def write_run(result: RunResult, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    flux, _ = build_model(cfg)
    anchors = (cfg.initial.a1, cfg.initial.b1)
    written = [output.emit_states_csv(result.trajectory, flux, out / "states.csv", cfg.delta(flux))]
    if result.track is not None:
        written.append(output.emit_interfaces_csv(result.track, out / "interfaces.csv"))
        if result.rates is not None:
            written.append(output.emit_svg(result.track, result.rates, anchors, out / "interfaces.svg"))
            written.append(plotting.plot_interfaces(result.track, result.rates.k0_theory, result.rates.k1_theory,
                                                    anchors, out / "interfaces.png"))
    if result.backward is not None and result.rates is not None:
        bt = result.backward
        written.append(plotting.plot_backward_width(bt, result.rates.k0_theory, result.rates.k1_theory,
                                                    out / "backward_width.png"))
    written.append(plotting.plot_profiles(result.trajectory, flux.alpha, flux.beta, out / "profiles.png"))
    written.append(output.write_report(result.report(), out / "report.json"))
    return written


@dataclass
class LemmaResult:
    config: LemmaConfig
    trajectory: Trajectory
    fronts: FrontTrack
    verdict: LemmaVerdict
    speeds: tuple[float, float]
    K: float
    tol: float
    slack: float
    wall_time: float = 0.0

    def report(self) -> dict:
        return {
            "lemma": config_to_dict(self.config),
            "K": self.K,
            "k0": self.K * float(np.sqrt(self.config.C)),
            "verdict": bool(self.verdict.passed),
            "margin": self.verdict.margin,
            "tol": self.tol,
            "slack": self.slack,
            "left_speed_fit": self.speeds[0],
            "right_speed_fit": self.speeds[1],
            "steps": self.trajectory.steps,
            "wall_time": self.wall_time,
        }


def run_lemma(cfg: LemmaConfig, slack: float = 0.1) -> LemmaResult:
    """Lemma pipeline with tolerance 2h + slack * K sqrt(C) * t."""
    started = time.perf_counter()
    traj = simulate_lemma(cfg)
    ft = front_track(traj, cfg.v_thresh)
    K = effective_K(cfg)
    tol = 2.0 * traj.grid.h
    verdict = lemma_verdict(ft, K, cfg.C, cfg.x2, cfg.x3, tol, slack)
    speeds = front_speed(ft, 5.0 * cfg.sample_interval)
    return LemmaResult(cfg, traj, ft, verdict, speeds, K, tol, slack, time.perf_counter() - started)


def write_lemma(result: LemmaResult, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    k = result.K * float(np.sqrt(cfg.C))
    return [
        output.emit_fronts_csv(result.fronts, out / "fronts.csv"),
        plotting.plot_fronts(result.fronts, k, cfg.x2, cfg.x3, out / "fronts.png"),
        output.write_report(result.report(), out / "report.json"),
    ]
