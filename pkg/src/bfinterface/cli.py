"""Command-line entry point.

Exit codes: 0 success, 1 model validation failure, 2 numerical blow-up,
3 configuration or I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, load_config, override
from .model import ModelError
from .output import fmt
from .regions import FitError
from .runner import ValidationFailed, check_model, run, run_lemma, theoretical_rates, write_lemma, write_run
from .solver import BlowUpError

EXIT_OK, EXIT_MODEL, EXIT_BLOWUP, EXIT_CONFIG = 0, 1, 2, 3

log = logging.getLogger("bfinterface")

def _prepare_out(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = _prepare_out(args.out or cfg.output)
    result = run(cfg)
    scheme = result.report()["scheme"]
    log.info("h=%g steps=%d dt in [%g, %g] stiff=%d wall=%.2fs", scheme["h"], scheme["steps"], scheme["dt_min"],
             scheme["dt_max"], result.trajectory.stiff_steps, result.wall_time)
    try:
        write_run(result, out)
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    r = result.rates
    if r is not None:
        print(
            f"{r.kind}: k0={fmt(r.k0_theory)} k1={fmt(r.k1_theory)} "
            f"left_speed={fmt(r.left_speed_fit)} right_speed={fmt(r.right_speed_fit)} "
            f"containment={'yes' if r.g_containment else 'no'} margin={fmt(r.g_margin)} tol={fmt(r.pos_tol)}"
        )
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_check_model(args) -> int:
    cfg = load_config(args.config)
    report = check_model(cfg)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK if report.ok else EXIT_MODEL


def _cmd_rates(args) -> int:
    cfg = load_config(args.config)
    k0, k1 = theoretical_rates(cfg)
    print(f"k0={fmt(k0)} k1={fmt(k1)}")
    return EXIT_OK


def _cmd_lemma(args) -> int:
    cfg = load_config(args.config)
    out = _prepare_out(args.out or cfg.output)
    result = run_lemma(cfg.lemma)
    log.info("steps=%d wall=%.2fs", result.trajectory.steps, result.wall_time)
    write_lemma(result, out)
    print(
        f"lemma: K={fmt(result.K)} C={fmt(cfg.lemma.C)} verdict={'pass' if result.verdict.passed else 'fail'} "
        f"margin={fmt(result.verdict.margin)} speeds={fmt(result.speeds[0])},{fmt(result.speeds[1])}"
    )
    return EXIT_OK


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _sweep_one(job) -> tuple[str, int, str]:
    cfg, out = job
    try:
        write_run(run(cfg), out)
    except ValidationFailed as exc:
        return str(out), EXIT_MODEL, str(exc)
    except BlowUpError as exc:
        return str(out), EXIT_BLOWUP, str(exc)
    except (ConfigError, FitError, OSError) as exc:
        return str(out), EXIT_CONFIG, str(exc)
    return str(out), EXIT_OK, ""


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    out = _prepare_out(args.out or cfg.output)
    values = [_parse_value(v) for v in args.values.split(",") if v != ""]
    if not values:
        raise ConfigError("--values is empty")
    jobs = []
    for v in values:
        sub = override(cfg, args.param, v)
        jobs.append((sub, out / f"{args.param}={v}"))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    worst = EXIT_OK
    for path, code, msg in results:
        print(f"{path}: {'ok' if code == EXIT_OK else msg}")
        worst = max(worst, code)
    return worst


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bfinterface", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="validate, integrate, track and fit; write CSV, SVG, PNG, report.json")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_simulate)

    s = sub.add_parser("check-model", help="check the structural hypotheses only")
    s.add_argument("--config", required=True)
    s.set_defaults(func=_cmd_check_model)

    s = sub.add_parser("rates", help="print the theoretical rates k0 and k1")
    s.add_argument("--config", required=True)
    s.set_defaults(func=_cmd_rates)

    s = sub.add_parser("lemma", help="simulate the degenerate comparison equation")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_lemma)

    s = sub.add_parser("sweep", help="independent runs over one parameter, one subdirectory each")
    s.add_argument("--config", required=True)
    s.add_argument("--param", required=True, help="dotted key, e.g. grid.n")
    s.add_argument("--values", required=True, help="comma-separated JSON values")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ValidationFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except BlowUpError as exc:
        print(f"error: numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (ConfigError, FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        # e.g. `rates` on a flux whose curvature signs are wrong
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
