"""Run configuration: strict JSON documents mapped onto dataclasses."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Any

from .lemma import LemmaConfig
from .model import ConvectionSpec, FluxSpec, ModelError, builtin_convection, builtin_flux
from .solver import BoundaryCondition, Grid1D, InitialDatum


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ComponentSection:
    name: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ModelSection:
    flux: ComponentSection = ComponentSection("perona_malik")
    convection: ComponentSection = ComponentSection("separable_linear", {"A": -1.0, "B": -1.0})
    # false lets regression runs (e.g. a linear flux) proceed past validation
    strict: bool = True


@dataclass(frozen=True)
class GridSection:
    a: float = -4.0
    b: float = 4.0
    n: int = 2001


@dataclass(frozen=True)
class BCSection:
    kind: str = "neumann_slope"
    left: float | None = None
    right: float | None = None


@dataclass(frozen=True)
class TimeSection:
    t_end: float = 0.5
    sample_interval: float = 0.01
    safety: float = 0.9
    dt_floor: float | None = None


@dataclass(frozen=True)
class RegionsSection:
    delta: float | None = None
    pos_tol: float | None = None
    fit_window: tuple[float, float] | None = None


@dataclass(frozen=True)
class SimConfig:
    model: ModelSection = ModelSection()
    grid: GridSection = GridSection()
    initial: InitialDatum = InitialDatum()
    bc: BCSection = BCSection()
    time: TimeSection = TimeSection()
    regions: RegionsSection = RegionsSection()
    experiment: str = "theorem"
    lemma: LemmaConfig = LemmaConfig()
    seed: int = 0
    output: str = "out"

    # derived quantities with documented defaults

    @property
    def h(self) -> float:
        return (self.grid.b - self.grid.a) / (self.grid.n - 1)

    def pos_tol(self) -> float:
        if self.regions.pos_tol is not None:
            return self.regions.pos_tol
        return (4.0 if self.experiment == "time_reversed" else 2.0) * self.h

    def fit_window(self) -> tuple[float, float]:
        if self.regions.fit_window is not None:
            return tuple(self.regions.fit_window)
        return (5.0 * self.time.sample_interval, self.time.t_end)

    def delta(self, flux: FluxSpec) -> float:
        if self.regions.delta is not None:
            return self.regions.delta
        return 1e-6 * (flux.beta - flux.alpha)

    def dt_floor(self) -> float:
        return self.time.dt_floor if self.time.dt_floor is not None else 1e-10 * self.time.t_end


def _coerce(value, annotation: str, path: str):
    ann = annotation.replace(" ", "")
    if value is None:
        if "None" in ann:
            return None
        raise ConfigError(f"{path}: null not allowed")
    if ann.startswith("tuple[tuple"):
        try:
            return tuple(tuple(float(v) for v in row) for row in value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: expected a list of number pairs") from exc
    if ann.startswith("tuple[float,float]"):
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError(f"{path}: expected a pair of numbers")
        return (float(value[0]), float(value[1]))
    if ann.startswith("float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if ann.startswith("int"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if ann.startswith("bool"):
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if ann.startswith("dict"):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object")
        return dict(value)
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    return value


def _build(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'document'}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"{path or 'document'}: unknown key(s) {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        f = fields[name]
        sub = f"{path}.{name}" if path else name
        ftype = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
        nested = _NESTED.get(ftype)
        if nested is not None:
            kwargs[name] = _build(nested, value, sub)
        else:
            kwargs[name] = _coerce(value, ftype, sub)
    if cls is ComponentSection and "name" not in kwargs:
        raise ConfigError(f"{path}: missing 'name'")
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path or 'document'}: {exc}") from exc


_NESTED = {
    "ComponentSection": ComponentSection,
    "ModelSection": ModelSection,
    "GridSection": GridSection,
    "BCSection": BCSection,
    "TimeSection": TimeSection,
    "RegionsSection": RegionsSection,
    "InitialDatum": InitialDatum,
    "LemmaConfig": LemmaConfig,
}


def build_model(cfg: SimConfig) -> tuple[FluxSpec, ConvectionSpec]:
    try:
        flux = builtin_flux(cfg.model.flux.name, cfg.model.flux.params)
        conv = builtin_convection(cfg.model.convection.name, cfg.model.convection.params, flux)
    except ModelError as exc:
        raise ConfigError(f"model: {exc}") from exc
    return flux, conv


def grid_of(cfg: SimConfig) -> Grid1D:
    return Grid1D(cfg.grid.a, cfg.grid.b, cfg.grid.n)


def boundary_of(cfg: SimConfig) -> BoundaryCondition:
    bc = cfg.bc
    if bc.kind == "neumann_slope":
        left = bc.left if bc.left is not None else cfg.initial.slope_left
        right = bc.right if bc.right is not None else cfg.initial.slope_right
    else:
        left = bc.left if bc.left is not None else 0.0
        right = bc.right if bc.right is not None else 0.0
    return BoundaryCondition(bc.kind, left, right)


def check_config(cfg: SimConfig) -> None:
    g, ini = cfg.grid, cfg.initial
    if g.n < 16:
        raise ConfigError("grid.n: need n >= 16")
    if not g.b > g.a:
        raise ConfigError("grid: need a < b")
    if ini.kind == "piecewise_slope" and not (g.a <= ini.a1 <= ini.b1 <= g.b):
        raise ConfigError(
            f"initial.a1/b1: violates a ≤ a₁ ≤ b₁ ≤ b (a={g.a}, a1={ini.a1}, b1={ini.b1}, b={g.b})"
        )
    if ini.smoothing is not None and ini.smoothing <= 0:
        raise ConfigError("initial.smoothing: must be positive")
    if cfg.time.t_end < 0:
        raise ConfigError("time.t_end: must be >= 0")
    if cfg.time.sample_interval <= 0:
        raise ConfigError("time.sample_interval: must be positive")
    if not 0 < cfg.time.safety <= 1:
        raise ConfigError("time.safety: must lie in (0, 1]")
    if cfg.bc.kind not in ("dirichlet", "neumann_slope"):
        raise ConfigError(f"bc.kind: unknown boundary condition {cfg.bc.kind!r}")
    if cfg.experiment not in ("theorem", "time_reversed"):
        raise ConfigError(f"experiment: must be 'theorem' or 'time_reversed', got {cfg.experiment!r}")
    if cfg.regions.delta is not None and cfg.regions.delta < 0:
        raise ConfigError("regions.delta: must be >= 0")
    flux, _ = build_model(cfg)
    try:
        ini.check(flux, reversed_=cfg.experiment == "time_reversed")
    except ValueError as exc:
        hint = "" if cfg.experiment == "time_reversed" else (
            " (initial slopes must satisfy slope_left < α < slope_mid < β < slope_right, strictly)"
        )
        raise ConfigError(f"initial: {exc}{hint}") from exc
    try:
        cfg.lemma.check()
    except ValueError as exc:
        raise ConfigError(f"lemma: {exc}") from exc


def config_from_dict(data: dict) -> SimConfig:
    cfg = _build(SimConfig, data, "")
    check_config(cfg)
    return cfg


def parse_config(text: str) -> SimConfig:
    """Parse and validate a JSON run definition; unknown keys are errors."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(data)


def load_config(path) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def config_to_dict(cfg: SimConfig) -> dict[str, Any]:
    def conv(obj):
        if dataclasses.is_dataclass(obj):
            return {f.name: conv(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if isinstance(obj, tuple):
            return [conv(o) for o in obj]
        if isinstance(obj, dict):
            return {k: conv(v) for k, v in obj.items()}
        return obj

    return conv(cfg)


def override(cfg: SimConfig, dotted: str, value) -> SimConfig:
    """Return a re-validated copy of cfg with one dotted key replaced."""
    data = config_to_dict(cfg)
    node = data
    keys = dotted.split(".")
    for k in keys[:-1]:
        if not isinstance(node, dict) or k not in node:
            raise ConfigError(f"unknown parameter {dotted!r}")
        node = node[k]
        if node is None:
            raise ConfigError(f"unknown parameter {dotted!r}")
    if not isinstance(node, dict) or (keys[-1] not in node and not dotted.startswith(("model.flux.params", "model.convection.params", "lemma.flux_params"))):
        raise ConfigError(f"unknown parameter {dotted!r}")
    node[keys[-1]] = value
    return config_from_dict(data)
