"""Numerical laboratory for interfaces of 1D backward-forward diffusion-convection equations."""
from .model import (
    ConvectionSpec,
    FluxSpec,
    HypothesisError,
    ModelError,
    ModelValidationReport,
    builtin_convection,
    builtin_flux,
    rates,
    validate,
)
from .solver import (
    BlowUpError,
    BoundaryCondition,
    Grid1D,
    InitialDatum,
    SimState,
    Trajectory,
    gradient,
    initial_profile,
    rhs,
    simulate,
    stable_dt,
    step,
)

__all__ = [
    "BlowUpError",
    "BoundaryCondition",
    "ConvectionSpec",
    "FluxSpec",
    "Grid1D",
    "HypothesisError",
    "InitialDatum",
    "ModelError",
    "ModelValidationReport",
    "SimState",
    "Trajectory",
    "builtin_convection",
    "builtin_flux",
    "gradient",
    "initial_profile",
    "rates",
    "rhs",
    "simulate",
    "stable_dt",
    "step",
    "validate",
]
