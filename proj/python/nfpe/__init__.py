"""Python bindings for the nonlinear Fokker-Planck solver."""

from ._core import (
    ConvergenceError,
    DomainError,
    Grid,
    Model,
    NfpeError,
    NumericError,
    UsageError,
    apply_A,
    dissipation,
    energy,
    eta,
    evolve,
    exp_formula,
    gaussian_density,
    gradient,
    hminus_norm,
    mass,
    preset,
    preset_ids,
    resolvent_step,
    run_config,
    simulate_particles,
    steady_state,
    uniform_density,
    validate,
)

__all__ = [
    "ConvergenceError",
    "DomainError",
    "Grid",
    "Model",
    "NfpeError",
    "NumericError",
    "UsageError",
    "apply_A",
    "dissipation",
    "energy",
    "eta",
    "evolve",
    "exp_formula",
    "gaussian_density",
    "gradient",
    "hminus_norm",
    "mass",
    "preset",
    "preset_ids",
    "resolvent_step",
    "run_config",
    "simulate_particles",
    "steady_state",
    "uniform_density",
    "validate",
]
