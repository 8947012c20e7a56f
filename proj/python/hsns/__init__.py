"""Half-space Navier-Stokes laboratory."""

import json

from . import _core
from ._core import (
    CheckpointError,
    ConfigError,
    DomainError,
    Error,
    NumericalError,
    SolverConfig,
    apply_semigroup,
    config_keys,
    contour_residual,
    datum_names,
    erfcx,
    green_function,
    load_checkpoint,
    residual_kernel,
    residual_kernel_quadrature,
    run_euler,
    run_navier_stokes,
    sample_datum,
    save_checkpoint,
)

__all__ = [
    "CheckpointError",
    "ConfigError",
    "DomainError",
    "Error",
    "NumericalError",
    "SolverConfig",
    "apply_semigroup",
    "config_keys",
    "contour_residual",
    "cross_validate_green",
    "datum_names",
    "erfcx",
    "green_function",
    "lemma_report",
    "load_checkpoint",
    "residual_kernel",
    "residual_kernel_quadrature",
    "run_euler",
    "run_experiment",
    "run_navier_stokes",
    "sample_datum",
    "save_checkpoint",
]


def cross_validate_green(n_samples=100, seed=1):
    """Closed form, quadrature and contour values of the residual kernel at random points."""
    return json.loads(_core.cross_validate_green_json(n_samples, seed))


def lemma_report(rho=0.5, sigma=0.5):
    """Norm inequality ratios over the closed-form corpus."""
    return json.loads(_core.lemma_report_json(rho, sigma))


def run_experiment(config_text="", overrides=()):
    """Run a configured command; returns the JSON summary written to the output directory."""
    return json.loads(_core.run_experiment_json(config_text, list(overrides)))
