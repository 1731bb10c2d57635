"""Stable optical rigidity from dissipative optomechanical coupling.

A detuned cavity whose loss rate depends on the position of a mirror
exerts a position-dependent light force on it.  This package evaluates
that rigidity and its stability, the quantum noise it brings, the force
sensitivity of the output light, and a Michelson-Sagnac interferometer
design realizing the coupling.  A time-domain integrator serves as an
independent check.
"""

from .errors import ConfigError, ConvergenceError, DomainError, NoSolutionError
from .params import (
    PhysicalParams,
    NormalizedParams,
    ResponseKernel,
    SteadyState,
    normalize,
    omega0_max,
    pump_from_fraction,
    pump_scale,
    resolve_params,
    response_kernel,
    steady_state,
)
from .rigidity import (
    MARGINAL,
    STABLE,
    UNSTABLE,
    characteristic_polynomial,
    effective_oscillator,
    is_stable,
    rigidity,
    rigidity_series,
    stability_map,
    susceptibility,
)
from .noise import SpectrumSeries, displacement_spectrum, force_transfer, n_eff, s_ffl
from .detection import output_transfer, sensitivity, sql_metrics
from .msi import MsiParams, design_gm, gm_scattering, radiation_force, solve_phi0

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConvergenceError", "DomainError", "NoSolutionError",
    "PhysicalParams", "NormalizedParams", "ResponseKernel", "SteadyState",
    "normalize", "omega0_max", "pump_from_fraction", "pump_scale", "resolve_params",
    "response_kernel", "steady_state",
    "STABLE", "UNSTABLE", "MARGINAL",
    "characteristic_polynomial", "effective_oscillator", "is_stable", "rigidity",
    "rigidity_series", "stability_map", "susceptibility",
    "SpectrumSeries", "displacement_spectrum", "force_transfer", "n_eff", "s_ffl",
    "output_transfer", "sensitivity", "sql_metrics",
    "MsiParams", "design_gm", "gm_scattering", "radiation_force", "solve_phi0",
    "__version__",
]
