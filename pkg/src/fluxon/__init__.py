"""Semiclassical sine-Gordon fluxon condensates: exact solutions, small-time asymptotics and Whitham checks."""

from .errors import (
    ConditioningError,
    ConfigError,
    ContinuationError,
    DomainError,
    ExcludedCurveError,
    FluxonError,
    InvalidParameterError,
    NumericError,
    SeparatrixError,
)
from .profiles import ImpulseProfile, make_sech_profile, profile_constants, profile_from_scrG
from .spectra import (
    DeltaConfig,
    PoleKind,
    PoleRecord,
    ScatteringData,
    abel_inverse,
    bohr_sommerfeld,
    configure_delta,
    eigenvalue_count,
    transition_point,
    wkb_phase,
)
from .exact_ist import WaveSample, field_grid, residual_at, solve_exact, solve_with_fallback
from .modulation import ModulationState, continue_column, initial_state, newton_continue
from .asymptotics import differential_consistency, evaluate, theta_crosscheck
from .whitham import J_and_derivatives, characteristic_velocities, classify, hat_velocities

__all__ = [
    "ConditioningError", "ConfigError", "ContinuationError", "DomainError", "ExcludedCurveError",
    "FluxonError", "InvalidParameterError", "NumericError", "SeparatrixError",
    "ImpulseProfile", "make_sech_profile", "profile_constants", "profile_from_scrG",
    "DeltaConfig", "PoleKind", "PoleRecord", "ScatteringData", "abel_inverse", "bohr_sommerfeld",
    "configure_delta", "eigenvalue_count", "transition_point", "wkb_phase",
    "WaveSample", "field_grid", "residual_at", "solve_exact", "solve_with_fallback",
    "ModulationState", "continue_column", "initial_state", "newton_continue",
    "differential_consistency", "evaluate", "theta_crosscheck",
    "J_and_derivatives", "characteristic_velocities", "classify", "hat_velocities",
]
