"""Differential-phase-shift QKD simulator (pybind11 bindings)."""

from ._core import (
    BirefringenceMode,
    CascadeConfig,
    ConfigError,
    EveKind,
    PulseTrain,
    QuantizedPhase,
    SessionConfig,
    alice_encode,
    attack_check_error_rate,
    bob_measure,
    bob_prepare,
    competitor_efficiency,
    faraday_reflect,
    inner_energy_fraction,
    interference_coefficients,
    run_config,
    run_experiment_rows,
    run_session,
    theoretical_efficiency,
)

__all__ = [
    "BirefringenceMode",
    "CascadeConfig",
    "ConfigError",
    "EveKind",
    "PulseTrain",
    "QuantizedPhase",
    "SessionConfig",
    "alice_encode",
    "attack_check_error_rate",
    "bob_measure",
    "bob_prepare",
    "competitor_efficiency",
    "faraday_reflect",
    "inner_energy_fraction",
    "interference_coefficients",
    "run_config",
    "run_experiment_rows",
    "run_session",
    "theoretical_efficiency",
]
