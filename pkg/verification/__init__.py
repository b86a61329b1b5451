# Oracles and geometric diagnostics
from .checks import (
    DEFAULT_EPS,
    SymplecticReport,
    ThresholdViolation,
    assert_below,
    energy_drift,
    fd_jacobian,
    gradient_check,
    residual,
    symplectic_residual,
)
from .reports import write_frame, write_json, write_symplectic_report

__all__ = [
    "DEFAULT_EPS",
    "SymplecticReport",
    "ThresholdViolation",
    "assert_below",
    "energy_drift",
    "fd_jacobian",
    "gradient_check",
    "residual",
    "symplectic_residual",
    "write_frame",
    "write_json",
    "write_symplectic_report",
]
