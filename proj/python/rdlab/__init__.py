"""P1 reaction-diffusion solver with guaranteed a posteriori error majorants."""

from ._rdlab import (
    RangeError,
    builtin_problems,
    calibrate,
    critical_sigma,
    estimate,
    estimators,
    inverse_check,
    solve,
    sweep,
    unit_square_friedrichs,
)

__all__ = [
    "RangeError",
    "builtin_problems",
    "calibrate",
    "critical_sigma",
    "estimate",
    "estimators",
    "inverse_check",
    "solve",
    "sweep",
    "unit_square_friedrichs",
]
