"""Numerical blow-up laboratory for ``u_t = Δu + |u|^{p-1} u`` with radial data."""
from .grid import (
    Params,
    RadialField,
    RadialGrid,
    gaussian_weighted_integral,
    integrate_ball,
    integrate_volume,
    make_params,
    radial_gradient,
)
from .solver import SimConfig, SimTrace, estimate_blowup_time, homogeneous_exact, run_to_blowup, step

__all__ = [
    "Params",
    "RadialField",
    "RadialGrid",
    "SimConfig",
    "SimTrace",
    "estimate_blowup_time",
    "gaussian_weighted_integral",
    "homogeneous_exact",
    "integrate_ball",
    "integrate_volume",
    "make_params",
    "radial_gradient",
    "run_to_blowup",
    "step",
]

__version__ = "0.1.0"
