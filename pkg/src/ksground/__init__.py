"""Ground states of 2D Keller-Segel with nonlinear diffusion and logarithmic kernel."""

from .radial import RadialDensity, RadialGrid, integrate_radial, lp_norm, mass_function
from .steady import SteadyState, solve_steady

__all__ = [
    "RadialDensity",
    "RadialGrid",
    "SteadyState",
    "integrate_radial",
    "lp_norm",
    "mass_function",
    "solve_steady",
]
