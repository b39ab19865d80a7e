"""Tolerance constants shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    smooth_rtol: float = 1e-8  # closed-form checks on smooth integrands
    solver_rtol: float = 1e-4  # checks on solver output
    mass_rtol: float = 1e-6  # steady state mass vs requested mass
    zero_rel: float = 1e-12  # |theta| below zero_rel * theta_c counts as zero
    root_rel: float = 1e-6  # free boundary located to root_rel * dr
    monotone_abs: float = 1e-12  # slack in monotonicity checks
    riesz_rtol: float = 1e-6
    radial_equality_rtol: float = 1e-3  # 2D direct sum vs radial route
    hls_rtol: float = 1e-2
    ordering_rtol: float = 1e-4  # comparison monitor band, relative to mass


DEFAULT = Tolerances()
