"""Pinned harmonic chain driven by a constant force on particle 0."""
from .model import BoundaryPolicy, LatticeParams, LatticeState, acceleration, apply_V, dispersion
from .equilibrium import EquilibriumProfile, escape_constant, xi_coefficient, xi_oracle_tridiagonal, xi_profile
from .integrator import Trajectory, evolve_verlet, verlet_step
from .spectral import SpectralState, evolve, forward_transform, inverse_transform, solve
from .energy import (
    EnergyReport,
    escape_series,
    homogeneous_energy,
    particle_energy,
    total_energy,
    window_energy,
)
from .asymptotics import AsymptoticCoefficients, coefficients, predict, residual_scan

__version__ = "0.1.0"
