"""kinhydro: deterministic kinetic simulation of the Boltzmann equation and
its incompressible Navier-Stokes-Fourier limit on the torus."""

__version__ = "0.1.0"

from .backend import BACKEND_NAME
from .grids import (AngleQuadrature, NormSpec, SpatialGrid, VelocityGrid,
                    build_angle_quadrature, build_spatial_grid,
                    build_velocity_grid, collision_frequency, maxwellian,
                    nu_bounds, weighted_norm)
from .collision import (CollisionModel, DistributionField, RegimeConstants,
                        SplittingParams, coercivity_check,
                        collision_invariants, entropy, regime_constants,
                        theta_delta)
from .micromacro import (MacroFields, infinitesimal_maxwellian, leray_project,
                         moments, project_pi, split_initial)

__all__ = [
    "AngleQuadrature", "BACKEND_NAME", "CollisionModel", "DistributionField",
    "MacroFields", "NormSpec", "RegimeConstants", "SpatialGrid",
    "SplittingParams", "VelocityGrid", "build_angle_quadrature",
    "build_spatial_grid", "build_velocity_grid", "coercivity_check",
    "collision_frequency", "collision_invariants", "entropy",
    "infinitesimal_maxwellian", "leray_project", "maxwellian", "moments",
    "nu_bounds", "project_pi", "regime_constants", "split_initial",
    "theta_delta", "weighted_norm",
]
