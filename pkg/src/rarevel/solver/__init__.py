"""Steady discrete-velocity BGK solver on structured 2D meshes."""
from .bc import BoundarySet, DiffuseWall, Inflow, Outflow, SymmetryPlane, fill_ghosts, wall_mass_flux
from .jgs import ImplicitData, jgs_solve
from .steady import (SolverConfig, SteadySolveReport, SteadySolver, WallFlux, interpolate_macro,
                     run_to_steady)
from .transport import cfl_time_step, minmod3, transport_divergence

__all__ = [
    "BoundarySet", "DiffuseWall", "Inflow", "Outflow", "SymmetryPlane", "fill_ghosts",
    "wall_mass_flux", "ImplicitData", "jgs_solve", "SolverConfig", "SteadySolveReport",
    "SteadySolver", "WallFlux", "interpolate_macro", "run_to_steady", "cfl_time_step",
    "minmod3", "transport_divergence",
]
