"""Mixed finite elements and the staggered time-step solver."""

from .assembly import (
                       Discretization,
                       MechFluxSystem,
                       QuadratureBlock,
                       assemble_mech_flux,
                       assemble_phase,
                       boundary_residual,
                       element_unknowns,
                       incremental_potential,
                       lagged_inverse_permeability,
                       mass_update,
)
from .dofs import BoundaryConditions, DofMap
from .elements import ElementGeometry, eas_strain, rt0_basis
from .mesh import Mesh, graded_coordinates, structured_mesh
from .solver import (
                       DirectSolver,
                       FieldState,
                       NewtonOptions,
                       StepReport,
                       solve_phase_field,
                       solve_step,
)

__all__ = [
    "BoundaryConditions", "DirectSolver", "Discretization", "DofMap",
    "ElementGeometry", "FieldState", "MechFluxSystem", "Mesh", "NewtonOptions",
    "QuadratureBlock", "StepReport", "assemble_mech_flux", "assemble_phase",
    "boundary_residual", "element_unknowns",
    "eas_strain", "graded_coordinates", "incremental_potential",
    "lagged_inverse_permeability", "mass_update", "rt0_basis",
    "solve_phase_field", "solve_step", "structured_mesh",
]
