"""Degree-of-freedom layout and boundary data."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError


@dataclass(frozen=True)
class DofMap:
    """Dof counts for displacement (2 per node), flux (1 per edge) and phase field.

    The coupled mechanics/flux system orders displacements first
    (interleaved ``ux, uy`` per node) followed by the edge fluxes.
    """

    n_nodes: int
    n_edges: int

    @classmethod
    def for_mesh(cls, mesh) -> "DofMap":
        return cls(mesh.n_nodes, mesh.n_edges)

    @property
    def n_u(self) -> int:
        return 2 * self.n_nodes

    @property
    def n_h(self) -> int:
        return self.n_edges

    @property
    def n_mech(self) -> int:
        return self.n_u + self.n_h

    @property
    def n_d(self) -> int:
        return self.n_nodes

    def u_dofs(self, nodes, component) -> np.ndarray:
        return 2 * np.asarray(nodes, dtype=int) + component

    def h_dofs(self, edges) -> np.ndarray:
        return self.n_u + np.asarray(edges, dtype=int)

    def element_mech_dofs(self, mesh) -> np.ndarray:
        """``(Ne, 12)`` global dofs: 8 displacement then 4 flux dofs."""
        conn = mesh.elements
        u = np.stack([2 * conn, 2 * conn + 1], axis=-1).reshape(len(conn), 8)
        return np.concatenate([u, self.n_u + mesh.element_edges], axis=1)


@dataclass
class BoundaryConditions:
    """Boundary data for one step.

    ``fixed``/``values`` cover the mechanics-flux system (prescribed
    displacements and prescribed normal fluxes, the latter as edge-integrated
    outward flux in kg/(m s)).  ``traction`` holds ``(edge_ids, vector)``
    pairs of constant tractions (MN/m^2) and ``mu_bar`` holds
    ``(edge_ids, value)`` pairs of prescribed fluid potential; edges with
    neither a prescribed flux nor a potential are permeable at zero
    potential.  ``d_fixed``/``d_values`` constrain the
    phase field.
    """

    fixed: np.ndarray
    values: np.ndarray
    d_fixed: np.ndarray
    d_values: np.ndarray
    traction: list = field(default_factory=list)
    mu_bar: list = field(default_factory=list)

    @classmethod
    def free(cls, dofs: DofMap) -> "BoundaryConditions":
        return cls(np.zeros(dofs.n_mech, dtype=bool), np.zeros(dofs.n_mech),
                   np.zeros(dofs.n_d, dtype=bool), np.zeros(dofs.n_d))

    def fix(self, dof_ids, value=0.0) -> None:
        dof_ids = np.asarray(dof_ids, dtype=int)
        self.fixed[dof_ids] = True
        self.values[dof_ids] = value

    def fix_phase(self, node_ids, value) -> None:
        if not 0.0 <= value <= 1.0:
            raise ConfigError("phase-field values must lie in [0, 1]")
        node_ids = np.asarray(node_ids, dtype=int)
        self.d_fixed[node_ids] = True
        self.d_values[node_ids] = value

    def copy(self) -> "BoundaryConditions":
        return BoundaryConditions(self.fixed.copy(), self.values.copy(),
                                  self.d_fixed.copy(), self.d_values.copy(),
                                  list(self.traction), list(self.mu_bar))
