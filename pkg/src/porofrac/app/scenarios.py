"""Built-in scenario generators.

Every generator is a pure function of its :class:`ScenarioConfig`; the
returned :class:`Scenario` bundles the mesh, the discretization, material
constants and a boundary-condition factory for each step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..fem import (
    BoundaryConditions,
    Discretization,
    FieldState,
    NewtonOptions,
    graded_coordinates,
    structured_mesh,
)
from ..material import MaterialParams
from .config import ScenarioConfig

_TOL = 1e-9


@dataclass
class Scenario:
    """A ready-to-run problem.

    ``bcs(step)`` returns the boundary data of step ``step`` (1-based).
    ``loaded_dofs`` are the displacement dofs whose reactions sum to the
    footing force; ``probe_element`` is where the injection pressure is read.
    """

    config: ScenarioConfig
    mesh: object
    disc: Discretization
    params: MaterialParams
    base_bcs: BoundaryConditions
    options: NewtonOptions
    loaded_dofs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    seeded_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    probe_element: int = -1
    line_y: float | None = None

    @property
    def dofs(self):
        return self.disc.dofs

    @property
    def tau(self) -> float:
        return self.config.tau

    @property
    def steps(self) -> int:
        return self.config.steps

    def schedule(self) -> np.ndarray:
        """End times of all steps."""
        return self.tau * np.arange(1, self.steps + 1)

    def prescribed_displacement(self, step: int) -> float:
        if self.config.scenario != "footing":
            return 0.0
        return step * self.config.displacement_increment

    def injected_mass(self, step: int) -> float:
        """Mass injected into the full (symmetric) domain after ``step`` steps, kg/m."""
        if self.config.scenario != "injection":
            return 0.0
        return step * self.tau * self.config.injection_rate

    def bcs(self, step: int) -> BoundaryConditions:
        if step < 1:
            raise ValueError("steps are numbered from 1")
        bcs = self.base_bcs.copy()
        if self.config.scenario == "footing":
            bcs.values[self.loaded_dofs] = -self.prescribed_displacement(step)
        return bcs

    def initial_state(self) -> FieldState:
        state = FieldState.initial(self.disc)
        state.d[self.seeded_nodes] = 1.0
        return state


def _options(cfg: ScenarioConfig) -> NewtonOptions:
    return NewtonOptions(fracture=cfg.fracture, threads=cfg.threads)


def build_footing_scenario(cfg: ScenarioConfig) -> Scenario:
    """Rigid smooth footing on a poro-plastic layer, right half of the domain.

    The footing occupies ``[0, a/2]`` of the top edge and moves down by
    ``displacement_increment`` per step.  Bottom is clamped, the symmetry
    line and the right edge are horizontally fixed, and those three edges
    are impermeable.  The top edge drains at zero potential unless
    ``boundary = impermeable``.
    """
    if cfg.scenario != "footing":
        raise ConfigError("build_footing_scenario needs scenario = footing")
    half_w, half_a = cfg.width / 2.0, cfg.a / 2.0
    n_foot = int(round(cfg.nx * half_a / half_w))
    if not 1 <= n_foot < cfg.nx:
        raise ConfigError("mesh too coarse to resolve the footing")
    xs = np.concatenate([np.linspace(0.0, half_a, n_foot + 1),
                         np.linspace(half_a, half_w, cfg.nx - n_foot + 1)[1:]])
    ys = np.linspace(0.0, cfg.height, cfg.ny + 1)
    mesh = structured_mesh(xs, ys)
    X = mesh.nodes
    mesh.tag_nodes("footing", (np.abs(X[:, 1] - cfg.height) < _TOL)
                   & (X[:, 0] <= half_a + _TOL))

    disc = Discretization.build(mesh)
    dm = disc.dofs
    bcs = BoundaryConditions.free(dm)
    bcs.fix(dm.u_dofs(mesh.node_tags["bottom"], 0))
    bcs.fix(dm.u_dofs(mesh.node_tags["bottom"], 1))
    bcs.fix(dm.u_dofs(mesh.node_tags["left"], 0))
    bcs.fix(dm.u_dofs(mesh.node_tags["right"], 0))
    for side in ("bottom", "left", "right"):
        bcs.fix(dm.h_dofs(mesh.edge_tags[side]))
    if cfg.boundary == "impermeable":
        bcs.fix(dm.h_dofs(mesh.edge_tags["top"]))
    loaded = dm.u_dofs(mesh.node_tags["footing"], 1)
    bcs.fix(loaded)
    return Scenario(cfg, mesh, disc, cfg.material_params(), bcs, _options(cfg),
                    loaded_dofs=loaded)


def _graded(breaks, lo, hi, fine, coarse):
    breaks = sorted(set(breaks))
    sizes = [fine if lo - _TOL <= a and b <= hi + _TOL else coarse
             for a, b in zip(breaks[:-1], breaks[1:])]
    return graded_coordinates(breaks, sizes)


def injection_coordinates(cfg: ScenarioConfig):
    """Graded node coordinates of the injection half domain.

    Cells inside the refinement box have size at most ``h_fine``; the notch
    tip and the notch line are always nodes.
    """
    x0, x1, y0, y1 = cfg.box
    half = cfg.length / 2.0
    xs = _graded([0.0, x0, cfg.a / 2.0, x1, half], x0, x1, cfg.h_fine, cfg.h_coarse)
    ys = _graded([0.0, y0, half, y1, cfg.length], y0, y1, cfg.h_fine, cfg.h_coarse)
    return xs, ys


def build_injection_scenario(cfg: ScenarioConfig) -> Scenario:
    """Fluid injection into a notch, symmetric half ``[0, L/2] x [0, L]``.

    The notch ``x <= a/2`` on ``y = L/2`` is a seeded crack (``d = 1`` on
    its nodes).  Its edges are split in the flux space, so each side carries
    its own flux and fluid enters through both crack faces.  Half of the
    injection rate enters the half domain, spread over the notch edges by
    length (``uniform``) or through the two edges at the mouth (``point``).
    The symmetry line is horizontally fixed and impermeable; the other
    outer edges are clamped and drained at zero potential unless
    ``boundary = impermeable``.
    """
    if cfg.scenario != "injection":
        raise ConfigError("build_injection_scenario needs scenario = injection")
    xs, ys = injection_coordinates(cfg)
    yc, tip = cfg.length / 2.0, cfg.a / 2.0

    def on_notch(A, B):
        return (abs(A[1] - yc) < _TOL and abs(B[1] - yc) < _TOL
                and max(A[0], B[0]) <= tip + _TOL)

    mesh = structured_mesh(xs, ys, cut=on_notch)
    X = mesh.nodes
    notch = np.flatnonzero((np.abs(X[:, 1] - yc) < _TOL) & (X[:, 0] <= tip + _TOL))
    disc = Discretization.build(mesh)
    dm = disc.dofs

    bcs = BoundaryConditions.free(dm)
    for side in ("right", "top", "bottom"):
        bcs.fix(dm.u_dofs(mesh.node_tags[side], 0))
        bcs.fix(dm.u_dofs(mesh.node_tags[side], 1))
        if cfg.boundary == "impermeable":
            bcs.fix(dm.h_dofs(mesh.edge_tags[side]))
    bcs.fix(dm.u_dofs(mesh.node_tags["left"], 0))
    bcs.fix(dm.h_dofs(mesh.edge_tags["left"]))

    cut = mesh.edge_tags["cut"]
    weight = mesh.edge_length(cut)
    if cfg.injection_distribution == "point":
        mid = mesh.edge_midpoints(cut)[:, 0]
        weight = np.where(mid <= mid.min() + _TOL, weight, 0.0)
    # Outward edge-integrated flux (kg/(m s)); negative means inflow.
    bcs.fix(dm.h_dofs(cut), 0.0)
    bcs.values[dm.h_dofs(cut)] = -0.5 * cfg.injection_rate * weight / weight.sum()
    bcs.fix_phase(notch, 1.0)

    centers = mesh.element_centers()
    probe = int(np.argmin(np.hypot(*(centers - np.asarray(cfg.probe)).T)))
    return Scenario(cfg, mesh, disc, cfg.material_params(), bcs, _options(cfg),
                    seeded_nodes=notch, probe_element=probe, line_y=yc)


def build_custom_scenario(cfg: ScenarioConfig) -> Scenario:
    """Rectangular column fed through its top edge with a uniform flux.

    Bottom is clamped, the sides slide vertically, and all edges but the top
    are impermeable.  ``flux`` (kg/(m^2 s)) is positive into the body.
    """
    if cfg.scenario != "custom":
        raise ConfigError("build_custom_scenario needs scenario = custom")
    mesh = structured_mesh(np.linspace(0.0, cfg.width, cfg.nx + 1),
                           np.linspace(0.0, cfg.height, cfg.ny + 1))
    disc = Discretization.build(mesh)
    dm = disc.dofs
    bcs = BoundaryConditions.free(dm)
    bcs.fix(dm.u_dofs(mesh.node_tags["bottom"], 0))
    bcs.fix(dm.u_dofs(mesh.node_tags["bottom"], 1))
    for side in ("left", "right"):
        bcs.fix(dm.u_dofs(mesh.node_tags[side], 0))
    for side in ("bottom", "left", "right"):
        bcs.fix(dm.h_dofs(mesh.edge_tags[side]))
    top = mesh.edge_tags["top"]
    bcs.fix(dm.h_dofs(top), 0.0)
    bcs.values[dm.h_dofs(top)] = -cfg.flux * mesh.edge_length(top)
    return Scenario(cfg, mesh, disc, cfg.material_params(), bcs, _options(cfg))


BUILDERS = {
    "footing": build_footing_scenario,
    "injection": build_injection_scenario,
    "custom": build_custom_scenario,
}


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    return BUILDERS[cfg.scenario](cfg)
