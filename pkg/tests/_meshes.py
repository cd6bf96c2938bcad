"""Small meshes and states shared by the finite element tests."""

import numpy as np

from porofrac.fem import (
    BoundaryConditions,
    Discretization,
    Mesh,
    QuadratureBlock,
    assemble_mech_flux,
    boundary_residual,
    incremental_potential,
    lagged_inverse_permeability,
    structured_mesh,
)
from porofrac.material import MaterialParams


def distorted_patch(shift=(1.2, 0.85)):
    """2x2 patch on [0,2]^2 with a moved centre node."""
    nodes = np.array([[0, 0], [1, 0], [2, 0], [0, 1], [1, 1], [2, 1],
                      [0, 2], [1, 2], [2, 2]], dtype=float)
    nodes[4] = shift
    elems = np.array([[0, 1, 4, 3], [1, 2, 5, 4], [3, 4, 7, 6], [4, 5, 8, 7]])
    return Mesh.from_arrays(nodes, elems)


def random_quad_mesh(rng, n=4, jitter=0.25):
    xs = np.linspace(0.0, 3.0, n + 1)
    mesh = structured_mesh(xs, xs)
    nodes = mesh.nodes.copy()
    inner = ~np.isin(np.arange(len(nodes)), np.concatenate(
        [mesh.node_tags[s] for s in ("left", "right", "bottom", "top")]))
    nodes[inner] += rng.uniform(-jitter, jitter, size=(inner.sum(), 2)) * (xs[1] - xs[0])
    return Mesh.from_arrays(nodes, mesh.elements)


def patch_bcs(disc, E):
    mesh = disc.mesh
    u_ex = (mesh.nodes @ E.T).ravel()
    bcs = BoundaryConditions.free(disc.dofs)
    boundary = np.unique(mesh.edges[mesh.boundary_edges])
    for c in (0, 1):
        dofs = disc.dofs.u_dofs(boundary, c)
        bcs.fix(dofs)
        bcs.values[dofs] = u_ex[dofs]
    return bcs, u_ex


def two_by_two(rng=None):
    nodes = np.array([[0, 0], [1, 0], [2, 0], [0, 1], [1.15, 0.9], [2, 1],
                      [0, 2], [1, 2], [2, 2]], dtype=float)
    elems = np.array([[0, 1, 4, 3], [1, 2, 5, 4], [3, 4, 7, 6], [4, 5, 8, 7]])
    return Mesh.from_arrays(nodes, elems)


def random_state(disc, rng, scale=1e-4):
    """Non-trivial accepted state: prior plasticity, fluid content and damage."""
    ne = disc.mesh.n_elements
    qp = QuadratureBlock.zeros(ne)
    qp.m_n = rng.normal(scale=0.1, size=(ne, 4))
    qp.eps_p_n = rng.normal(scale=0.1 * scale, size=(ne, 4, 6)) * [1, 1, 0, 1, 0, 0]
    qp.m_p_n = rng.normal(scale=0.01, size=(ne, 4))
    qp.alpha_n = rng.uniform(0.0, 1e-4, size=(ne, 4))
    qp.eps = rng.normal(scale=scale, size=(ne, 4, 6)) * [1, 1, 0, 1, 0, 0]
    d = rng.uniform(0.0, 0.9, disc.dofs.n_d)
    return qp, d


def full_gradient(disc, r_el, bcs, tau):
    """Scatter uncondensed element residuals into ``[u, h, a]`` order."""
    n = disc.dofs.n_mech
    g = np.bincount(disc.element_dofs.ravel(), weights=r_el[:, :12].ravel(), minlength=n)
    g += boundary_residual(disc, bcs, tau)
    return np.concatenate([g, r_el[:, 12:].ravel()])


def gradient_check(seed, directions=20, tau=0.5):
    """Relative errors between the residual and central differences of the potential.

    Uses a distorted 2x2 mesh with prior plastic state, damage, prescribed
    potential and traction on parts of the boundary and random EAS parameters.
    """
    p = MaterialParams.hydraulic()
    rng = np.random.default_rng(seed)
    disc = Discretization.build(two_by_two())
    dm = disc.dofs
    qp, d = random_state(disc, rng)
    kinv = lagged_inverse_permeability(disc, qp, d, p)
    bcs = BoundaryConditions.free(dm)
    bcs.mu_bar.append((disc.mesh.edge_tags["boundary"][:3], 2e-4))
    bcs.traction.append((disc.mesh.edge_tags["boundary"][3:5], np.array([0.01, -0.02])))
    u = rng.normal(scale=1e-4, size=dm.n_u)
    h = rng.normal(scale=1e-3, size=dm.n_h)
    a = rng.normal(scale=1e-5, size=(disc.mesh.n_elements, 4))
    r_el, _ = assemble_mech_flux(disc, u, h, a, qp, d, kinv, bcs, tau, p,
                                 plastic=False, condense=False)
    grad = full_gradient(disc, r_el, bcs, tau)
    x0 = np.concatenate([u, h, a.ravel()])

    def potential(x):
        return incremental_potential(disc, x[:dm.n_u], x[dm.n_u:dm.n_mech],
                                     x[dm.n_mech:].reshape(a.shape), qp, d, kinv, bcs, tau, p)

    scale = np.concatenate([np.full(dm.n_u, 1e-4), np.full(dm.n_h, 1e-3),
                            np.full(a.size, 1e-5)])
    errors = []
    for _ in range(directions):
        v = rng.normal(size=x0.size) * scale
        eps = 1e-4
        fd = (potential(x0 + eps * v) - potential(x0 - eps * v)) / (2 * eps)
        exact = grad @ v
        errors.append(abs(fd - exact) / abs(exact))
    return np.array(errors)
