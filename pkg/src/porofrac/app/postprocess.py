"""Derived fields and scalar measures of a solved state."""

from __future__ import annotations

import numpy as np

from .. import material as mat


def gauss_opening(disc, state):
    """Crack opening ``w`` (m) at every Gauss point of ``state``."""
    _, grad = disc.interpolate_nodal(state.d)
    grad3 = np.concatenate([grad, np.zeros(grad.shape[:-1] + (1,))], axis=-1)
    L = np.broadcast_to(disc.mesh.h_e[:, None], grad.shape[:-1])
    return mat.fracture_opening(state.qp.eps, grad3, L)


def gauss_pressure(state, p):
    """Pore pressure (MN/m^2) at every Gauss point."""
    qp = state.qp
    return mat.fluid_pressure(qp.eps - qp.eps_p, qp.m - qp.m_p, p)


def cell_fields(disc, state, p) -> dict:
    """Element means of the internal variables written to VTK files."""
    qp = state.qp
    _, _, hq = disc.gauss_fields(state.u, state.h, qp.eas)
    return {
        "m": qp.m.mean(axis=1),
        "m_e": qp.m_e.mean(axis=1),
        "m_p": qp.m_p.mean(axis=1),
        "alpha": qp.alpha.mean(axis=1),
        "p": gauss_pressure(state, p).mean(axis=1),
        "flux_magnitude": np.linalg.norm(hq, axis=-1).mean(axis=1),
        "w": gauss_opening(disc, state).mean(axis=1),
        "w_plast": qp.w_plast.mean(axis=1),
        "history_H": qp.history_H.mean(axis=1),
    }


def point_fields(disc, state) -> dict:
    return {"u": state.u.reshape(-1, 2), "d": state.d}


def line_nodes(mesh, y):
    """Nodes on the horizontal line ``y`` sorted by ``x``."""
    X = mesh.nodes
    tol = 1e-9 * max(1.0, np.ptp(X[:, 1]))
    row = np.flatnonzero(np.abs(X[:, 1] - y) < tol)
    return row[np.argsort(X[row, 0])]


def crack_extent(mesh, d, y, threshold=0.9) -> float:
    """Length of ``{d > threshold}`` along the line ``y``.

    ``d`` is linear along element edges, so each edge contributes the exact
    length of its super-threshold part.
    """
    row = line_nodes(mesh, y)
    if len(row) < 2:
        raise ValueError(f"no mesh line at y = {y}")
    x = mesh.nodes[row, 0]
    g = np.asarray(d, dtype=float)[row] - threshold
    g0, g1, dx = g[:-1], g[1:], np.diff(x)
    both = (g0 > 0.0) & (g1 > 0.0)
    one = (g0 > 0.0) != (g1 > 0.0)
    frac = np.where(one, np.maximum(g0, g1) / np.where(one, np.abs(g1 - g0), 1.0), 0.0)
    return float(np.sum(np.where(both, dx, 0.0)) + np.sum(frac * dx))


def line_profile(disc, state, p, y) -> dict:
    """Element-column profile of ``m, m_p, p, w`` (and ``m_e``, ``d``) along ``y``.

    Each column averages the two elements sharing the line, so values are
    symmetric quantities of the crack faces.
    """
    mesh = disc.mesh
    cells = cell_fields(disc, state, p)
    xy = mesh.nodes[mesh.elements]
    ymin, ymax = xy[..., 1].min(axis=1), xy[..., 1].max(axis=1)
    tol = 1e-9 * max(1.0, abs(y))
    touching = np.flatnonzero((np.abs(ymin - y) < tol) | (np.abs(ymax - y) < tol))
    cx = mesh.element_centers()[touching, 0]
    keys = np.round(cx, 9)
    xs = np.unique(keys)
    out = {"x": xs}
    for name in ("m", "m_e", "m_p", "p", "w"):
        out[name] = np.array([cells[name][touching[keys == k]].mean() for k in xs])
    row = line_nodes(mesh, y)
    out["d"] = np.interp(xs, mesh.nodes[row, 0], np.asarray(state.d)[row])
    return out


def probe_pressure(state, p, element) -> float:
    return float(gauss_pressure(state, p)[element].mean())


def footing_force(reaction, loaded_dofs) -> float:
    """Magnitude of the resultant vertical force on the footing (MN/m)."""
    return float(abs(np.sum(reaction[loaded_dofs])))


def boundary_outflow(disc, h) -> float:
    """Net outward mass flow through all flux-space boundary edges (kg/(m s))."""
    return float(np.sum(np.asarray(h)[disc.mesh.boundary_edges]))


def total_mass_change(disc, m, m_n) -> float:
    """``sum int (m - m_n) dV`` over the mesh (kg/m)."""
    return float(np.sum(disc.geometry.dV * (np.asarray(m) - np.asarray(m_n))))
