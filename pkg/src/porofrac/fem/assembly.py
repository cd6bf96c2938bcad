"""Element loops for the coupled displacement/flux system and the phase field.

Per element the unknowns are 8 displacements, 4 edge fluxes and 4 enhanced
strain parameters.  At every Gauss point the generalized strain
``[eps (6), m]`` is

    eps = B u + G a,        m = m_n - tau div h,

and the local response supplies ``[sigma, dpsi/dm]`` with its 7x7 tangent.
The enhanced parameters are condensed element by element.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np
import scipy.sparse as sp

from .. import material as mat
from ..errors import AssemblyError, NumericalError, ReturnMapError
from ..fracture import phase_field_kernel
from ..material import ENERGY_SCALE, PointState
from ..plasticity import local_energy_state, return_map_batch
from .dofs import DofMap
from .elements import N_EAS, ElementGeometry

_NB = 12  # displacement + flux dofs per element


def mass_update(m_n, tau, div_h):
    """Implicit fluid-content update ``m = m_n - tau div h``."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    return np.asarray(m_n) - tau * np.asarray(div_h)


@dataclass
class QuadratureBlock:
    """Constitutive state at all Gauss points, stored as ``(Ne, 4, ...)`` arrays.

    ``eas`` holds the four enhanced parameters per element.  Fields with an
    ``_n`` suffix belong to the last accepted step.
    """

    eps: np.ndarray
    m: np.ndarray
    eps_p: np.ndarray
    m_p: np.ndarray
    alpha: np.ndarray
    history_H: np.ndarray
    w_plast: np.ndarray
    eas: np.ndarray
    m_n: np.ndarray
    eps_p_n: np.ndarray
    m_p_n: np.ndarray
    alpha_n: np.ndarray
    history_H_n: np.ndarray
    w_plast_n: np.ndarray
    eas_n: np.ndarray

    @classmethod
    def zeros(cls, n_elements: int) -> "QuadratureBlock":
        shapes = {"eps": (6,), "eps_p": (6,), "eps_p_n": (6,)}
        out = {}
        for f in fields(cls):
            if f.name in ("eas", "eas_n"):
                out[f.name] = np.zeros((n_elements, N_EAS))
            else:
                out[f.name] = np.zeros((n_elements, 4) + shapes.get(f.name, ()))
        return cls(**out)

    def copy(self) -> "QuadratureBlock":
        return QuadratureBlock(**{f.name: getattr(self, f.name).copy() for f in fields(self)})

    def commit(self) -> None:
        self.m_n = self.m.copy()
        self.eps_p_n = self.eps_p.copy()
        self.m_p_n = self.m_p.copy()
        self.alpha_n = self.alpha.copy()
        self.history_H_n = self.history_H.copy()
        self.w_plast_n = self.w_plast.copy()
        self.eas_n = self.eas.copy()

    @property
    def m_e(self) -> np.ndarray:
        return self.m - self.m_p

    def point(self, e: int, q: int, d: float = 0.0, grad_d=None) -> PointState:
        """Snapshot of one Gauss point as a :class:`PointState`."""
        return PointState(
            eps=self.eps[e, q].copy(), m=float(self.m[e, q]), d=d,
            grad_d=np.zeros(3) if grad_d is None else np.asarray(grad_d, dtype=float),
            eps_p=self.eps_p[e, q].copy(), alpha=float(self.alpha[e, q]),
            m_p=float(self.m_p[e, q]), history_H=float(self.history_H[e, q]),
            w_plast=float(self.w_plast[e, q]), eps_p_n=self.eps_p_n[e, q].copy(),
            alpha_n=float(self.alpha_n[e, q]), m_p_n=float(self.m_p_n[e, q]),
            history_H_n=float(self.history_H_n[e, q]),
            w_plast_n=float(self.w_plast_n[e, q]))


@dataclass(frozen=True)
class Discretization:
    """Mesh plus everything derived from it once."""

    mesh: object
    dofs: DofMap
    geometry: ElementGeometry
    element_dofs: np.ndarray = field(repr=False)      # (Ne, 12)
    node_dofs: np.ndarray = field(repr=False)         # (Ne, 8)

    @classmethod
    def build(cls, mesh) -> "Discretization":
        dofs = DofMap.for_mesh(mesh)
        edofs = dofs.element_mech_dofs(mesh)
        return cls(mesh, dofs, ElementGeometry.build(mesh), edofs, edofs[:, :8])

    def interpolate_nodal(self, values):
        """Values and gradients of a nodal scalar at all Gauss points."""
        ve = np.asarray(values)[self.mesh.elements]
        g = self.geometry
        return (np.einsum("qn,en->eq", g.N, ve), np.einsum("eqni,en->eqi", g.dN, ve))

    def gauss_fields(self, u, h, eas):
        """``eps (Ne,4,6)``, ``div h (Ne,4)`` and ``h (Ne,4,2)`` at Gauss points."""
        g = self.geometry
        ue = np.asarray(u)[self.node_dofs]
        he = np.asarray(h)[self.mesh.element_edges]
        eps = np.einsum("eqij,ej->eqi", g.B, ue) + np.einsum("eqij,ej->eqi", g.G, eas)
        return eps, np.einsum("eqk,ek->eq", g.div, he), np.einsum("eqki,ek->eqi", g.phi, he)


def lagged_inverse_permeability(disc, qp, d, p):
    """In-plane ``K^-1`` (SI) at all Gauss points from the accepted state.

    Strain, phase field and its gradient are taken at ``t_n`` and the
    crack-normal length ``L_perp`` is the element size.
    """
    dq, gq = disc.interpolate_nodal(d)
    grad3 = np.concatenate([gq, np.zeros(gq.shape[:-1] + (1,))], axis=-1)
    L = np.broadcast_to(disc.mesh.h_e[:, None], dq.shape)
    return mat.inverse_permeability_2d(qp.eps, np.clip(dq, 0.0, 1.0), grad3, L, p)


def _in_chunks(func, n, threads):
    """Evaluate ``func(slice)`` over ``range(n)`` in ordered chunks."""
    if threads <= 1 or n < 2 * threads:
        return [func(slice(0, n))]
    bounds = np.linspace(0, n, threads + 1).astype(int)
    parts = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, parts))


@dataclass
class PointResponse:
    """Flattened Gauss-point response used by the assembly."""

    sigma: np.ndarray       # (P, 6) total stress
    mu: np.ndarray          # (P,) dpsi/dm
    tangent: np.ndarray     # (P, 7, 7)
    result: object = None   # ReturnMapResult when plasticity is active


def point_response(eps, m, d, qp, tau, p, plastic=True, threads=1):
    """Local constitutive response at all Gauss points."""
    P = eps.shape[0] * eps.shape[1]
    eps = eps.reshape(P, 6)
    m = m.reshape(P)
    d = np.clip(d.reshape(P), 0.0, 1.0)
    eps_p_n = qp.eps_p_n.reshape(P, 6)
    m_p_n = qp.m_p_n.reshape(P)
    alpha_n = qp.alpha_n.reshape(P)
    if not plastic:
        loc = local_energy_state(eps - eps_p_n, m - m_p_n, alpha_n, d, p)
        return PointResponse(loc.s[:, :6], loc.s[:, 6], loc.E[:, :7, :7])

    def run(sl):
        return return_map_batch(eps[sl], m[sl], d[sl], eps_p_n[sl], m_p_n[sl],
                                alpha_n[sl], tau, p, raise_on_failure=False)

    parts = _in_chunks(run, P, threads)
    res = parts[0] if len(parts) == 1 else type(parts[0])(
        **{f.name: np.concatenate([getattr(r, f.name) for r in parts])
           for f in fields(parts[0])})
    return PointResponse(res.sigma, res.dpsi_dm, res.tangent_ep, res)


@dataclass
class MechFluxSystem:
    """Condensed global residual and tangent plus data to recover EAS parameters."""

    residual: np.ndarray
    tangent: sp.csr_matrix
    eas_rhs: np.ndarray        # K_aa^-1 r_a            (Ne, 4)
    eas_coupling: np.ndarray   # K_aa^-1 K_ab           (Ne, 4, 12)
    eps: np.ndarray
    m: np.ndarray
    response: PointResponse

    def eas_increment(self, element_dofs, delta):
        """Enhanced-parameter change for a global increment ``delta``."""
        de = delta[element_dofs]
        return -(self.eas_rhs + np.einsum("eij,ej->ei", self.eas_coupling, de))


def _generalized_b(geom, tau):
    """``(Ne, 4, 7, 16)`` map from ``[u, h, a]`` to ``[eps, m - m_n]``."""
    ne = geom.dV.shape[0]
    Bm = np.zeros((ne, 4, 7, 16))
    Bm[..., :6, :8] = geom.B
    Bm[..., :6, _NB:] = geom.G
    Bm[..., 6, 8:_NB] = -tau * geom.div
    return Bm


def boundary_residual(disc, bcs, tau):
    """External contributions to the residual: ``tau mu_bar h.n - t . u``."""
    mesh, dofs = disc.mesh, disc.dofs
    r = np.zeros(dofs.n_mech)
    for edges, value in bcs.mu_bar:
        edges = np.asarray(edges, dtype=int)
        np.add.at(r, dofs.h_dofs(edges), tau * value)
    for edges, vec in bcs.traction:
        edges = np.asarray(edges, dtype=int)
        half = 0.5 * mesh.edge_length(edges)
        for end in (0, 1):
            nodes = mesh.edges[edges, end]
            for c in (0, 1):
                np.add.at(r, dofs.u_dofs(nodes, c), -half * vec[c])
    return r


def _scatter_vector(n, dofs, values):
    return np.bincount(dofs.ravel(), weights=values.ravel(), minlength=n)


def _scatter_matrix(n, dofs, blocks):
    rows = np.repeat(dofs[:, :, None], dofs.shape[1], axis=2)
    cols = np.repeat(dofs[:, None, :], dofs.shape[1], axis=1)
    return sp.coo_matrix((blocks.ravel(), (rows.ravel(), cols.ravel())),
                         shape=(n, n)).tocsr()


def assemble_mech_flux(disc, u, h, eas, qp, d_n, kinv, bcs, tau, p,
                       plastic=True, condense=True, threads=1):
    """Residual and tangent of the displacement/flux block.

    ``d_n`` is the accepted nodal phase field (frozen for this block) and
    ``kinv`` the lagged in-plane inverse permeability in SI units.  With
    ``plastic=False`` the plastic variables stay at their accepted values,
    which makes the residual the exact gradient of
    :func:`incremental_potential`.  With ``condense=False`` the full
    16-dof element arrays ``(r, K)`` are returned instead.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    g = disc.geometry
    eps, div_h, hq = disc.gauss_fields(u, h, eas)
    m = mass_update(qp.m_n, tau, div_h)
    d_q, _ = disc.interpolate_nodal(d_n)
    resp = point_response(eps, m, d_q, qp, tau, p, plastic=plastic, threads=threads)
    if resp.result is not None and not np.all(resp.result.converged):
        bad = int(np.flatnonzero(~resp.result.converged)[0])
        raise ReturnMapError(
            f"return map failed at element {bad // 4}, point {bad % 4}",
            residual=float(resp.result.residual[bad]), point=bad)
    ne = eps.shape[0]
    s7 = np.concatenate([resp.sigma, resp.mu[:, None]], axis=1).reshape(ne, 4, 7)
    T7 = resp.tangent.reshape(ne, 4, 7, 7)
    if not (np.all(np.isfinite(s7)) and np.all(np.isfinite(T7))):
        raise NumericalError("non-finite stress or tangent in the assembly")

    Bm = _generalized_b(g, tau)
    dV = g.dV
    BmT = np.swapaxes(Bm, -1, -2)
    r_el = np.einsum("eqai,eqi->ea", BmT, dV[..., None] * s7)
    K_el = (BmT @ (dV[..., None, None] * T7) @ Bm).sum(axis=1)
    # Darcy term tau * phi_fluid, energy converted to MN/m^2.
    cf = tau * ENERGY_SCALE
    Kphi = (cf * dV)[..., None, None] * (g.phi @ kinv)         # (Ne, 4, 4, 2)
    r_el[:, 8:_NB] += np.einsum("eqki,eqi->ek", Kphi, hq)
    K_el[:, 8:_NB, 8:_NB] += (Kphi @ np.swapaxes(g.phi, -1, -2)).sum(axis=1)

    if not condense:
        return r_el, K_el

    Kaa = K_el[:, _NB:, _NB:]
    rhs = np.concatenate([K_el[:, _NB:, :_NB], r_el[:, _NB:, None]], axis=2)
    try:
        sol = np.linalg.solve(Kaa, rhs)
    except np.linalg.LinAlgError:
        for e in range(ne):
            if np.linalg.matrix_rank(Kaa[e]) < N_EAS:
                raise AssemblyError(f"singular enhanced-strain block in element {e}") from None
        raise
    Kba = K_el[:, :_NB, _NB:]
    K_c = K_el[:, :_NB, :_NB] - Kba @ sol[:, :, :_NB]
    r_c = r_el[:, :_NB] - np.einsum("eij,ej->ei", Kba, sol[:, :, _NB])
    K_c = 0.5 * (K_c + np.swapaxes(K_c, 1, 2))

    n = disc.dofs.n_mech
    residual = _scatter_vector(n, disc.element_dofs, r_c) + boundary_residual(disc, bcs, tau)
    tangent = _scatter_matrix(n, disc.element_dofs, K_c)
    return MechFluxSystem(residual, tangent, sol[:, :, _NB], sol[:, :, :_NB], eps, m, resp)


def element_unknowns(disc, u, h, eas):
    """``(Ne, 16)`` element vectors ``[u (8), h (4), a (4)]``."""
    return np.concatenate([np.asarray(u)[disc.node_dofs],
                           np.asarray(h)[disc.mesh.element_edges], eas], axis=1)


def incremental_potential(disc, u, h, eas, qp, d_n, kinv, bcs, tau, p):
    """Incremental potential of the displacement/flux block at frozen plastic state.

    Stored energy plus ``tau`` times the Darcy dissipation, plus the
    boundary terms; its gradient is the residual of
    ``assemble_mech_flux(..., plastic=False)``.
    """
    g = disc.geometry
    eps, div_h, hq = disc.gauss_fields(u, h, eas)
    m = mass_update(qp.m_n, tau, div_h)
    d_q = np.clip(disc.interpolate_nodal(d_n)[0], 0.0, 1.0)
    eps_e = eps - qp.eps_p_n
    m_e = m - qp.m_p_n
    psi = (mat.elastic_energy(eps_e, d_q, p)[0] + mat.psi_plast(qp.alpha_n, d_q, p)
           + mat.psi_fluid(eps_e, m_e, p))
    darcy = 0.5 * tau * ENERGY_SCALE * np.einsum("eqi,eqij,eqj->eq", hq, kinv, hq)
    total = np.sum(g.dV * (psi + darcy))
    full = np.concatenate([np.asarray(u), np.asarray(h)])
    return total + boundary_residual(disc, bcs, tau) @ full


def assemble_phase(disc, d, H, p):
    """Residual and tangent of the phase-field equation (linear in ``d``)."""
    g = disc.geometry
    conn = disc.mesh.elements
    dq, gq = disc.interpolate_nodal(d)
    kern = phase_field_kernel(dq, gq, H, p)
    r_el = (np.einsum("eq,qn,eq->en", g.dV, g.N, kern.r_d)
            + np.einsum("eq,eqni,eqi->en", g.dV, g.dN, kern.r_grad))
    K_el = (np.einsum("eq,qa,qb,eq->eab", g.dV, g.N, g.N, kern.k_dd)
            + np.einsum("eq,eqai,eqbi,eq->eab", g.dV, g.dN, g.dN, kern.k_grad))
    n = disc.dofs.n_d
    return _scatter_vector(n, conn, r_el), _scatter_matrix(n, conn, K_el)
