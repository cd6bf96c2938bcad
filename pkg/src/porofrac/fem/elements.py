"""Reference-element kernels: Q1 shapes, RT0 fluxes and EAS modes.

All kernels work in plane strain on the reference square ``[-1, 1]^2``
with counter-clockwise local nodes ``(-1,-1), (1,-1), (1,1), (-1,1)``.
Strains are returned as 6-component Mandel vectors with the out-of-plane
components zero.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ElementQualityError
from ..tensors import SQ2

_G = 1.0 / np.sqrt(3.0)
#: 2x2 Gauss rule (all weights equal to one).
GAUSS_POINTS = np.array([[-_G, -_G], [_G, -_G], [_G, _G], [-_G, _G]])
GAUSS_WEIGHTS = np.ones(4)

_REF_NODES = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
N_EAS = 4


def q1_shape(xi):
    """Shape values ``(4,)`` and reference gradients ``(4, 2)`` at ``xi``."""
    s, t = xi
    a, b = _REF_NODES[:, 0], _REF_NODES[:, 1]
    N = 0.25 * (1.0 + a * s) * (1.0 + b * t)
    dN = np.column_stack([0.25 * a * (1.0 + b * t), 0.25 * b * (1.0 + a * s)])
    return N, dN


def jacobian(xy, xi):
    """``J[..., i, a] = d x_i / d xi_a`` for element coordinates ``xy (..., 4, 2)``."""
    _, dN = q1_shape(xi)
    return np.einsum("...ni,na->...ia", xy, dN)


def _checked_det(J):
    det = np.linalg.det(J)
    if np.any(det <= 0.0):
        raise ElementQualityError(f"degenerate element Jacobian (det={np.min(det):.3e})")
    return det


def rt0_reference(xi):
    """Reference RT0 fields ``(4 edges, 2)`` with unit outward edge flux, and divergences."""
    s, t = xi
    phi = 0.25 * np.array([[0.0, t - 1.0], [s + 1.0, 0.0], [0.0, t + 1.0], [s - 1.0, 0.0]])
    return phi, np.full(4, 0.25)


def rt0_basis(elem_xy, local_point):
    """Piola-mapped RT0 shapes at one point of one element.

    Returns ``(values (4, 2), divergences (4,))``; function ``k`` carries a
    unit outward flux through local edge ``k`` and zero through the others.
    """
    xy = np.asarray(elem_xy, dtype=float)
    J = jacobian(xy, local_point)
    det = _checked_det(J)
    phi, div = rt0_reference(local_point)
    return phi @ J.T / det, div / det


def strain_matrix(dN_dx):
    """Mandel B-matrix ``(..., 6, 8)`` from physical shape gradients ``(..., 4, 2)``."""
    B = np.zeros(dN_dx.shape[:-2] + (6, 8))
    gx, gy = dN_dx[..., 0], dN_dx[..., 1]
    B[..., 0, 0::2] = gx
    B[..., 1, 1::2] = gy
    B[..., 3, 0::2] = gy / SQ2
    B[..., 3, 1::2] = gx / SQ2
    return B


def eas_matrix(elem_xy, local_point):
    """Enhanced-strain matrix ``(..., 6, 4)`` of the four Wilson-type modes.

    Reference modes ``xi``, ``eta`` on the normal components and ``xi``,
    ``eta`` on the shear are pushed forward with the Jacobian at the centre
    and scaled by ``det J0 / det J``, so their integral over the element
    vanishes.
    """
    xy = np.asarray(elem_xy, dtype=float)
    J0 = jacobian(xy, (0.0, 0.0))
    J = jacobian(xy, local_point)
    scale = _checked_det(J0) / _checked_det(J)
    J0inv = np.linalg.inv(J0)               # [a, i]
    s, t = local_point
    modes = np.zeros((4, 2, 2))
    modes[0, 0, 0] = s
    modes[1, 1, 1] = t
    modes[2, 0, 1] = modes[2, 1, 0] = 0.5 * s
    modes[3, 0, 1] = modes[3, 1, 0] = 0.5 * t
    phys = np.einsum("...ai,kab,...bj->...kij", J0inv, modes, J0inv)
    phys = phys * np.asarray(scale)[..., None, None, None]
    G = np.zeros(xy.shape[:-2] + (6, 4))
    G[..., 0, :] = phys[..., 0, 0]
    G[..., 1, :] = phys[..., 1, 1]
    G[..., 3, :] = SQ2 * phys[..., 0, 1]
    return G


def eas_strain(elem_xy, local_point, nodal_u, enhanced_params):
    """Total strain ``B u + G alpha`` at one point (Mandel)."""
    xy = np.asarray(elem_xy, dtype=float)
    J = jacobian(xy, local_point)
    _checked_det(J)
    _, dN = q1_shape(local_point)
    B = strain_matrix(dN @ np.linalg.inv(J))
    return B @ np.asarray(nodal_u, dtype=float) + eas_matrix(xy, local_point) @ np.asarray(
        enhanced_params, dtype=float)


@dataclass(frozen=True)
class ElementGeometry:
    """Quadrature data for every element of a mesh (4 Gauss points each).

    RT0 arrays already include the global edge signs, so they act directly
    on global flux dofs.
    """

    dV: np.ndarray       # (Ne, 4)
    N: np.ndarray        # (4 points, 4 nodes)
    dN: np.ndarray       # (Ne, 4, 4, 2) physical gradients
    B: np.ndarray        # (Ne, 4, 6, 8)
    G: np.ndarray        # (Ne, 4, 6, 4)
    phi: np.ndarray      # (Ne, 4, 4 edges, 2)
    div: np.ndarray      # (Ne, 4, 4 edges)
    x: np.ndarray        # (Ne, 4, 2) physical Gauss points

    @classmethod
    def build(cls, mesh) -> "ElementGeometry":
        xy = mesh.nodes[mesh.elements]
        ne = len(xy)
        dV = np.empty((ne, 4))
        N = np.empty((4, 4))
        dN = np.empty((ne, 4, 4, 2))
        G = np.empty((ne, 4, 6, 4))
        phi = np.empty((ne, 4, 4, 2))
        div = np.empty((ne, 4, 4))
        for q, (xi, w) in enumerate(zip(GAUSS_POINTS, GAUSS_WEIGHTS)):
            Nq, dNq = q1_shape(xi)
            J = jacobian(xy, xi)
            det = _checked_det(J)
            N[q] = Nq
            dV[:, q] = w * det
            dN[:, q] = np.einsum("na,eai->eni", dNq, np.linalg.inv(J))
            G[:, q] = eas_matrix(xy, xi)
            ph, dv = rt0_reference(xi)
            phi[:, q] = np.einsum("eia,ka->eki", J, ph) / det[:, None, None]
            div[:, q] = dv[None, :] / det[:, None]
        sign = mesh.edge_sign[:, None, :]
        phi *= sign[..., None]
        div *= sign
        B = strain_matrix(dN)
        x = np.einsum("qn,eni->eqi", N, xy)
        return cls(dV, N, dN, B, G, phi, div, x)

    @property
    def n_points(self) -> int:
        return self.dV.size
