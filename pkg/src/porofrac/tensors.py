"""Symmetric second-order tensors in Mandel notation.

A symmetric 3x3 tensor is stored as the six-vector

    [xx, yy, zz, sqrt(2) xy, sqrt(2) yz, sqrt(2) xz]

so that the double contraction ``a : b`` is the plain dot product and a
fourth-order tensor with minor symmetries is a symmetric 6x6 matrix whose
matrix inverse is the tensor inverse.  All functions broadcast over any
number of leading axes.

Under plane strain the yz and xz components vanish and the out-of-plane
axis is an eigenvector, which the spectral routines exploit.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidInputError

SQ2 = np.sqrt(2.0)

#: Mandel vector of the second-order identity.
IDENTITY = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
#: Fourth-order identity on symmetric tensors.
IDENTITY4 = np.eye(6)
#: Volumetric projector ``(1/3) I (x) I``.
P_VOL = np.outer(IDENTITY, IDENTITY) / 3.0
#: Deviatoric projector ``I4 - P_VOL``.
P_DEV = IDENTITY4 - P_VOL

_PAIRS = ((0, 1), (1, 2), (0, 2))  # index pairs for xy, yz, xz
_EIG_TOL = 1e-12


def to_mandel(mat):
    """Convert symmetric ``(..., 3, 3)`` matrices to Mandel six-vectors."""
    mat = np.asarray(mat, dtype=float)
    out = np.empty(mat.shape[:-2] + (6,))
    out[..., 0] = mat[..., 0, 0]
    out[..., 1] = mat[..., 1, 1]
    out[..., 2] = mat[..., 2, 2]
    for k, (i, j) in enumerate(_PAIRS):
        out[..., 3 + k] = SQ2 * 0.5 * (mat[..., i, j] + mat[..., j, i])
    return out


def from_mandel(vec):
    """Convert Mandel six-vectors back to symmetric ``(..., 3, 3)`` matrices."""
    vec = np.asarray(vec, dtype=float)
    out = np.empty(vec.shape[:-1] + (3, 3))
    for k in range(3):
        out[..., k, k] = vec[..., k]
    for k, (i, j) in enumerate(_PAIRS):
        out[..., i, j] = out[..., j, i] = vec[..., 3 + k] / SQ2
    return out


def sym_tensor(xx=0.0, yy=0.0, zz=0.0, xy=0.0, yz=0.0, xz=0.0):
    """Build a Mandel vector from tensor components."""
    return np.array([xx, yy, zz, SQ2 * xy, SQ2 * yz, SQ2 * xz], dtype=float)


def dyad_mandel(a, b):
    """Mandel vector of ``sym(a (x) b)`` for 3-vectors ``a`` and ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mat = 0.5 * (a[..., :, None] * b[..., None, :] + b[..., :, None] * a[..., None, :])
    return to_mandel(mat)


def trace(t):
    return t[..., 0] + t[..., 1] + t[..., 2]


def ddot(a, b):
    """Double contraction ``a : b``."""
    return np.einsum("...i,...i->...", a, b)


def invariants(t):
    """Return ``(trace, |dev t|, dev t)`` for Mandel tensors ``t``."""
    t = np.asarray(t, dtype=float)
    tr = trace(t)
    dev = t - (tr / 3.0)[..., None] * IDENTITY
    return tr, np.sqrt(ddot(dev, dev)), dev


def ramp_plus(x):
    """``<x>_+ = (x + |x|) / 2``."""
    return np.maximum(x, 0.0)


def ramp_minus(x):
    """``<x>_- = (x - |x|) / 2``."""
    return np.minimum(x, 0.0)


def heaviside_plus(x):
    # <0>_+ has unit slope by convention, so the zero eigenvalue belongs to
    # the tensile part.
    return (x >= 0.0).astype(float)


@dataclass(frozen=True)
class SpectralSplit:
    """Eigen-decomposition of a strain tensor and its ramped parts.

    Attributes
    ----------
    eigenvalues : ndarray (..., 3)
        Sorted in descending order.
    eigenvectors : ndarray (..., 3, 3)
        ``eigenvectors[..., :, i]`` belongs to ``eigenvalues[..., i]``.
    projectors : ndarray (..., 3, 6)
        Mandel vectors of ``n_i (x) n_i``.
    plus, minus : ndarray (..., 6)
        Tensile and compressive parts; ``plus + minus`` equals the input.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    projectors: np.ndarray
    plus: np.ndarray
    minus: np.ndarray


def _eigen_plane(eps):
    """Closed-form eigen-decomposition for tensors with yz = xz = 0."""
    a = eps[..., 0]
    b = eps[..., 1]
    c = eps[..., 3] / SQ2
    mean = 0.5 * (a + b)
    rad = np.hypot(0.5 * (a - b), c)
    theta = 0.5 * np.arctan2(2.0 * c, a - b)
    ct, st = np.cos(theta), np.sin(theta)
    vals = np.stack([mean + rad, mean - rad, eps[..., 2]], axis=-1)
    vecs = np.zeros(eps.shape[:-1] + (3, 3))
    vecs[..., 0, 0] = ct
    vecs[..., 1, 0] = st
    vecs[..., 0, 1] = -st
    vecs[..., 1, 1] = ct
    vecs[..., 2, 2] = 1.0
    return vals, vecs


def eigen_decomposition(eps):
    """Eigenvalues (descending) and eigenvectors of Mandel tensors."""
    eps = np.asarray(eps, dtype=float)
    if not np.all(np.isfinite(eps)):
        raise InvalidInputError("tensor contains non-finite components")
    if np.all(eps[..., 4:6] == 0.0):
        vals, vecs = _eigen_plane(eps)
    else:
        vals, vecs = np.linalg.eigh(from_mandel(eps))
    order = np.argsort(-vals, axis=-1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=-1)
    vecs = np.take_along_axis(vecs, order[..., None, :], axis=-1)
    return vals, vecs


def _eigen_basis(vecs):
    """6x6 matrix whose columns are the orthonormal eigen-dyads.

    Columns 0..2 are ``n_i (x) n_i``; columns 3..5 are
    ``(n_i (x) n_j + n_j (x) n_i)/sqrt(2)`` for the pairs (0,1), (1,2), (0,2).
    """
    n = [vecs[..., :, i] for i in range(3)]
    cols = [dyad_mandel(n[i], n[i]) for i in range(3)]
    cols += [SQ2 * dyad_mandel(n[i], n[j]) for i, j in _PAIRS]
    return np.stack(cols, axis=-1)


def spectral_split(eps):
    """Split ``eps`` into tensile and compressive parts by eigenvalue sign."""
    vals, vecs = eigen_decomposition(eps)
    proj = np.stack(
        [dyad_mandel(vecs[..., :, i], vecs[..., :, i]) for i in range(3)], axis=-2
    )
    plus = np.einsum("...i,...ij->...j", ramp_plus(vals), proj)
    minus = np.einsum("...i,...ij->...j", ramp_minus(vals), proj)
    return SpectralSplit(vals, vecs, proj, plus, minus)


def _ramp_tangent_coefficients(vals):
    """Eigenbasis coefficients of d<eps>_+/d eps (six per tensor)."""
    diag = heaviside_plus(vals)
    off = []
    for i, j in _PAIRS:
        li, lj = vals[..., i], vals[..., j]
        gap = li - lj
        close = np.abs(gap) <= _EIG_TOL
        safe = np.where(close, 1.0, gap)
        secant = (ramp_plus(li) - ramp_plus(lj)) / safe
        limit = heaviside_plus(0.5 * (li + lj))
        off.append(np.where(close, limit, secant))
    return np.concatenate([diag, np.stack(off, axis=-1)], axis=-1)


@dataclass(frozen=True)
class SplitEnergy:
    """Tensile/compressive elastic energies, stresses and tangents."""

    psi_plus: np.ndarray
    psi_minus: np.ndarray
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    tangent_plus: np.ndarray
    tangent_minus: np.ndarray


def split_energy_and_stress(eps_e, lam, G):
    """Evaluate the split isotropic elastic energy and its derivatives.

    ``psi_pm = lam/2 <tr eps>_pm^2 + G eps_pm : eps_pm``.  Stresses are the
    first derivatives and tangents the second derivatives, both in Mandel
    form.
    """
    if G < 0.0 or lam < -2.0 / 3.0 * G:
        raise ConfigError(f"inadmissible Lame constants lambda={lam}, G={G}")
    eps_e = np.asarray(eps_e, dtype=float)
    split = spectral_split(eps_e)
    vals = split.eigenvalues
    tr = trace(eps_e)
    tr_p, tr_m = ramp_plus(tr), ramp_minus(tr)

    psi_plus = 0.5 * lam * tr_p**2 + G * np.sum(ramp_plus(vals) ** 2, axis=-1)
    psi_minus = 0.5 * lam * tr_m**2 + G * np.sum(ramp_minus(vals) ** 2, axis=-1)
    sigma_plus = lam * tr_p[..., None] * IDENTITY + 2.0 * G * split.plus
    sigma_minus = lam * tr_m[..., None] * IDENTITY + 2.0 * G * split.minus

    basis = _eigen_basis(split.eigenvectors)
    coef = _ramp_tangent_coefficients(vals)
    d_plus = np.einsum("...ik,...k,...jk->...ij", basis, coef, basis)
    h_tr = heaviside_plus(tr)[..., None, None]
    vol = np.outer(IDENTITY, IDENTITY)
    tangent_plus = lam * h_tr * vol + 2.0 * G * d_plus
    tangent_minus = lam * (1.0 - h_tr) * vol + 2.0 * G * (IDENTITY4 - d_plus)
    return SplitEnergy(psi_plus, psi_minus, sigma_plus, sigma_minus,
                       tangent_plus, tangent_minus)


def rotation_z(angle):
    """In-plane rotation matrix about the z axis."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotate(t, rot):
    """Return ``R t R^T`` for a Mandel tensor ``t``."""
    mat = from_mandel(t)
    return to_mandel(rot @ mat @ rot.T)
