"""Phase-field bookkeeping: crack density, degradation, history field and
the pointwise phase-field residual."""

from dataclasses import dataclass

import numpy as np


def crack_density(d, grad_d, l):
    """Regularized crack surface density ``d^2/(2l) + (l/2)|grad d|^2``."""
    d = np.asarray(d, dtype=float)
    grad_d = np.asarray(grad_d, dtype=float)
    return d**2 / (2.0 * l) + 0.5 * l * np.sum(grad_d**2, axis=-1)


def degradation(d):
    """Return ``(g, g', g'')`` for ``g(d) = (1 - d)^2``."""
    d = np.asarray(d, dtype=float)
    return (1.0 - d) ** 2, -2.0 * (1.0 - d), np.full_like(d, 2.0)


def crack_driving_energy(psi_eff0_plus, psi_plast0, w_plast, p):
    """Thresholded driving energy ``<psi_eff0+ + X - psi_c>_+``.

    ``X`` is the undamaged hardening energy or the accumulated plastic work
    depending on ``p.driving_force_mode``.
    """
    from .material import DrivingForceMode

    if p.driving_force_mode is DrivingForceMode.PLASTIC_WORK:
        extra = w_plast
    else:
        extra = psi_plast0
    return np.maximum(np.asarray(psi_eff0_plus) + extra - p.psi_c, 0.0)


def update_history(H_old, psi_eff0_plus, psi_plast0, w_plast, p):
    """New history value: running maximum of the driving energy."""
    return np.maximum(H_old, crack_driving_energy(psi_eff0_plus, psi_plast0, w_plast, p))


@dataclass(frozen=True)
class FractureKernel:
    """Pointwise residual and tangent of the phase-field equation."""

    r_d: np.ndarray
    r_grad: np.ndarray
    k_dd: np.ndarray
    k_grad: np.ndarray


def phase_field_kernel(d, grad_d, H, p):
    """Weak-form integrands of ``-2(1-d)H + 2 psi_c (d - l^2 lap d) = 0``.

    The equation is linear in ``d``, so ``k_dd`` and ``k_grad`` are exact.
    """
    d = np.asarray(d, dtype=float)
    H = np.asarray(H, dtype=float)
    r_d = -2.0 * (1.0 - d) * H + 2.0 * p.psi_c * d
    r_grad = 2.0 * p.psi_c * p.l**2 * np.asarray(grad_d, dtype=float)
    k_dd = 2.0 * H + 2.0 * p.psi_c
    k_grad = np.full_like(d, 2.0 * p.psi_c * p.l**2)
    return FractureKernel(r_d, r_grad, k_dd, k_grad)


def homogeneous_solution(H, psi_c):
    """Root of the phase-field equation for spatially uniform ``H``."""
    H = np.asarray(H, dtype=float)
    return H / (H + psi_c)
