"""One-pass staggered time step: Newton on (u, h), history update, phase field."""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from ..errors import AssemblyError, NumericalError, ReturnMapError, StepFailure
from ..fracture import update_history
from ..material import psi_plast0
from .assembly import (
    QuadratureBlock,
    assemble_mech_flux,
    assemble_phase,
    lagged_inverse_permeability,
)


class DirectSolver:
    """Sparse LU behind a minimal ``solve(A, b)`` interface."""

    def solve(self, A, b):
        try:
            lu = spla.splu(A.tocsc())
        except RuntimeError as exc:
            raise AssemblyError(f"singular global system: {exc}") from None
        x = lu.solve(b)
        if not np.all(np.isfinite(x)):
            raise AssemblyError("singular global system (non-finite solution)")
        return x


@dataclass
class FieldState:
    """Global unknowns plus the Gauss-point state after an accepted step."""

    u: np.ndarray
    h: np.ndarray
    d: np.ndarray
    qp: QuadratureBlock
    time: float = 0.0
    step: int = 0

    @classmethod
    def initial(cls, disc) -> "FieldState":
        dofs = disc.dofs
        return cls(np.zeros(dofs.n_u), np.zeros(dofs.n_h), np.zeros(dofs.n_d),
                   QuadratureBlock.zeros(disc.mesh.n_elements))

    def copy(self) -> "FieldState":
        return FieldState(self.u.copy(), self.h.copy(), self.d.copy(), self.qp.copy(),
                          self.time, self.step)


@dataclass(frozen=True)
class NewtonOptions:
    """Convergence controls of the coupled (u, h) Newton iteration.

    The residual is divided per field by a force scale (u rows) and a
    potential-times-time scale (h rows) before taking the Euclidean norm.
    Converged when the scaled norm is below ``abs_tol`` or below
    ``rel_tol`` times its initial value.
    """

    abs_tol: float = 1e-8
    rel_tol: float = 1e-10
    max_iter: int = 25
    fracture: bool = True
    threads: int = 1


@dataclass
class StepReport:
    """Diagnostics of one solved step."""

    step: int
    time: float
    iterations: int
    residual_norms: list = field(default_factory=list)
    max_local_iterations: int = 0
    plastic_points: int = 0
    reaction: np.ndarray = None


def residual_scales(disc, tau, p):
    """Per-dof scales of the (u, h) residual."""
    sigma_ref = p.sigma_y if p.sigma_y > 0.0 else 1e-6 * (p.lam + 2.0 * p.G)
    length = float(np.mean(disc.mesh.h_e))
    scale = np.empty(disc.dofs.n_mech)
    scale[:disc.dofs.n_u] = sigma_ref * length
    scale[disc.dofs.n_u:] = tau * sigma_ref / p.rho_f
    return scale


def solve_step(disc, state_n, bcs, tau, p, options=NewtonOptions(), linear_solver=None):
    """Advance ``state_n`` by one time step of size ``tau``.

    Returns the new :class:`FieldState` and a :class:`StepReport`.  Raises
    :class:`~porofrac.errors.StepFailure` when the Newton iteration does
    not converge.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    solver = linear_solver or DirectSolver()
    dofs = disc.dofs
    qp = state_n.qp.copy()
    step = state_n.step + 1
    kinv = lagged_inverse_permeability(disc, qp, state_n.d, p)

    x = np.concatenate([state_n.u, state_n.h])
    x[bcs.fixed] = bcs.values[bcs.fixed]
    eas = qp.eas_n.copy()
    free = np.flatnonzero(~bcs.fixed)
    scale = residual_scales(disc, tau, p)[free]
    report = StepReport(step, state_n.time + tau, 0)

    norm0 = None
    for it in range(options.max_iter + 1):
        try:
            sys = assemble_mech_flux(disc, x[:dofs.n_u], x[dofs.n_u:], eas, qp,
                                     state_n.d, kinv, bcs, tau, p,
                                     threads=options.threads)
        except (ReturnMapError, NumericalError) as exc:
            raise StepFailure(f"step {step}: {exc}", step=step,
                              history=report.residual_norms) from exc
        r = sys.residual[free]
        norm = float(np.linalg.norm(r / scale))
        report.residual_norms.append(norm)
        if not np.isfinite(norm):
            raise StepFailure(f"step {step}: non-finite residual", step=step,
                              history=report.residual_norms)
        norm0 = norm if norm0 is None else norm0
        if norm <= options.abs_tol or norm <= options.rel_tol * norm0:
            break
        if it == options.max_iter:
            raise StepFailure(
                f"step {step}: Newton did not converge in {options.max_iter} iterations "
                f"(scaled residual {norm:.3e})", step=step, history=report.residual_norms)
        K = sys.tangent[free][:, free]
        delta = np.zeros(dofs.n_mech)
        delta[free] = solver.solve(K, -r)
        x += delta
        eas = eas + sys.eas_increment(disc.element_dofs, delta)
        report.iterations = it + 1

    res = sys.response.result
    shape = qp.m.shape
    qp.eps, qp.m, qp.eas = sys.eps, sys.m, eas
    qp.eps_p = res.eps_p.reshape(shape + (6,))
    qp.m_p = res.m_p.reshape(shape)
    qp.alpha = res.alpha.reshape(shape)
    qp.w_plast = qp.w_plast_n + res.plastic_work_increment.reshape(shape)
    qp.history_H = update_history(qp.history_H_n, res.psi_eff0_plus.reshape(shape),
                                  psi_plast0(qp.alpha, p), qp.w_plast, p)
    report.max_local_iterations = int(res.iterations.max(initial=0))
    report.plastic_points = int(np.count_nonzero(res.plastic))
    report.reaction = sys.residual.copy()

    d = state_n.d.copy()
    if options.fracture:
        d = solve_phase_field(disc, state_n.d, qp.history_H, bcs, p, solver)

    qp.commit()
    new = FieldState(x[:dofs.n_u].copy(), x[dofs.n_u:].copy(), d, qp,
                     state_n.time + tau, step)
    return new, report


def solve_phase_field(disc, d_n, H, bcs, p, solver=None):
    """Single linear solve for ``d`` followed by the irreversibility clamp."""
    if p.psi_c <= 0.0:
        raise AssemblyError("phase-field solve needs psi_c > 0")
    solver = solver or DirectSolver()
    d = np.asarray(d_n, dtype=float).copy()
    d[bcs.d_fixed] = bcs.d_values[bcs.d_fixed]
    r, K = assemble_phase(disc, d, H, p)
    free = np.flatnonzero(~bcs.d_fixed)
    d[free] += solver.solve(K[free][:, free], -r[free])
    return np.clip(np.maximum(d, d_n), 0.0, 1.0)
