"""Drucker-Prager-type yield function and visco-plastic return mapping.

The local problem works on the 8-component generalized vectors

    plastic variables  P = [eps_p (Mandel 6), m_p, alpha]
    driving forces     s = [sigma (Mandel 6), mu, beta]

with ``ds/dP = -E`` where ``E`` is the 8x8 Hessian of the stored energy
with respect to ``[eps_e, m_e, alpha]``.  The return map solves

    P - P_n = gamma * df/ds,      f(s) = (eta_p / tau) * gamma

by Newton's method and returns the algorithmic tangent of ``[sigma, mu]``
with respect to the total ``[eps, m]``.

Globalization
-------------
The flow residual is iterated in the form ``q * r`` (``q`` the smoothed
deviatoric norm), which removes the ``1/q`` singularity at the apex.  Far
beyond the apex, where the friction-hardening exponential dominates, the
yield row is linearized in log form.  Steps are backtracked on a
non-monotone merit and stopped just past kinks of the tension/compression
split; the hardening flow is clipped at zero away from the solution.
Points that still stall are re-solved by scaling the elastic predictor up
to the trial in stages.  None of this changes the
converged state; convergence is always checked on the plain residual.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import tensors as T
from .errors import NumericalError, ReturnMapError
from .fracture import degradation
from .material import DrivingForces, hardening_beta, hardening_modulus, psi_plast0

SQ32 = np.sqrt(1.5)
#: Cap on the exponent of the friction-hardening function.
EXP_CAP = 300.0
TOL = 1e-10
MAX_ITER = 50

LINE_SEARCH_MAX = 12
NONMONOTONE_DEPTH = 4
KINK_BISECTIONS = 30
#: Direct Newton iterations before switching to trial continuation.
DIRECT_ITER = 15
CONTINUATION_STAGES = 60
STAGE_ITER = 10
STAGE_TOL = 1e-8

_SIG = slice(0, 6)
_MU = 6
_BETA = 7


@dataclass(frozen=True)
class YieldEval:
    """Yield value with gradient and Hessian over ``[sigma(6), mu, beta]``."""

    value: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray
    saturated: np.ndarray


def _yield_parts(sigma, mu, beta, p):
    sigma = np.asarray(sigma, dtype=float)
    mu = np.asarray(mu, dtype=float)
    beta = np.asarray(beta, dtype=float)
    brf = p.b * p.rho_f
    tr, _, dev = T.invariants(sigma)
    q = np.sqrt(T.ddot(dev, dev) + (p.M_phi * p.q1) ** 2)
    t = tr / 3.0 + brf * mu - p.s_max
    saturated = t > EXP_CAP
    ex = np.exp(np.minimum(t, EXP_CAP))
    c = SQ32 * p.q1
    return dev, q, t, ex, c, brf, beta, saturated


def yield_value(sigma, mu, beta, p):
    """Yield function value only."""
    dev, q, t, ex, c, _, beta, _ = _yield_parts(sigma, mu, beta, p)
    return SQ32 * q + p.M_phi * t + beta * (1.0 - c * ex)


def yield_function(F, p):
    """Evaluate ``f^p(sigma, mu, beta)`` with analytic derivatives.

    ``F`` is a :class:`~porofrac.material.DrivingForces`.  Arrays broadcast
    over leading axes.  States whose hardening exponent exceeds
    :data:`EXP_CAP` are flagged in ``saturated``.
    """
    dev, q, t, ex, c, brf, beta, saturated = _yield_parts(F.sigma, F.mu, F.beta, p)
    if np.any(saturated):
        warnings.warn("friction-hardening exponent saturated; state far "
                      "outside the apex", RuntimeWarning, stacklevel=2)
    value = SQ32 * q + p.M_phi * t + beta * (1.0 - c * ex)
    qs = np.maximum(q, 1e-300)
    slope = p.M_phi - beta * c * ex

    shape = np.shape(value)
    grad = np.zeros(shape + (8,))
    grad[..., _SIG] = SQ32 * dev / qs[..., None] + (slope / 3.0)[..., None] * T.IDENTITY
    grad[..., _MU] = slope * brf
    grad[..., _BETA] = 1.0 - c * ex

    hess = np.zeros(shape + (8, 8))
    v = np.zeros(8)
    v[_SIG] = T.IDENTITY / 3.0
    v[_MU] = brf
    curv = -beta * c * ex
    hess += curv[..., None, None] * np.outer(v, v)
    hess[..., _SIG, _SIG] += SQ32 * (T.P_DEV / qs[..., None, None]
                                     - dev[..., :, None] * dev[..., None, :]
                                     / qs[..., None, None] ** 3)
    cross = -c * ex
    hess[..., :_BETA, _BETA] += cross[..., None] * v[:_BETA]
    hess[..., _BETA, :_BETA] += cross[..., None] * v[:_BETA]
    return YieldEval(value, grad, hess, saturated)


def yield_from_effective(sigma_eff, beta, mu, p):
    """Yield value written in terms of the effective stress.

    Substitutes ``sigma = sigma_eff - b rho_f mu 1``; the result does not
    depend on ``mu``.
    """
    sigma_eff = np.asarray(sigma_eff, dtype=float)
    sigma = sigma_eff - (p.b * p.rho_f * np.asarray(mu))[..., None] * T.IDENTITY
    return yield_value(sigma, mu, beta, p)


@dataclass(frozen=True)
class _FlowEval(YieldEval):
    """Yield data whose ``gradient`` is the (possibly clipped) flow direction."""

    true_gradient: np.ndarray = None


@dataclass
class LocalState:
    """Energy derivatives at a batch of points (internal helper)."""

    s: np.ndarray        # (N, 8) driving forces [sigma, mu, beta]
    E: np.ndarray        # (N, 8, 8) energy Hessian
    psi_plus: np.ndarray
    sigma0_eff: np.ndarray


def local_energy_state(eps_e, m_e, alpha, d, p):
    """Driving forces and Hessian ``E`` for elastic variables ``(eps_e, m_e, alpha)``."""
    split = T.split_energy_and_stress(eps_e, p.lam, p.G)
    gk = degradation(d)[0] + p.k
    bracket = p.b * T.trace(eps_e) - m_e / p.rho_f
    n = np.shape(m_e)
    s = np.empty(n + (8,))
    s[..., _SIG] = (gk[..., None] * split.sigma_plus + split.sigma_minus
                    + (p.M * p.b * bracket)[..., None] * T.IDENTITY)
    s[..., _MU] = -p.M / p.rho_f * bracket
    s[..., _BETA] = -hardening_beta(alpha, d, p)

    E = np.zeros(n + (8, 8))
    E[..., _SIG, _SIG] = (gk[..., None, None] * split.tangent_plus + split.tangent_minus
                          + p.M * p.b**2 * np.outer(T.IDENTITY, T.IDENTITY))
    E[..., _SIG, _MU] = -p.M * p.b / p.rho_f * T.IDENTITY
    E[..., _MU, _SIG] = -p.M * p.b / p.rho_f * T.IDENTITY
    E[..., _MU, _MU] = p.M / p.rho_f**2
    E[..., _BETA, _BETA] = hardening_modulus(alpha, d, p)
    return LocalState(s, E, split.psi_plus, split.sigma_plus + split.sigma_minus)


@dataclass
class ReturnMapResult:
    """Converged local state for one or many points.

    ``tangent_ep`` is the 7x7 algorithmic modulus of ``[sigma, dpsi_dm]``
    with respect to ``[eps, m]`` (Mandel strain components first).
    """

    eps_p: np.ndarray
    m_p: np.ndarray
    alpha: np.ndarray
    gamma_v: np.ndarray
    sigma: np.ndarray
    dpsi_dm: np.ndarray
    beta: np.ndarray
    tangent_ep: np.ndarray
    yield_value: np.ndarray
    plastic_work_increment: np.ndarray
    psi_eff0_plus: np.ndarray
    psi_plast0: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    residual: np.ndarray

    @property
    def plastic(self):
        return self.gamma_v > 0.0


def _plastic_vector(eps_p, m_p, alpha):
    P = np.empty(np.shape(m_p) + (8,))
    P[..., _SIG] = eps_p
    P[..., _MU] = m_p
    P[..., _BETA] = alpha
    return P


def _evaluate(E_tot, P_n, d, P, gamma, visc, p, safeguard=True):
    """Energy state, yield data and the local residual at ``(P, gamma)``.

    With ``safeguard`` the hardening component of the flow direction is
    clipped at zero.  Roots are unaffected (there ``1 - c e^t > 0``), but
    iterates far beyond the apex can no longer drive ``alpha`` downwards.
    The returned flow data keep the unclipped gradient in ``true_gradient``.
    """
    e = E_tot - P
    loc = local_energy_state(e[:, _SIG], e[:, _MU], P[:, _BETA], d, p)
    y = _yield_eval_quiet(DrivingForces(loc.s[:, _SIG], loc.s[:, _BETA], loc.s[:, _MU]), p)
    flow, hess = y.gradient, y.hessian
    clip = flow[:, _BETA] < 0.0
    if safeguard and np.any(clip):
        flow = flow.copy()
        flow[clip, _BETA] = 0.0
        hess = hess.copy()
        hess[clip, _BETA, :] = 0.0
    y = _FlowEval(y.value, flow, hess, y.saturated, y.gradient)
    r = P_n - P + gamma[:, None] * flow
    g = y.value - visc * gamma
    res = np.sqrt(np.einsum("ij,ij->i", r, r) + g**2)
    return loc, y, r, g, np.where(np.isfinite(res), res, np.inf)


def _scaled_merit(loc, r, g, p):
    """Deviatoric measure ``q`` and the merit ``|[q r, g]|`` used by Newton."""
    dev = T.invariants(loc.s[:, _SIG])[2]
    q = np.sqrt(np.einsum("ni,ni->n", dev, dev) + (p.M_phi * p.q1) ** 2)
    merit = np.sqrt(q**2 * np.einsum("ij,ij->i", r, r) + g**2)
    return dev, q, np.where(np.isfinite(merit), merit, np.inf)


def _condensed(E, hess, grad, gamma, visc):
    """``A = I + gamma H E``, ``X = E A^-1`` and ``C = n.X.n + eta/tau``."""
    A = np.eye(8) + gamma[:, None, None] * np.einsum("nij,njk->nik", hess, E)
    X = np.swapaxes(np.linalg.solve(np.swapaxes(A, 1, 2), E), 1, 2)
    X = 0.5 * (X + np.swapaxes(X, 1, 2))
    C = np.einsum("ni,nij,nj->n", grad, X, grad) + visc
    return A, X, C


def _newton(E_tot, P_n, d, P, gamma, visc, p, tol, max_iter):
    """Line-searched Newton iteration started from ``(P, gamma)``.

    Returns the updated ``P`` and ``gamma`` with per-point convergence
    flags, iteration counts and final residuals.
    """
    P = P.copy()
    gamma = gamma.copy()
    tol = np.broadcast_to(tol, gamma.shape)
    loc, y, r, g, res = _evaluate(E_tot, P_n, d, P, gamma, visc, p)
    E, hess, grad, true_grad = loc.E, y.hessian, y.gradient, y.true_gradient
    dev_all, q_all, merit = _scaled_merit(loc, r, g, p)
    s_all = loc.s
    # Non-monotone reference: the largest merit of the last few iterates.
    history = np.repeat(merit[:, None], NONMONOTONE_DEPTH, axis=1)
    iterations = np.zeros(len(gamma), dtype=int)
    active = np.flatnonzero(~(res < tol))

    for _ in range(max_iter):
        if active.size == 0:
            break
        Ea, ra, ga, na = E[active], r[active], g[active], grad[active]
        nf = true_grad[active]
        A = np.eye(8) + gamma[active, None, None] * np.einsum("nij,njk->nik", hess[active], Ea)
        # Newton on q * r instead of r: same roots, but the 1/q singularity
        # at the smoothed apex drops out.  The extra rank-one term vanishes
        # at convergence.
        dev, q = dev_all[active], q_all[active]
        dq_dP = -np.einsum("nij,ni->nj", Ea[:, _SIG, :], dev) / q[:, None]
        A = A - ra[:, :, None] * (dq_dP / q[:, None])[:, None, :]
        Ainv = _solve_many(A, np.stack([ra, na], axis=-1))
        Ainv_r, Ainv_n = Ainv[..., 0], Ainv[..., 1]
        nE = np.einsum("ni,nij->nj", nf, Ea)
        C = np.einsum("ni,ni->n", nE, Ainv_n) + visc
        # Where the friction-hardening exponential dominates, the yield row
        # is linearized in log form; plain Newton would only move t by one
        # unit per iteration there.
        g_eff = _log_yield_rhs(s_all[active], ga, p)
        dgamma = (g_eff - np.einsum("ni,ni->n", nE, Ainv_r)) / C
        dP = Ainv_r + dgamma[:, None] * Ainv_n
        iterations[active] += 1

        # Backtracking on the combined residual; full steps whenever they help.
        step = _kink_step(E_tot[active] - P[active], -dP)
        pending = np.arange(active.size)
        for attempt in range(LINE_SEARCH_MAX):
            idx = active[pending]
            P_try = P[idx] + step[pending, None] * dP[pending]
            g_try = gamma[idx] + step[pending] * dgamma[pending]
            lt, yt, rt, gt, rest = _evaluate(E_tot[idx], P_n[idx], d[idx], P_try,
                                             g_try, visc, p)
            dt, qt, mt = _scaled_merit(lt, rt, gt, p)
            ref = history[idx].max(axis=1)
            ok = (mt <= (1.0 - 1e-4 * step[pending]) * ref) | (rest < tol[idx])
            if attempt == LINE_SEARCH_MAX - 1:
                ok |= np.isfinite(rest)
            acc = idx[ok]
            P[acc], gamma[acc], res[acc] = P_try[ok], g_try[ok], rest[ok]
            r[acc], g[acc] = rt[ok], gt[ok]
            E[acc], hess[acc], grad[acc] = lt.E[ok], yt.hessian[ok], yt.gradient[ok]
            true_grad[acc] = yt.true_gradient[ok]
            dev_all[acc], q_all[acc], merit[acc] = dt[ok], qt[ok], mt[ok]
            s_all[acc] = lt.s[ok]
            pending = pending[~ok]
            if pending.size == 0:
                break
            step[pending] *= 0.5
        history[active] = np.roll(history[active], 1, axis=1)
        history[active, 0] = merit[active]
        active = active[~(res[active] < tol[active])]

    return P, gamma, res < tol, iterations, res


def _kink_values(eps_e):
    vals = T.eigen_decomposition(eps_e)[0]
    return np.concatenate([vals, T.trace(eps_e)[:, None]], axis=1)


def _kink_step(e0, de):
    """Step length that stops just past the first kink of the split energy.

    ``e0`` are the current elastic variables and ``de`` the Newton change.
    A kink is a sign change of the elastic trace or of a principal strain;
    the first one along the step is located by bisection.
    """
    step = np.ones(len(e0))
    v0 = _kink_values(e0[:, _SIG])
    # Components already sitting on a kink do not stop the step.
    watch = np.abs(v0) > 1e-8 * np.abs(v0).max(axis=1, keepdims=True)
    base = v0 >= 0.0
    full = _kink_values((e0 + de)[:, _SIG]) >= 0.0
    hit = np.flatnonzero(np.any((full != base) & watch, axis=1))
    if hit.size == 0:
        return step
    lo, hi = np.zeros(hit.size), np.ones(hit.size)
    for _ in range(KINK_BISECTIONS):
        mid = 0.5 * (lo + hi)
        pat = _kink_values((e0[hit] + mid[:, None] * de[hit])[:, _SIG]) >= 0.0
        same = np.all((pat == base[hit]) | ~watch[hit], axis=1)
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    step[hit] = np.where(hi > 1e-6, hi, 1.0)
    return step


def _solve_many(A, b):
    """Batched solve; singular systems get a zero step instead of raising."""
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        out = np.zeros_like(b)
        for k in range(len(A)):
            try:
                out[k] = np.linalg.solve(A[k], b[k])
            except np.linalg.LinAlgError:
                pass
        return out


def _exponential_parts(s, p):
    """Exponential and linear scales of the yield function at ``s``."""
    dev, q, t, ex, c, _, beta, _ = _yield_parts(s[:, _SIG], s[:, _MU], s[:, _BETA], p)
    linear = SQ32 * q + p.M_phi * np.abs(t) + np.abs(beta)
    return -beta * c * ex, linear


def _log_yield_rhs(s, g, p, ratio=10.0):
    """Right-hand side of the yield row, in log form where ``f`` is exponential.

    Newton on ``L log(1 + g/L)`` instead of ``g`` amounts to replacing ``g``
    by ``L log(1 + g/L) (1 + g/L)``; the root is the same.
    """
    expo, linear = _exponential_parts(s, p)
    dom = (g > 0.0) & (expo > ratio * linear)
    z = np.where(dom, g / np.where(dom, linear, 1.0), 0.0)
    return np.where(dom, linear * np.log1p(z) * (1.0 + z), g)


def _continuation(E_tot, P_n, d, visc, p, tol):
    """Reach the trial state through a ladder of scaled elastic predictors.

    The elastic trial ``E_tot - P_n`` is scaled by ``theta`` from its last
    elastic value up to 1, each stage warm-started from the previous one.
    The final stage solves the same equations as a direct Newton run.
    """
    n = len(d)
    delta = (E_tot - P_n)[:, :_BETA]

    def target(theta, rows):
        out = P_n[rows].copy()
        out[:, :_BETA] += theta[:, None] * delta[rows]
        return out

    # The stress-free state is elastic, so bisect for the last elastic theta.
    rows = np.arange(n)
    lo, hi = np.zeros(n), np.ones(n)
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        f = _evaluate(target(mid, rows), P_n, d, P_n, np.zeros(n), visc, p)[1].value
        lo = np.where(f < 0.0, mid, lo)
        hi = np.where(f < 0.0, hi, mid)

    theta = lo
    dtheta = 0.25 * (1.0 - lo)
    P, gamma = P_n.copy(), np.zeros(n)
    iterations = np.zeros(n, dtype=int)
    done = np.zeros(n, dtype=bool)
    for _ in range(CONTINUATION_STAGES):
        live = np.flatnonzero(~done & (dtheta > 1e-10))
        if live.size == 0:
            break
        th = np.minimum(theta[live] + dtheta[live], 1.0)
        final = th >= 1.0
        stage_tol = np.where(final, tol, max(tol, STAGE_TOL))
        P_new, g_new, ok, its, _ = _newton(
            target(th, live), P_n[live], d[live], P[live], gamma[live], visc, p,
            stage_tol, STAGE_ITER)
        iterations[live] += its
        good = live[ok]
        P[good], gamma[good], theta[good] = P_new[ok], g_new[ok], th[ok]
        done[live[ok & final]] = True
        dtheta[good] *= 2.0
        dtheta[live[~ok]] *= 0.25
        dtheta = np.minimum(dtheta, 1.0 - theta)
    return P, gamma, done, iterations


def return_map_batch(eps, m, d, eps_p_n, m_p_n, alpha_n, tau, p,
                     tol=TOL, max_iter=MAX_ITER, raise_on_failure=True):
    """Vectorized visco-plastic return map over ``N`` points.

    Parameters
    ----------
    eps : (N, 6) total strain (Mandel).
    m : (N,) total change of fluid content.
    d : (N,) phase field, frozen during the local solve.
    eps_p_n, m_p_n, alpha_n : plastic variables at ``t_n``.
    tau : time step.

    Points whose direct Newton iteration stalls are re-solved by scaling
    the elastic predictor up to the trial in stages; the converged state
    is the same, only the path differs.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    eps = np.atleast_2d(np.asarray(eps, dtype=float))
    N = eps.shape[0]
    m = np.broadcast_to(np.asarray(m, dtype=float), (N,)).copy()
    d = np.broadcast_to(np.asarray(d, dtype=float), (N,)).copy()
    P_n = _plastic_vector(np.broadcast_to(eps_p_n, (N, 6)),
                          np.broadcast_to(m_p_n, (N,)),
                          np.broadcast_to(alpha_n, (N,)))
    if not (np.all(np.isfinite(eps)) and np.all(np.isfinite(m))
            and np.all(np.isfinite(P_n))):
        raise NumericalError("non-finite input to the return map")
    E_tot = np.zeros((N, 8))
    E_tot[:, _SIG] = eps
    E_tot[:, _MU] = m
    visc = p.eta_p / tau

    P = P_n.copy()
    gamma = np.zeros(N)
    iterations = np.zeros(N, dtype=int)
    converged = np.ones(N, dtype=bool)

    f_trial = _evaluate(E_tot, P_n, d, P, gamma, visc, p)[1].value
    active = f_trial > 0.0
    direct = np.flatnonzero(active)
    retry = direct[:0]
    if direct.size:
        Pa, ga, ok, its, _ = _newton(E_tot[direct], P_n[direct], d[direct],
                                     P[direct], gamma[direct], visc, p, tol,
                                     min(DIRECT_ITER, max_iter))
        P[direct], gamma[direct], iterations[direct] = Pa, ga, its
        converged[direct] = ok
        retry = direct[~ok]
    if retry.size:
        Pr, gr, ok_r, its_r = _continuation(E_tot[retry], P_n[retry], d[retry],
                                            visc, p, tol)
        P[retry[ok_r]], gamma[retry[ok_r]] = Pr[ok_r], gr[ok_r]
        iterations[retry] += its_r
        converged[retry] = ok_r

    loc, y, _, _, residual = _evaluate(E_tot, P_n, d, P, gamma, visc, p,
                                       safeguard=False)
    residual = np.where(active, residual, 0.0)
    failed = ~converged
    if np.any(failed) and raise_on_failure:
        worst = int(np.flatnonzero(failed)[np.argmax(residual[failed])])
        raise ReturnMapError(
            f"return map did not converge ({failed.sum()} points, "
            f"residual {residual[worst]:.3e})",
            residual=float(residual[worst]), point=worst)

    s, grad = loc.s, y.gradient
    plastic = gamma > 0.0
    tangent = loc.E[:, :7, :7].copy()
    if np.any(plastic):
        _, X, C = _condensed(loc.E[plastic], y.hessian[plastic], grad[plastic],
                             gamma[plastic], visc)
        Xn = np.einsum("nij,nj->ni", X, grad[plastic])
        Eep = X - Xn[:, :, None] * Xn[:, None, :] / C[:, None, None]
        tangent[plastic] = 0.5 * (Eep + np.swapaxes(Eep, 1, 2))[:, :7, :7]

    # End-of-step undamaged total stress for the plastic work.
    mu = s[:, _MU]
    sigma0 = loc.sigma0_eff - (p.b * p.rho_f * mu)[:, None] * T.IDENTITY
    dP = P - P_n
    work = np.einsum("ni,ni->n", sigma0, dP[:, _SIG]) + mu * dP[:, _MU]

    return ReturnMapResult(
        eps_p=P[:, _SIG], m_p=P[:, _MU], alpha=P[:, _BETA], gamma_v=gamma,
        sigma=s[:, _SIG], dpsi_dm=mu, beta=s[:, _BETA], tangent_ep=tangent,
        yield_value=y.value, plastic_work_increment=np.where(plastic, work, 0.0),
        psi_eff0_plus=loc.psi_plus, psi_plast0=psi_plast0(P[:, _BETA], p),
        converged=converged, iterations=iterations, residual=residual)


def _yield_eval_quiet(F, p):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return yield_function(F, p)


def return_map(trial, d, tau, p, tol=TOL, max_iter=MAX_ITER):
    """Return map for a single :class:`~porofrac.material.PointState`.

    The trial state supplies the total strain and fluid content and the
    time-n plastic variables; the result is unbatched.
    """
    res = return_map_batch(trial.eps[None], trial.m, d, trial.eps_p_n,
                           trial.m_p_n, trial.alpha_n, tau, p, tol=tol,
                           max_iter=max_iter)
    out = {}
    for name, value in vars(res).items():
        out[name] = value[0]
    return ReturnMapResult(**out)


def plastic_work_increment(F, d_eps_p, d_m_p, sigma0=None):
    """Plastic work ``sigma0 : d_eps_p + mu d_m_p`` of one step.

    ``sigma0`` is the undamaged total stress; when omitted the stress in
    ``F`` is used.
    """
    sig = F.sigma if sigma0 is None else sigma0
    return T.ddot(sig, d_eps_p) + np.asarray(F.mu) * np.asarray(d_m_p)
