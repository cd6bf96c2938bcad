"""Random local trial states shared by the return-map tests."""

import numpy as np

from porofrac import plasticity as pl
from porofrac import tensors as T
from porofrac.material import MaterialParams

CASES = (("footing", MaterialParams.footing(), 1.0),
         ("hydraulic", MaterialParams.hydraulic(), 1e-3))


def trial_states(p, n, rng):
    """Strains of a few times the apex strain, prior plastic history and damage.

    Plastic fluid content is consistent with a volumetric plastic history.
    """
    scale = 5 * p.s_max / (p.lam + 2 * p.G)
    eps = np.zeros((n, 6))
    eps[:, [0, 1, 3]] = rng.normal(scale=scale, size=(n, 3))
    eps_p_n = np.zeros((n, 6))
    eps_p_n[:, [0, 1, 3]] = rng.normal(scale=0.2 * scale, size=(n, 3))
    m = rng.normal(scale=p.rho_f * scale, size=n)
    alpha_n = rng.exponential(scale=10 * scale, size=n)
    m_p_n = p.rho_f * p.b * T.trace(eps_p_n)
    d = rng.uniform(0.0, 0.95, n)
    return eps, m, d, eps_p_n, m_p_n, alpha_n


def fd_tangent(p, tau, eps, m, d, eps_p_n, m_p_n, alpha_n, rel=1e-7, tol=1e-14):
    """Central differences of ``[sigma, mu]`` over ``[eps, m]`` through the return map."""
    X = np.concatenate([eps, m[:, None]], axis=1)
    h = rel * np.abs(X).max(axis=1)
    n = len(X)
    shifted = []
    for k in range(7):
        for sign in (1.0, -1.0):
            Y = X.copy()
            Y[:, k] += sign * h
            shifted.append(Y)
    Y = np.concatenate(shifted)

    def rep(a):
        return np.tile(a, (14,) + (1,) * (a.ndim - 1))

    r = pl.return_map_batch(Y[:, :6], Y[:, 6], rep(d), rep(eps_p_n), rep(m_p_n),
                            rep(alpha_n), tau, p, tol=tol)
    S = np.concatenate([r.sigma, r.dpsi_dm[:, None]], axis=1).reshape(7, 2, n, 7)
    return ((S[:, 0] - S[:, 1]) / (2 * h[None, :, None])).transpose(1, 2, 0)


def smooth_plastic_states(p, tau, n, seed, rel=1e-7):
    """Plastic states whose elastic strain stays clear of the split kinks."""
    rng = np.random.default_rng(seed)
    args = trial_states(p, 10 * n, rng)
    eps, m = args[0], args[1]
    r = pl.return_map_batch(*args, tau, p, tol=1e-14)
    ee = eps - r.eps_p
    vals = T.eigen_decomposition(ee)[0]
    gap = np.min(np.abs(np.column_stack([vals, T.trace(ee)])), axis=1)
    h = rel * np.abs(np.column_stack([eps, m])).max(axis=1)
    idx = np.flatnonzero(r.plastic & (gap > 100 * h))[:n]
    assert len(idx) == n
    return [a[idx] for a in args], r, idx
