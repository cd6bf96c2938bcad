import numpy as np
import pytest
from _trials import CASES, fd_tangent, smooth_plastic_states, trial_states
from hypothesis import given, settings
from hypothesis import strategies as st

from porofrac import plasticity as pl
from porofrac import tensors as T
from porofrac.errors import NumericalError
from porofrac.material import DrivingForces, MaterialParams, PointState

P1 = MaterialParams.footing()


@pytest.mark.parametrize("name, p, tau", CASES, ids=[c[0] for c in CASES])
def test_algorithmic_tangent_matches_finite_differences(name, p, tau):
    args, r, idx = smooth_plastic_states(p, tau, 60, seed=11)
    fd = fd_tangent(p, tau, *args)
    E = r.tangent_ep[idx]
    err = np.linalg.norm(fd - E, axis=(1, 2)) / np.linalg.norm(E, axis=(1, 2))
    assert err.max() < 1e-4


def test_elastic_trial_is_left_unchanged():
    eps = np.array([[1e-6, -2e-6, 0.0, 1e-7, 0.0, 0.0]])
    r = pl.return_map_batch(eps, 0.0, 0.0, np.zeros(6), 0.0, 0.0, 1.0, P1)
    assert not r.plastic[0]
    assert r.iterations[0] == 0
    np.testing.assert_array_equal(r.eps_p, 0.0)
    loc = pl.local_energy_state(eps, np.zeros(1), np.zeros(1), np.zeros(1), P1)
    np.testing.assert_allclose(r.tangent_ep, loc.E[:, :7, :7])
    assert r.plastic_work_increment[0] == 0.0


@pytest.mark.parametrize("name, p, tau", CASES, ids=[c[0] for c in CASES])
def test_converged_states_satisfy_the_viscous_consistency_condition(name, p, tau):
    rng = np.random.default_rng(3)
    args = trial_states(p, 300, rng)
    r = pl.return_map_batch(*args, tau, p)
    assert np.all(r.converged)
    pm = r.plastic
    visc = p.eta_p / tau
    np.testing.assert_allclose(r.yield_value[pm], visc * r.gamma_v[pm],
                               atol=1e-9 * max(1.0, np.abs(r.yield_value).max()))
    assert np.all(r.yield_value[~pm] <= 0.0)


@pytest.mark.parametrize("name, p, tau", CASES, ids=[c[0] for c in CASES])
def test_plastic_fluid_follows_volumetric_plastic_strain(name, p, tau):
    rng = np.random.default_rng(4)
    eps, m, d, eps_p_n, m_p_n, alpha_n = trial_states(p, 400, rng)
    r = pl.return_map_batch(eps, m, d, eps_p_n, m_p_n, alpha_n, tau, p)
    dm_p = r.m_p - m_p_n
    expected = p.rho_f * p.b * T.trace(r.eps_p - eps_p_n)
    assert np.max(np.abs(dm_p - expected)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from(range(len(CASES))))
def test_dissipation_and_hardening_are_non_negative(seed, case):
    _, p, tau = CASES[case]
    eps, m, d, eps_p_n, m_p_n, alpha_n = trial_states(p, 50, np.random.default_rng(seed))
    r = pl.return_map_batch(eps, m, d, eps_p_n, m_p_n, alpha_n, tau, p)
    assert np.all(r.alpha >= alpha_n)
    D = (np.einsum("ni,ni->n", r.sigma, r.eps_p - eps_p_n)
         + r.dpsi_dm * (r.m_p - m_p_n) + r.beta * (r.alpha - alpha_n))
    assert np.all(D >= -1e-14)


def test_single_point_api_matches_batch():
    rng = np.random.default_rng(5)
    eps, m, d, eps_p_n, m_p_n, alpha_n = trial_states(P1, 20, rng)
    batch = pl.return_map_batch(eps, m, d, eps_p_n, m_p_n, alpha_n, 1.0, P1)
    i = int(np.flatnonzero(batch.plastic)[0])
    trial = PointState(eps=eps[i], m=m[i], eps_p_n=eps_p_n[i], m_p_n=m_p_n[i],
                       alpha_n=alpha_n[i])
    one = pl.return_map(trial, d[i], 1.0, P1)
    np.testing.assert_allclose(one.eps_p, batch.eps_p[i], rtol=1e-12, atol=1e-18)
    assert one.alpha == pytest.approx(batch.alpha[i])


def test_yield_derivatives_match_finite_differences():
    rng = np.random.default_rng(6)
    s = np.concatenate([rng.normal(scale=1.0, size=6), [1e-3], [-0.05]])
    p = P1

    def F(v):
        return DrivingForces(v[:6], v[7], v[6])

    y = pl.yield_function(F(s), p)
    h = 1e-6
    grad = np.zeros(8)
    hess = np.zeros((8, 8))
    for k in range(8):
        e = np.zeros(8)
        e[k] = h
        up, dn = pl.yield_function(F(s + e), p), pl.yield_function(F(s - e), p)
        grad[k] = (up.value - dn.value) / (2 * h)
        hess[:, k] = (up.gradient - dn.gradient) / (2 * h)
    np.testing.assert_allclose(y.gradient, grad, rtol=1e-6, atol=1e-8)
    np.testing.assert_allclose(y.hessian, hess, rtol=1e-5, atol=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.floats(-10.0, 10.0))
def test_yield_in_effective_stress_ignores_pore_potential(mu):
    sig_eff = T.sym_tensor(-1.0, -0.5, -0.7, 0.2)
    base = pl.yield_from_effective(sig_eff, -0.01, 0.0, P1)
    assert pl.yield_from_effective(sig_eff, -0.01, mu, P1) == pytest.approx(base, rel=1e-10)


def test_apex_point_has_finite_flow():
    # Pure hydrostatic tension beyond the apex: q reduces to its smoothing value.
    eps = np.array([[5e-5, 5e-5, 5e-5, 0.0, 0.0, 0.0]])
    r = pl.return_map_batch(eps, 0.0, 0.0, np.zeros(6), 0.0, 0.0, 1.0, P1)
    assert r.plastic[0] and r.converged[0]
    assert np.all(np.isfinite(r.tangent_ep))


def test_plastic_work_formula():
    F = DrivingForces(T.sym_tensor(1.0, 2.0), np.array(-0.1), np.array(0.5))
    w = pl.plastic_work_increment(F, T.sym_tensor(0.1, 0.2), 0.3)
    assert w == pytest.approx(1.0 * 0.1 + 2.0 * 0.2 + 0.5 * 0.3)


def test_non_finite_input_raises():
    with pytest.raises(NumericalError):
        pl.return_map_batch(np.full((1, 6), np.nan), 0.0, 0.0, np.zeros(6), 0.0, 0.0, 1.0, P1)


def test_bad_time_step_raises():
    with pytest.raises(ValueError):
        pl.return_map_batch(np.zeros((1, 6)), 0.0, 0.0, np.zeros(6), 0.0, 0.0, 0.0, P1)
