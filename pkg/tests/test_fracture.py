import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from porofrac import fracture as fr
from porofrac.material import MaterialParams

PW = MaterialParams.hydraulic(driving_force_mode="PlasticWork")
HE = MaterialParams.hydraulic(driving_force_mode="HardeningEnergy")

energy = st.floats(0.0, 1e-5, allow_subnormal=False)


def test_degradation_and_derivatives():
    g, g1, g2 = fr.degradation(np.array([0.0, 0.5, 1.0]))
    np.testing.assert_allclose(g, [1.0, 0.25, 0.0])
    np.testing.assert_allclose(g1, [-2.0, -1.0, 0.0])
    np.testing.assert_allclose(g2, 2.0)


def test_crack_density_of_sharp_profile():
    # d = exp(-|x|/l) integrates to one crack surface.
    l = 0.5
    x = np.linspace(-20 * l, 20 * l, 400_001)
    d = np.exp(-np.abs(x) / l)
    grad = np.gradient(d, x)[:, None]
    gamma = fr.crack_density(d, grad, l)
    assert np.trapezoid(gamma, x) == pytest.approx(1.0, rel=1e-4)


@pytest.mark.parametrize("p, extra", [(PW, 3e-8), (HE, 1e-8)])
def test_mode_selects_plastic_contribution(p, extra):
    value = fr.crack_driving_energy(5e-8, 1e-8, 3e-8, p)
    assert value == pytest.approx(extra)


def test_threshold_clips_small_energies():
    assert fr.crack_driving_energy(1e-8, 0.0, 1e-8, PW) == 0.0


@settings(max_examples=200, deadline=None)
@given(energy, energy, energy, energy)
def test_history_never_decreases(H_old, psi, psi_p, w):
    for p in (PW, HE):
        H = fr.update_history(H_old, psi, psi_p, w, p)
        assert H >= H_old
        assert H >= fr.crack_driving_energy(psi, psi_p, w, p)


@settings(max_examples=200, deadline=None)
@given(energy, st.floats(1e-9, 1e-5))
def test_homogeneous_solution_solves_pointwise_equation(H, psi_c):
    p = PW.replace(psi_c=psi_c)
    d = fr.homogeneous_solution(H, psi_c)
    assert 0.0 <= d < 1.0
    k = fr.phase_field_kernel(d, np.zeros(2), H, p)
    assert abs(k.r_d) <= 1e-12 * (H + psi_c)


def test_kernel_is_linear_in_d():
    H, d, h = 2e-7, 0.3, 1e-4
    grad = np.array([0.2, -0.1])
    k = fr.phase_field_kernel(d, grad, H, PW)
    up = fr.phase_field_kernel(d + h, grad, H, PW)
    assert (up.r_d - k.r_d) / h == pytest.approx(k.k_dd, rel=1e-9)
    np.testing.assert_allclose(k.r_grad, k.k_grad * grad)
