"""Constitutive energies, thermodynamic driving forces and permeability.

Units are MN, m, s and kg throughout, so stresses and energy densities are
in MN/m^2.  The permeability tensor is returned in SI (kg s/m^3) because
it is built from SI inputs (m^3 s/kg, N s/m^2); the flux dissipation
converts it with :data:`ENERGY_SCALE`.
"""

import enum
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import tensors as T
from .errors import ConfigError
from .fracture import degradation

#: Converts SI energy densities (J/m^3) to MN/m^2.
ENERGY_SCALE = 1e-6
#: Below this gradient magnitude (1/m) the crack normal is undefined.
GRAD_FLOOR = 1e-8
#: Bulk permeability fraction is kept above this so K stays invertible.
BULK_FRACTION_FLOOR = 1e-8


class DrivingForceMode(str, enum.Enum):
    """Which plastic contribution enters the crack driving history field."""

    HARDENING_ENERGY = "HardeningEnergy"
    PLASTIC_WORK = "PlasticWork"


@dataclass(frozen=True)
class MaterialParams:
    """All constitutive constants plus the driving-force selector.

    Stress-like quantities are in MN/m^2.  ``K`` is the spatial
    permeability in m^3 s/kg, ``eta_f`` the fluid viscosity in N s/m^2.
    """

    lam: float = 1.8e5
    G: float = 3.1e4
    h: float = 0.035
    sigma_y: float = 0.1
    omega: float = 2.0
    eta_p: float = 5e-6
    q1: float = 0.04
    M_phi: float = 0.6
    s_max: float = 4.0
    M: float = 2.5e4
    b: float = 0.5
    eta_f: float = 1e-3
    K: float = 9.8e-12
    rho_f: float = 1000.0
    psi_c: float = 0.0
    l: float = 0.5
    k: float = 0.0
    eps_interp: float = 50.0
    driving_force_mode: DrivingForceMode = DrivingForceMode.PLASTIC_WORK

    def __post_init__(self):
        mode = self.driving_force_mode
        if not isinstance(mode, DrivingForceMode):
            try:
                object.__setattr__(self, "driving_force_mode", DrivingForceMode(mode))
            except ValueError:
                raise ConfigError(f"unknown driving_force_mode {mode!r}") from None
        for f in fields(self):
            if f.name == "driving_force_mode":
                continue
            value = float(getattr(self, f.name))
            if not np.isfinite(value):
                raise ConfigError(f"{f.name} must be finite")
            object.__setattr__(self, f.name, value)
        if self.G < 0.0:
            raise ConfigError("G must be >= 0")
        if self.lam < -2.0 / 3.0 * self.G:
            raise ConfigError("lambda must be >= -(2/3) G")
        for name in ("rho_f", "eta_f", "K", "l", "eta_p"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be > 0")
        # M = 0 with b = 0 is the drained limit.
        for name in ("M", "h", "sigma_y", "omega", "q1", "psi_c", "k", "M_phi"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"{name} must be >= 0")
        if not 0.0 <= self.b <= 1.0:
            raise ConfigError("b must lie in [0, 1]")

    def replace(self, **changes):
        return replace(self, **changes)

    @classmethod
    def footing(cls, **changes):
        """Rigid-footing parameter set."""
        return cls(**changes)

    @classmethod
    def hydraulic(cls, **changes):
        """Hydraulic-fracture parameter set."""
        base = dict(h=5.0, q1=2e-5, M_phi=1.8, s_max=2e-3, psi_c=5e-8,
                    l=0.5, k=1e-5, eps_interp=50.0)
        base.update(changes)
        return cls(**base)


@dataclass
class PointState:
    """Constitutive state at one quadrature point.

    ``m`` is the total change of fluid content; its elastic part is
    ``m - m_p`` and never stored.  The ``*_n`` fields hold the last accepted
    time step.
    """

    eps: np.ndarray = field(default_factory=lambda: np.zeros(6))
    m: float = 0.0
    d: float = 0.0
    grad_d: np.ndarray = field(default_factory=lambda: np.zeros(3))
    eps_p: np.ndarray = field(default_factory=lambda: np.zeros(6))
    alpha: float = 0.0
    m_p: float = 0.0
    history_H: float = 0.0
    w_plast: float = 0.0
    eps_p_n: np.ndarray = field(default_factory=lambda: np.zeros(6))
    alpha_n: float = 0.0
    m_p_n: float = 0.0
    history_H_n: float = 0.0
    w_plast_n: float = 0.0

    @property
    def eps_e(self):
        return np.asarray(self.eps) - np.asarray(self.eps_p)

    @property
    def m_e(self):
        return self.m - self.m_p

    def commit(self):
        """Copy the current internal variables into the time-n slots."""
        self.eps_p_n = np.array(self.eps_p, dtype=float)
        self.alpha_n = self.alpha
        self.m_p_n = self.m_p
        self.history_H_n = self.history_H
        self.w_plast_n = self.w_plast


@dataclass(frozen=True)
class DrivingForces:
    """Thermodynamic duals of plastic strain, hardening and plastic fluid."""

    sigma: np.ndarray
    beta: np.ndarray
    mu: np.ndarray


def _saturation(alpha, omega):
    # alpha + (exp(-omega alpha) - 1)/omega, with the omega -> 0 limit 0
    alpha = np.asarray(alpha, dtype=float)
    if omega == 0.0:
        return np.zeros_like(alpha)
    return alpha + np.expm1(-omega * alpha) / omega


def psi_plast0(alpha, p):
    """Undamaged hardening energy with saturation."""
    alpha = np.asarray(alpha, dtype=float)
    return 0.5 * p.h * alpha**2 + p.sigma_y * _saturation(alpha, p.omega)


def psi_plast(alpha, d, p):
    """Degraded hardening energy ``[g(d)+k] psi_plast0(alpha)``."""
    g = degradation(d)[0]
    return (g + p.k) * psi_plast0(alpha, p)


def hardening_beta0(alpha, p):
    """Undamaged derivative of the hardening energy."""
    alpha = np.asarray(alpha, dtype=float)
    sat = -np.expm1(-p.omega * alpha) if p.omega != 0.0 else np.zeros_like(alpha)
    return p.h * alpha + p.sigma_y * sat


def hardening_beta(alpha, d, p):
    """Hardening function ``d psi_plast / d alpha`` (non-negative)."""
    g = degradation(d)[0]
    return (g + p.k) * hardening_beta0(alpha, p)


def hardening_modulus(alpha, d, p):
    """Second derivative ``d^2 psi_plast / d alpha^2``."""
    g = degradation(d)[0]
    alpha = np.asarray(alpha, dtype=float)
    return (g + p.k) * (p.h + p.sigma_y * p.omega * np.exp(-p.omega * alpha))


def _fluid_bracket(eps_e, m_e, p):
    return p.b * T.trace(np.asarray(eps_e, dtype=float)) - np.asarray(m_e) / p.rho_f


def psi_fluid(eps_e, m_e, p):
    """Biot fluid energy ``M/2 [b tr eps_e - m_e/rho_f]^2``."""
    return 0.5 * p.M * _fluid_bracket(eps_e, m_e, p) ** 2


def fluid_pressure(eps_e, m_e, p):
    """Pore pressure ``p = -M [b tr eps_e - m_e/rho_f]`` in MN/m^2."""
    return -p.M * _fluid_bracket(eps_e, m_e, p)


def elastic_energy(eps_e, d, p):
    """Degraded effective elastic energy and the undamaged tensile part."""
    split = T.split_energy_and_stress(eps_e, p.lam, p.G)
    g = degradation(d)[0]
    return (g + p.k) * split.psi_plus + split.psi_minus, split


def total_energy(state, p):
    """Stored energy density at a :class:`PointState`."""
    eps_e = state.eps_e
    psi_eff, _ = elastic_energy(eps_e, state.d, p)
    return (psi_eff + psi_plast(state.alpha, state.d, p)
            + psi_fluid(eps_e, state.m_e, p))


def driving_forces(state, p):
    """Driving forces ``{sigma, beta, mu}`` as duals of the plastic variables.

    ``sigma = sigma_eff - b rho_f mu 1``, ``beta = -d psi/d alpha`` and
    ``mu = -d psi / d m_p = p/rho_f``.
    """
    eps_e = state.eps_e
    _, split = elastic_energy(eps_e, state.d, p)
    g = degradation(state.d)[0]
    sigma_eff = (g + p.k) * split.sigma_plus + split.sigma_minus
    mu = fluid_pressure(eps_e, state.m_e, p) / p.rho_f
    sigma = sigma_eff - p.b * p.rho_f * mu * T.IDENTITY
    beta = -hardening_beta(state.alpha, state.d, p)
    return DrivingForces(sigma, np.asarray(beta), np.asarray(mu))


def effective_stress(eps_e, d, p):
    """Degraded effective stress acting on the solid skeleton."""
    split = T.split_energy_and_stress(eps_e, p.lam, p.G)
    g = degradation(d)[0]
    return (np.asarray(g + p.k)[..., None] * split.sigma_plus + split.sigma_minus)


def crack_normal(grad_d):
    """Unit crack normal and a mask where it is defined."""
    grad_d = np.asarray(grad_d, dtype=float)
    norm = np.linalg.norm(grad_d, axis=-1)
    ok = norm > GRAD_FLOOR
    n = grad_d / np.where(ok, norm, 1.0)[..., None]
    return np.where(ok[..., None], n, 0.0), ok


def fracture_opening(eps, grad_d, L_perp):
    """Crack opening ``w = <n . eps . n>_+ L_perp`` (0 where n is undefined)."""
    n, ok = crack_normal(grad_d)
    eps_nn = np.einsum("...i,...ij,...j->...", n, T.from_mandel(eps), n)
    return np.where(ok, T.ramp_plus(eps_nn) * L_perp, 0.0)


def permeability(eps, d, grad_d, L_perp, p):
    """Permeability tensor (3x3, SI kg s/m^3) blending bulk Darcy and crack flow."""
    d = np.clip(np.asarray(d, dtype=float), 0.0, 1.0)
    f = d**p.eps_interp
    n, ok = crack_normal(grad_d)
    w = fracture_opening(eps, grad_d, L_perp)
    k_bulk = (1.0 - f) * p.rho_f**2 * p.K
    k_crack = np.where(ok, f * p.rho_f**2 * w**2 / (12.0 * p.eta_f), 0.0)
    eye = np.eye(3)
    tang = eye - n[..., :, None] * n[..., None, :]
    return (k_bulk[..., None, None] * eye + k_crack[..., None, None] * tang)


def inverse_permeability_2d(eps, d, grad_d, L_perp, p):
    """In-plane inverse permeability, closed form for ``a I + c (I - n n)``.

    The bulk fraction ``1 - d^eps`` is floored at :data:`BULK_FRACTION_FLOOR`
    so the tensor stays invertible on fully broken points.
    """
    d = np.clip(np.asarray(d, dtype=float), 0.0, 1.0)
    f = d**p.eps_interp
    n, ok = crack_normal(grad_d)
    w = fracture_opening(eps, grad_d, L_perp)
    a = np.maximum(1.0 - f, BULK_FRACTION_FLOOR) * p.rho_f**2 * p.K
    c = np.where(ok, f * p.rho_f**2 * w**2 / (12.0 * p.eta_f), 0.0)
    n2 = n[..., :2]
    nn = n2[..., :, None] * n2[..., None, :]
    eye = np.eye(2)
    return (nn / a[..., None, None]
            + (eye - nn) / (a + c)[..., None, None])
