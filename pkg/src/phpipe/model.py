"""Lumped two-phase model of a liquid plug driven by a heated vapor volume.

The vapor space is an ideal gas that exchanges mass and heat with a thin
liquid film lining the tube; the film exchanges heat with the wall; the plug
is a rigid liquid column accelerated by the pressure difference across it
against wall shear and gravity.  Temperatures are stored in degrees Celsius
throughout and converted to Kelvin only inside the gas law and the
interfacial flux law.

State vector ordering is fixed as (T_v, tau, m_v, x_p, v_p):
vapor temperature, film temperature, vapor mass, plug position, plug
velocity.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, fields, replace as _dc_replace

import numpy as np
from numba import njit

from .errors import DomainError

KELVIN_OFFSET = 273.15
# Upper Reynolds number of the laminar friction branch; the laminar value
# 16/Re applies at the limit itself.
LAMINAR_RE_LIMIT = 1180.0
# Friction coefficient used for the startup coefficient group when the plug
# is at rest and no Reynolds number exists.
STATIC_FRICTION_FACTOR = 0.01

STATE_FIELDS = ("T_v", "tau", "m_v", "x_p", "v_p")

# Fields whose defaults are engineering assumptions chosen for this package
# rather than tabulated measurements; reported in run metadata so downstream
# users can see which numbers to question first.
ASSUMED_DEFAULTS = ("sigma", "sigma0", "h_lfv", "mu_l", "L_p", "p_l", "r_v")


@dataclass(frozen=True)
class PhysicalParams:
    """Geometric, fluid and thermal constants of the plug/vapor system.

    All temperatures are degrees Celsius, pressures Pa, lengths m.
    Instances are immutable; use :meth:`replace` to derive variants.
    """

    L: float = 0.18            # mean liquid plug length (m)
    d_i: float = 3.3e-3        # inner tube diameter (m)
    delta: float = 2.5e-5      # liquid film thickness (m)
    sigma: float = 0.0728      # surface tension (N/m)
    sigma0: float = 1.0        # accommodation coefficient (-)
    g: float = 9.8             # gravitational acceleration (m/s^2)
    rho_l: float = 1000.0      # liquid density (kg/m^3)
    rho_v: float = 1.0         # vapor density (kg/m^3)
    h_lfv: float = 100.0       # film-to-vapor heat transfer coefficient (W/m^2 K)
    h_lfw: float = 1000.0      # film-to-wall heat transfer coefficient (W/m^2 K)
    h_v: float = 10.0          # latent heat carried per unit interfacial flux (J m/kg, lumped)
    c_vv: float = 1800.0       # vapor specific heat at constant volume (J/kg K)
    c_vl: float = 1900.0       # liquid specific heat (J/kg K)
    R: float = 8.31            # gas constant appearing in the flux law (J/mol K)
    R_v: float = 461.0         # specific gas constant of the vapor (J/kg K)
    mu_l: float = 1.0e-3       # liquid dynamic viscosity (Pa s)
    L_v: float = 0.02          # vapor bubble length (m)
    L_0: float = 0.0825        # reference liquid column length, about 25 d_i (m)
    L_p: float = 0.18          # plug length wetted by wall shear (m)
    T_w: float = 40.0          # wall temperature (degC)
    T_v0: float = 20.0         # initial vapor and film temperature (degC)
    p_v0: float = 1.0e5        # initial vapor pressure, seeds the vapor mass (Pa)
    p_l: float = 5.5816e4      # liquid-side pressure in the flux law (Pa)
    r_v: float = 0.0           # condensation flux applied when the wall is not hotter (kg/m^2 s)
    m_f0_ratio: float = 0.1    # film mass as a fraction of initial vapor mass (-)

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(float(v)):
                raise DomainError(f"parameter {f.name} must be finite, got {v!r}")
            object.__setattr__(self, f.name, float(v))
        positive = ("L", "d_i", "delta", "sigma", "g", "rho_l", "rho_v",
                    "h_lfv", "h_lfw", "h_v", "c_vv", "c_vl", "R", "R_v",
                    "mu_l", "L_0", "p_v0", "p_l", "m_f0_ratio")
        for name in positive:
            if getattr(self, name) <= 0.0:
                raise DomainError(f"parameter {name} must be positive, got {getattr(self, name)}")
        if self.L_v < 0.0 or self.L_p < 0.0 or self.r_v < 0.0:
            raise DomainError("L_v, L_p and r_v must be non-negative")
        if not 0.0 < self.sigma0 < 2.0:
            raise DomainError(f"sigma0 must lie in (0, 2), got {self.sigma0}")
        if self.d_i <= 2.0 * self.delta:
            raise DomainError(
                f"film thickness {self.delta} leaves no vapor core in diameter {self.d_i}")
        if self.rho_l <= self.rho_v:
            raise DomainError("liquid density must exceed vapor density")
        if self.T_v0 <= -KELVIN_OFFSET or self.T_w <= -KELVIN_OFFSET:
            raise DomainError("temperatures must exceed absolute zero")

    # -- derived geometry and masses ------------------------------------

    @property
    def core_diameter(self) -> float:
        """Vapor core diameter inside the liquid film (m)."""
        return self.d_i - 2.0 * self.delta

    @property
    def cross_section(self) -> float:
        """Open tube cross-sectional area (m^2)."""
        return math.pi * self.d_i ** 2 / 4.0

    def vapor_volume(self) -> float:
        """Vapor space volume used by the gas law (m^3)."""
        return self.cross_section * (self.L + self.L_v)

    def initial_vapor_mass(self) -> float:
        """Vapor mass implied by p_v0 and T_v0 through the gas law (kg)."""
        return self.p_v0 * self.vapor_volume() / (self.R_v * (self.T_v0 + KELVIN_OFFSET))

    def film_mass(self) -> float:
        """Liquid film mass, fixed over a run (kg)."""
        return self.m_f0_ratio * self.initial_vapor_mass()

    def initial_state(self) -> "State":
        """Rest state: film at vapor temperature, plug at the origin."""
        return State(T_v=self.T_v0, tau=self.T_v0,
                     m_v=self.initial_vapor_mass(), x_p=0.0, v_p=0.0)

    def replace(self, **changes) -> "PhysicalParams":
        return _dc_replace(self, **changes)


@dataclass(frozen=True)
class State:
    """Instantaneous model state."""

    T_v: float   # vapor temperature (degC)
    tau: float   # film temperature (degC)
    m_v: float   # vapor mass (kg)
    x_p: float   # plug displacement from rest (m)
    v_p: float   # plug velocity (m/s)

    def as_array(self) -> np.ndarray:
        return np.array([self.T_v, self.tau, self.m_v, self.x_p, self.v_p], dtype=float)

    @classmethod
    def from_array(cls, y) -> "State":
        y = np.asarray(y, dtype=float)
        if y.shape != (5,):
            raise DomainError(f"state array must have shape (5,), got {y.shape}")
        return cls(*(float(v) for v in y))

    def pressure(self, params: PhysicalParams) -> float:
        """Instantaneous vapor pressure from the gas law (Pa)."""
        return vapor_pressure(self.m_v, self.T_v, params.vapor_volume(), params.R_v)

    def validate(self, params: PhysicalParams) -> None:
        """Raise DomainError if the state is outside the model domain."""
        for name in STATE_FIELDS:
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"state component {name} is not finite")
        if self.T_v <= -KELVIN_OFFSET or self.tau <= -KELVIN_OFFSET:
            raise DomainError("state temperature at or below absolute zero")
        if self.m_v <= 0.0:
            raise DomainError("vapor mass must be positive")
        if self.x_p >= params.L_0:
            raise DomainError("plug displacement has consumed the liquid column")


@dataclass(frozen=True)
class Derivative:
    """Time derivatives of the state components."""

    dT_v: float
    dtau: float
    dm_v: float
    dx_p: float
    dv_p: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dT_v, self.dtau, self.dm_v, self.dx_p, self.dv_p], dtype=float)


@dataclass(frozen=True)
class DimensionlessCoeffs:
    """Startup coefficient group evaluated at one state.

    ``beta`` keeps its printed composite form (pressure force plus the bare
    gravitational acceleration), so ``A = beta / beta1`` is the effective
    startup acceleration only in that convention.  ``Q1``/``Q2`` feed the
    exponential film temperature approximation and ``A``/``B`` the
    log-cosh plug position approximation.
    """

    a: float
    alpha1: float
    alpha2: float
    alpha3: float
    b: float
    eps: float
    Delta: float     # relative vapor mass depletion rate (1/s)
    beta: float
    gamma: float
    beta1: float
    beta2: float
    A: float
    B: float
    Q1: float
    Q2: float


# ---------------------------------------------------------------------------
# scalar operations
# ---------------------------------------------------------------------------

def critical_diameter(sigma: float, g: float, rho_l: float, rho_v: float) -> float:
    """Largest tube diameter at which capillarity still dominates buoyancy.

    Args:
        sigma: surface tension (N/m).
        g: gravitational acceleration (m/s^2).
        rho_l, rho_v: liquid and vapor densities (kg/m^3); rho_l > rho_v.

    Returns:
        Critical inner diameter (m).
    """
    if not all(math.isfinite(v) for v in (sigma, g, rho_l, rho_v)):
        raise DomainError("critical_diameter requires finite inputs")
    if sigma <= 0.0 or g <= 0.0:
        raise DomainError("sigma and g must be positive")
    if rho_l <= rho_v:
        raise DomainError("rho_l must exceed rho_v")
    return 2.0 * math.sqrt(sigma / (g * (rho_l - rho_v)))


def interfacial_mass_flux(p_v: float, T_v: float, p_l: float, tau: float,
                          sigma0: float, R: float) -> float:
    """Net evaporation mass flux across the film/vapor interface.

    Positive when the vapor side drives evaporation.  Temperatures are in
    degrees Celsius and converted to Kelvin internally.

    Args:
        p_v: vapor pressure (Pa).
        T_v: vapor temperature (degC).
        p_l: liquid-side pressure (Pa).
        tau: film temperature (degC).
        sigma0: accommodation coefficient, in (0, 2).
        R: gas constant of the flux law.

    Returns:
        Mass flux (kg/m^2 s).
    """
    if not all(math.isfinite(v) for v in (p_v, T_v, p_l, tau, sigma0, R)):
        raise DomainError("interfacial_mass_flux requires finite inputs")
    if not 0.0 < sigma0 < 2.0:
        raise DomainError(f"sigma0 must lie in (0, 2), got {sigma0}")
    if R <= 0.0:
        raise DomainError("R must be positive")
    T_K = T_v + KELVIN_OFFSET
    tau_K = tau + KELVIN_OFFSET
    if T_K <= 0.0 or tau_K <= 0.0:
        raise DomainError("temperatures must exceed absolute zero")
    prefactor = (2.0 * sigma0 / (2.0 - sigma0)) / math.sqrt(2.0 * math.pi * R)
    return prefactor * (p_v / math.sqrt(T_K) - p_l / math.sqrt(tau_K))


def vapor_pressure(m_v: float, T_v: float, V: float, R_v: float) -> float:
    """Ideal-gas vapor pressure (Pa); T_v in degC, converted internally."""
    if not all(math.isfinite(v) for v in (m_v, T_v, V, R_v)):
        raise DomainError("vapor_pressure requires finite inputs")
    T_K = T_v + KELVIN_OFFSET
    if m_v <= 0.0 or V <= 0.0 or R_v <= 0.0 or T_K <= 0.0:
        raise DomainError("vapor_pressure requires positive mass, volume, R_v and absolute temperature")
    return m_v * R_v * T_K / V


def friction_factor(Re: float) -> float:
    """Fanning friction coefficient with a laminar/turbulent switch.

    Laminar 16/Re up to and including Re = 1180, then 0.078 Re^-1/4.
    """
    if not math.isfinite(Re):
        raise DomainError("friction_factor requires a finite Reynolds number")
    if Re <= 0.0:
        raise DomainError(f"Reynolds number must be positive, got {Re}")
    if Re <= LAMINAR_RE_LIMIT:
        return 16.0 / Re
    return 0.078 * Re ** -0.25


def wall_shear(C_f: float, rho_l: float, v_p: float) -> float:
    """Wall shear stress magnitude 0.5 C_f rho_l v_p^2 (Pa)."""
    if not all(math.isfinite(v) for v in (C_f, rho_l, v_p)):
        raise DomainError("wall_shear requires finite inputs")
    if C_f < 0.0 or rho_l <= 0.0:
        raise DomainError("wall_shear requires C_f >= 0 and rho_l > 0")
    return 0.5 * C_f * rho_l * v_p * v_p


def plug_mass(x_p: float, params: PhysicalParams) -> float:
    """Mass of the liquid column remaining after displacement x_p (kg)."""
    if not math.isfinite(x_p):
        raise DomainError("plug_mass requires a finite displacement")
    m_p = params.rho_l * params.cross_section * (params.L_0 - x_p)
    if m_p <= 0.0:
        raise DomainError(
            f"displacement {x_p} consumes the whole liquid column (L_0 = {params.L_0})")
    return m_p


# ---------------------------------------------------------------------------
# full right-hand side
# ---------------------------------------------------------------------------

# Constant pack handed to the jitted kernel; all floats.
_Consts = namedtuple("_Consts", [
    "L", "d_i", "delta", "sigma0", "g", "rho_l", "rho_v", "h_lfv", "h_lfw",
    "h_v", "c_vv", "c_vl", "R", "R_v", "mu_l", "L_v", "L_0", "L_p", "T_w",
    "p_l", "r_v", "m_f", "V",
])

# Kernel status codes shared with the integrator.
RHS_OK = 0
RHS_BAD_TEMPERATURE = 1
RHS_BAD_MASS = 2
RHS_PLUG_EXHAUSTED = 3
RHS_NOT_FINITE = 4

_RHS_MESSAGES = {
    RHS_BAD_TEMPERATURE: "temperature at or below absolute zero",
    RHS_BAD_MASS: "vapor mass is not positive",
    RHS_PLUG_EXHAUSTED: "plug displacement has consumed the liquid column",
    RHS_NOT_FINITE: "derivative is not finite",
}


def _consts(params: PhysicalParams) -> _Consts:
    return _Consts(
        L=params.L, d_i=params.d_i, delta=params.delta, sigma0=params.sigma0,
        g=params.g, rho_l=params.rho_l, rho_v=params.rho_v,
        h_lfv=params.h_lfv, h_lfw=params.h_lfw, h_v=params.h_v,
        c_vv=params.c_vv, c_vl=params.c_vl, R=params.R, R_v=params.R_v,
        mu_l=params.mu_l, L_v=params.L_v, L_0=params.L_0, L_p=params.L_p,
        T_w=params.T_w, p_l=params.p_l, r_v=params.r_v,
        m_f=params.film_mass(), V=params.vapor_volume(),
    )


@njit(cache=True)
def _rhs_into(y, out, c, p1_const, p2, dynamic_p1):
    """Evaluate the model right-hand side into ``out``; return a status code.

    ``dynamic_p1`` selects the instantaneous gas-law pressure as the hot-side
    driving pressure; otherwise ``p1_const`` is used.
    """
    T_v = y[0]
    tau = y[1]
    m_v = y[2]
    x_p = y[3]
    v_p = y[4]

    T_K = T_v + 273.15
    tau_K = tau + 273.15
    if not (T_K > 0.0 and tau_K > 0.0):
        return RHS_BAD_TEMPERATURE
    if not (m_v > 0.0):
        return RHS_BAD_MASS
    m_p = c.rho_l * math.pi * c.d_i * c.d_i / 4.0 * (c.L_0 - x_p)
    if not (m_p > 0.0):
        return RHS_PLUG_EXHAUSTED

    core = c.d_i - 2.0 * c.delta
    p_v = m_v * c.R_v * T_K / c.V
    prefactor = (2.0 * c.sigma0 / (2.0 - c.sigma0)) / math.sqrt(2.0 * math.pi * c.R)
    r_m = prefactor * (p_v / math.sqrt(T_K) - c.p_l / math.sqrt(tau_K))
    # Condensation only acts when the wall has stopped heating the vapor.
    r_cond = c.r_v if c.T_w <= T_v else 0.0

    area_fv = c.L * math.pi * core
    dm_v = -math.pi * core * r_m
    dV = (math.pi * core * r_m - r_cond * math.pi * c.d_i * c.L_v) / c.rho_v
    dT_v = (-c.h_lfv * (T_v - tau) * area_fv
            + r_m * c.h_v * area_fv
            - p_v * dV
            - c.c_vv * T_v * dm_v) / (c.c_vv * m_v)
    dtau = (-c.h_lfw * (tau - c.T_w) * c.L * math.pi * c.d_i
            - c.h_lfv * (tau - T_v) * area_fv
            + r_m * c.h_v * area_fv) / (c.m_f * c.c_vl)

    if dynamic_p1:
        p1 = p_v
    else:
        p1 = p1_const
    if v_p != 0.0:
        Re = c.rho_l * abs(v_p) * c.d_i / c.mu_l
        if Re <= 1180.0:
            c_f = 16.0 / Re
        else:
            c_f = 0.078 * Re ** -0.25
        s_w = 0.5 * c_f * c.rho_l * v_p * v_p
        shear_force = -math.copysign(1.0, v_p) * math.pi * c.d_i * c.L_p * s_w
    else:
        shear_force = 0.0
    dv_p = (math.pi / 4.0 * core * core * (p1 - p2) + shear_force + m_p * c.g) / m_p

    if not (math.isfinite(dT_v) and math.isfinite(dtau)
            and math.isfinite(dm_v) and math.isfinite(dv_p)):
        return RHS_NOT_FINITE

    out[0] = dT_v
    out[1] = dtau
    out[2] = dm_v
    out[3] = v_p
    out[4] = dv_p
    return RHS_OK


def rhs(state: State, params: PhysicalParams, p_v1: float, p_v2: float) -> Derivative:
    """Time derivatives of the full state under fixed end pressures.

    Args:
        state: current model state.
        params: physical constants.
        p_v1: hot-side driving pressure (Pa).
        p_v2: cold-side back pressure (Pa).

    Returns:
        Derivative of (T_v, tau, m_v, x_p, v_p).

    Raises:
        DomainError: if the state or the resulting derivative leaves the
            model domain.
    """
    if not (math.isfinite(p_v1) and math.isfinite(p_v2)):
        raise DomainError("end pressures must be finite")
    y = state.as_array()
    out = np.empty(5, dtype=float)
    code = _rhs_into(y, out, _consts(params), float(p_v1), float(p_v2), False)
    if code != RHS_OK:
        raise DomainError(_RHS_MESSAGES[code])
    return Derivative(*(float(v) for v in out))


def nondim_coeffs(params: PhysicalParams, state: State, p_v1: float, p_v2: float,
                  c_f: float | None = None) -> DimensionlessCoeffs:
    """Startup coefficient group evaluated at a state.

    The friction coefficient entering ``gamma`` follows the Reynolds-number
    branches when the plug is moving; at rest it falls back to
    ``STATIC_FRICTION_FACTOR`` unless ``c_f`` is given explicitly.

    Args:
        params: physical constants.
        state: state at which state-dependent factors (pressure, flux,
            vapor mass, temperatures) are evaluated.
        p_v1, p_v2: end pressures for the driving force term (Pa).
        c_f: optional frozen friction coefficient.

    Returns:
        The coefficient group, including the composite quantities
        A, B, Q1, Q2 used by the closed-form startup curves.
    """
    if not (math.isfinite(p_v1) and math.isfinite(p_v2)):
        raise DomainError("end pressures must be finite")
    state.validate(params)
    core = params.core_diameter
    p_v = state.pressure(params)
    r_m = interfacial_mass_flux(p_v, state.T_v, params.p_l, state.tau,
                                params.sigma0, params.R)
    r_cond = params.r_v if params.T_w <= state.T_v else 0.0
    m_f = params.film_mass()
    area_fv = params.L * math.pi * core

    if c_f is None:
        if state.v_p != 0.0:
            c_f = friction_factor(params.rho_l * abs(state.v_p) * params.d_i / params.mu_l)
        else:
            c_f = STATIC_FRICTION_FACTOR
    elif not math.isfinite(c_f) or c_f < 0.0:
        raise DomainError(f"c_f must be finite and non-negative, got {c_f}")

    a = -params.h_lfv * area_fv / params.c_vv
    alpha1 = r_m * params.h_v * area_fv / params.c_vv
    alpha2 = (p_v * math.pi / (params.rho_v * params.c_vv)
              * (core * r_m - params.d_i * params.L_v * r_cond))
    b = -params.h_lfv * area_fv / (m_f * params.c_vl)
    eps = params.h_lfw * params.L * math.pi * params.d_i / (m_f * params.c_vl)
    alpha3 = r_m * params.h_v * area_fv / (m_f * params.c_vl)
    Delta = math.pi * core * r_m / state.m_v
    # Composite driving term: pressure force plus the bare gravitational
    # acceleration, kept in this mixed form deliberately.
    beta = math.pi * core ** 2 * (p_v1 - p_v2) / 4.0 + params.g
    gamma = math.pi * params.d_i * params.L_p * c_f * params.rho_l / 2.0
    beta1 = params.rho_l * params.L_0 * math.pi * params.d_i ** 2 / 4.0
    beta2 = params.rho_l * math.pi * params.d_i ** 2 / 4.0
    if beta1 <= 0.0 or gamma < 0.0:
        raise DomainError("coefficient group requires beta1 > 0 and gamma >= 0")
    A = beta / beta1
    B = gamma / beta1
    Q1 = b * state.T_v + alpha3
    Q2 = b + eps
    return DimensionlessCoeffs(a=a, alpha1=alpha1, alpha2=alpha2, alpha3=alpha3,
                               b=b, eps=eps, Delta=Delta, beta=beta,
                               gamma=gamma, beta1=beta1, beta2=beta2,
                               A=A, B=B, Q1=Q1, Q2=Q2)
