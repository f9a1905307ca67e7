"""Closed-form startup curves and two simplified reference oscillators.

The plug position follows a log-cosh law in the decoupled short-time limit
and the film temperature an exponential relaxation; both take the composite
constants produced by :func:`phpipe.model.nondim_coeffs`.  ``wong_rhs`` and
``yuan_rhs`` are single-plug comparison oscillators kept in their original
form (in particular the yuan quadratic damping term is even in the
velocity; the physically signed shear lives in the full model).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .model import DimensionlessCoeffs  # re-export: the coefficient bundle feeding these curves

__all__ = [
    "DimensionlessCoeffs", "plug_position_lncosh", "plug_velocity_lncosh",
    "film_temperature", "wong_rhs", "yuan_rhs",
]

# Above this argument ln cosh z is replaced by its asymptote z - ln 2;
# the truncated term log1p(exp(-2z)) is below 1e-17 there.
_LN_COSH_SWITCH = 20.0


def _ln_cosh(z: np.ndarray) -> np.ndarray:
    az = np.abs(z)
    small = az <= _LN_COSH_SWITCH
    clipped = np.where(small, az, 0.0)
    return np.where(small, np.log(np.cosh(clipped)), az - math.log(2.0))


def _check_ab_t(A: float, B: float, t):
    if not (math.isfinite(A) and math.isfinite(B)):
        raise DomainError("A and B must be finite")
    if A <= 0.0 or B <= 0.0:
        raise DomainError(f"A and B must be positive, got A={A}, B={B}")
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)) or np.any(t < 0.0):
        raise DomainError("t must be finite and non-negative")
    return t


def plug_position_lncosh(A: float, B: float, t):
    """Short-time plug position (1/B) ln cosh(sqrt(AB) t) in meters.

    Overflow-safe for arguments sqrt(AB)*t far beyond the double-precision
    range of cosh.  Accepts scalar or array t; returns the same shape.
    """
    t_arr = _check_ab_t(A, B, t)
    out = _ln_cosh(math.sqrt(A * B) * t_arr) / B
    return out if out.shape else float(out)


def plug_velocity_lncosh(A: float, B: float, t):
    """Time derivative of the log-cosh position: sqrt(A/B) tanh(sqrt(AB) t)."""
    t_arr = _check_ab_t(A, B, t)
    out = math.sqrt(A / B) * np.tanh(math.sqrt(A * B) * t_arr)
    return out if out.shape else float(out)


def film_temperature(Q1: float, Q2: float, t):
    """Exponential film-temperature startup curve Q1 (1 - exp(-Q2 t)).

    Accepts scalar or array t; the curve starts at 0 and approaches Q1
    with rate Q2.
    """
    if not (math.isfinite(Q1) and math.isfinite(Q2)):
        raise DomainError("Q1 and Q2 must be finite")
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)) or np.any(t_arr < 0.0):
        raise DomainError("t must be finite and non-negative")
    out = Q1 * (-np.expm1(-Q2 * t_arr))
    return out if out.shape else float(out)


def wong_rhs(a: float, b: float, k: float, t: float, x: float, dx: float) -> float:
    """Acceleration of the linear oscillator with time-growing stiffness.

    Implements d2x/dt2 = -a dx - b (k + t) x.
    """
    vals = (a, b, k, t, x, dx)
    if not all(math.isfinite(v) for v in vals):
        raise DomainError("wong_rhs requires finite inputs")
    return -a * dx - b * (k + t) * x


def yuan_rhs(C: float, d_i: float, g: float, L: float, dp: float,
             rho_l: float, x: float, dx: float) -> float:
    """Acceleration of the quadratic-damping plug oscillator.

    Implements d2x/dt2 = dp/(L rho_l) - (2 C / d_i) dx^2 - (2 g / L) x.
    The damping term is deliberately even in dx; it is not a physical
    friction law, and over a cycle it does no net work.
    """
    vals = (C, d_i, g, L, dp, rho_l, x, dx)
    if not all(math.isfinite(v) for v in vals):
        raise DomainError("yuan_rhs requires finite inputs")
    if d_i <= 0.0 or L <= 0.0 or rho_l <= 0.0:
        raise DomainError("d_i, L and rho_l must be positive")
    return dp / (L * rho_l) - (2.0 * C / d_i) * dx * dx - (2.0 * g / L) * x
