"""Fixed-step explicit time integration of the plug/vapor model.

``step_rk4`` is a generic classical Runge-Kutta step for autonomous systems
(augment the state with time if an explicit time dependence is needed);
``simulate`` drives the full model through a compiled loop and returns a
:class:`Trajectory`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numba import njit

from .errors import DomainError
from .model import (
    PhysicalParams, State, STATE_FIELDS,
    RHS_OK, _RHS_MESSAGES, _consts, _rhs_into,
)

STATUS_COMPLETED = "completed"
STATUS_EARLY_STOP = "early_stop"


def step_rk4(rhs: Callable, state, dt: float):
    """One classical fourth-order Runge-Kutta step.

    Args:
        rhs: derivative function mapping a state to its time derivative;
            the state may be a float or any numpy-compatible array.
        state: current state value.
        dt: step size (s), positive.

    Returns:
        The state advanced by dt, same shape as the input.
    """
    if not (math.isfinite(dt) and dt > 0.0):
        raise DomainError(f"dt must be positive and finite, got {dt}")
    k1 = rhs(state)
    k2 = rhs(state + 0.5 * dt * k1)
    k3 = rhs(state + 0.5 * dt * k2)
    k4 = rhs(state + dt * k3)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_path(rhs: Callable, y0, t_end: float, dt: float):
    """Repeated step_rk4 from t = 0, returning (times, values).

    Convenience wrapper used by tests and demo scripts; values has one row
    per stored time (including t = 0).
    """
    if not (math.isfinite(t_end) and t_end >= 0.0):
        raise DomainError(f"t_end must be non-negative and finite, got {t_end}")
    y = np.atleast_1d(np.asarray(y0, dtype=float))
    n = int(round(t_end / dt)) if t_end > 0.0 else 0
    times = np.empty(n + 1)
    values = np.empty((n + 1, y.size))
    times[0] = 0.0
    values[0] = y
    for k in range(1, n + 1):
        y = step_rk4(rhs, y, dt)
        times[k] = k * dt
        values[k] = y
    return times, values


def model_field(params: PhysicalParams, p_v1: float | None = None,
                p_v2: float | None = None) -> Callable:
    """Wrap the model right-hand side as an array-to-array function.

    ``p_v1 = None`` makes the hot-side pressure track the instantaneous
    gas-law pressure of the vapor state; ``p_v2`` defaults to the
    liquid-side pressure in params.  The returned function raises
    DomainError when the state leaves the model domain, so it composes
    with :func:`step_rk4`.
    """
    c = _consts(params)
    dynamic = p_v1 is None
    p1 = 0.0 if dynamic else float(p_v1)
    p2 = float(params.p_l if p_v2 is None else p_v2)

    def f(y):
        out = np.empty(5)
        code = _rhs_into(np.asarray(y, dtype=float), out, c, p1, p2, dynamic)
        if code != RHS_OK:
            raise DomainError(_RHS_MESSAGES[code])
        return out

    return f


@dataclass
class Trajectory:
    """Stored result of one simulate call.

    ``states`` is an (N, 5) array in the (T_v, tau, m_v, x_p, v_p) column
    order; ``times`` is the matching strictly increasing time grid.  ``meta``
    records the parameter snapshot, integrator settings and stop status.
    """

    times: np.ndarray
    states: np.ndarray
    params: PhysicalParams
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.times.size

    @property
    def t(self) -> np.ndarray:
        return self.times

    @property
    def T_v(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def tau(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def m_v(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def x_p(self) -> np.ndarray:
        return self.states[:, 3]

    @property
    def v_p(self) -> np.ndarray:
        return self.states[:, 4]

    def pressures(self) -> np.ndarray:
        """Gas-law vapor pressure along the trajectory (Pa)."""
        V = self.params.vapor_volume()
        return self.m_v * self.params.R_v * (self.T_v + 273.15) / V

    def state_at(self, i: int) -> State:
        return State.from_array(self.states[i])

    def final_state(self) -> State:
        return self.state_at(len(self) - 1)


@njit(cache=True)
def _run_fixed(y, c, p1, p2, dynamic_p1, n_steps, dt, store_every, times, states):
    """Fixed-step RK4 loop; returns (status code, failing step, rows stored)."""
    k1 = np.empty(5)
    k2 = np.empty(5)
    k3 = np.empty(5)
    k4 = np.empty(5)
    yt = np.empty(5)
    y_prev = np.empty(5)
    times[0] = 0.0
    for i in range(5):
        states[0, i] = y[i]
    stored = 1
    for step in range(n_steps):
        code = _rhs_into(y, k1, c, p1, p2, dynamic_p1)
        if code == 0:
            for i in range(5):
                yt[i] = y[i] + 0.5 * dt * k1[i]
            code = _rhs_into(yt, k2, c, p1, p2, dynamic_p1)
        if code == 0:
            for i in range(5):
                yt[i] = y[i] + 0.5 * dt * k2[i]
            code = _rhs_into(yt, k3, c, p1, p2, dynamic_p1)
        if code == 0:
            for i in range(5):
                yt[i] = y[i] + dt * k3[i]
            code = _rhs_into(yt, k4, c, p1, p2, dynamic_p1)
        if code != 0:
            # y is still the last valid state; keep it if not yet stored.
            if times[stored - 1] < step * dt:
                times[stored] = step * dt
                for i in range(5):
                    states[stored, i] = y[i]
                stored += 1
            return code, step, stored
        for i in range(5):
            y_prev[i] = y[i]
            y[i] = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        code = 0
        for i in range(5):
            if not math.isfinite(y[i]):
                code = 4
        if code == 0 and (y[0] <= -273.15 or y[1] <= -273.15):
            code = 1
        if code == 0 and y[2] <= 0.0:
            code = 2
        if code == 0 and y[3] >= c.L_0:
            code = 3
        if code != 0:
            # The new state is invalid; store the last valid one instead.
            if times[stored - 1] < step * dt:
                times[stored] = step * dt
                for i in range(5):
                    states[stored, i] = y_prev[i]
                stored += 1
            return code, step, stored
        if (step + 1) % store_every == 0:
            times[stored] = (step + 1) * dt
            for i in range(5):
                states[stored, i] = y[i]
            stored += 1
    return 0, n_steps, stored


def simulate(params: PhysicalParams, initial_state: State | None = None,
             p_v1: float | None = None, p_v2: float | None = None,
             t_end: float = 10.0, dt: float = 1e-4,
             store_every: int = 1) -> Trajectory:
    """Integrate the full model from t = 0 with fixed-step RK4.

    Args:
        params: physical constants.
        initial_state: starting state; defaults to params.initial_state().
        p_v1: hot-side driving pressure (Pa); None tracks the instantaneous
            gas-law pressure of the simulated vapor volume.
        p_v2: cold-side back pressure (Pa); None uses params.p_l.
        t_end: end time (s); 0 yields a single-point trajectory.
        dt: step size (s).
        store_every: store one row every this many steps (the initial state
            is always stored).

    Returns:
        Trajectory; meta["status"] is "completed" or "early_stop", with
        meta["stop_step"] and meta["stop_reason"] set on early stop.  Only
        valid states are stored, so an early-stopped trajectory ends at
        the last state inside the model domain.
    """
    if initial_state is None:
        initial_state = params.initial_state()
    initial_state.validate(params)
    if not (math.isfinite(dt) and dt > 0.0):
        raise DomainError(f"dt must be positive and finite, got {dt}")
    if not (math.isfinite(t_end) and t_end >= 0.0):
        raise DomainError(f"t_end must be non-negative and finite, got {t_end}")
    if not (isinstance(store_every, (int, np.integer)) and store_every >= 1):
        raise DomainError(f"store_every must be an integer >= 1, got {store_every}")
    if p_v1 is not None and not math.isfinite(p_v1):
        raise DomainError("p_v1 must be finite")
    if p_v2 is not None and not math.isfinite(p_v2):
        raise DomainError("p_v2 must be finite")

    dynamic = p_v1 is None
    p1 = 0.0 if dynamic else float(p_v1)
    p2 = float(params.p_l if p_v2 is None else p_v2)
    n_steps = int(round(t_end / dt)) if t_end > 0.0 else 0
    max_rows = n_steps // store_every + 2
    times = np.empty(max_rows)
    states = np.empty((max_rows, 5))
    y = initial_state.as_array()
    code, stop_step, stored = _run_fixed(y, _consts(params), p1, p2, dynamic,
                                         n_steps, dt, int(store_every),
                                         times, states)
    meta = {
        "p_v1": None if dynamic else p1,
        "p_v2": p2,
        "dt": dt,
        "t_end": t_end,
        "store_every": int(store_every),
        "status": STATUS_COMPLETED if code == RHS_OK else STATUS_EARLY_STOP,
        "stop_step": None if code == RHS_OK else int(stop_step),
        "stop_reason": None if code == RHS_OK else _RHS_MESSAGES[code],
    }
    return Trajectory(times=times[:stored].copy(), states=states[:stored].copy(),
                      params=params, meta=meta)
