"""Two simplified plug oscillators kept for comparison.

Both are second-order laws integrated with the generic RK4 stepper: a
linear oscillator whose stiffness grows with time, and a quadratically
damped plug driven by a constant pressure head. The damping of the second
is deliberately even in velocity: it drains energy on the upstroke and
feeds it back on the return, so the orbit closes instead of decaying
toward equilibrium.
"""

import numpy as np

from phpipe import Series, integrate_path, line_plot, wong_rhs, yuan_rhs

# --- linear oscillator with time-growing stiffness -------------------------
a, b, k = 0.4, 2.0, 1.0


def wong_field(y):
    # state (x, dx, t); time is carried explicitly
    return np.array([y[1], wong_rhs(a, b, k, y[2], y[0], y[1]), 1.0])


t_w, y_w = integrate_path(wong_field, [1.0, 0.0, 0.0], 20.0, 1e-3)
x_w = y_w[:, 0]
# zero crossings bunch together as the stiffness b (k + t) grows
crossings = t_w[1:][np.diff(np.sign(x_w)) != 0]
gaps = np.diff(crossings)
print(f"stiffening oscillator: {crossings.size} zero crossings in 20 s")
print(f"  first gap {gaps[0]:.3f} s, last gap {gaps[-1]:.3f} s")

# --- quadratically damped pressure-driven plug ------------------------------
C, d_i, g, L, dp, rho_l = 0.01, 0.0033, 9.8, 0.18, 4.4e4, 1000.0
x_eq = dp / (2.0 * g * rho_l)


def yuan_field(y):
    return np.array([y[1], yuan_rhs(C, d_i, g, L, dp, rho_l, y[0], y[1])])


t_y, y_y = integrate_path(yuan_field, [0.0, 0.0], 3.0, 1e-4)
x_y = y_y[:, 0]
peaks = x_y[1:-1][(x_y[1:-1] > x_y[:-2]) & (x_y[1:-1] > x_y[2:])]
print(f"\npressure-driven plug: equilibrium at {x_eq:.3f} m")
print(f"  excursion {x_y.min():.3f} .. {x_y.max():.3f} m")
print(f"  successive peaks {np.round(peaks, 4)} m: the cycle closes, "
      f"no net dissipation")

svg = line_plot(
    [Series("stiffening oscillator", t_w, x_w),
     Series("driven plug / 10", t_y * (20.0 / 3.0), x_y / 10.0, dashed=True)],
    title="Reference oscillators (driven plug rescaled)",
    xlabel="t (s)", ylabel="x (m)")
with open("reference_oscillators.svg", "w", encoding="utf-8") as fh:
    fh.write(svg)
print("\nwrote reference_oscillators.svg")
