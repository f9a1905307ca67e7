"""Firefly-algorithm global minimizer over a box.

Candidates ("fireflies") move toward brighter (lower-objective) candidates
with attraction beta0*exp(-gamma_fa*r^2) plus a scaled random kick; a
candidate with nobody brighter takes the random kick alone.  All internal
arithmetic runs in box-normalized [0,1] coordinates, so gamma_fa and the
kick scale alpha are dimensionless regardless of the physical bounds, and
distances mix parameters of different magnitudes sensibly.

Per iteration the objective is evaluated once for the whole population and
the pairwise sweep then updates positions in place in index order; the
random kick for the pair (i, j) uses the pre-drawn block eps[i, j], and
eps[i, i] serves the kick-only move of locally best candidates.  This fixed
draw order makes runs bit-reproducible per seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import DomainError, ObjectiveEvaluationError

NOISE_KINDS = ("uniform", "gaussian", "levy")
# Smallest magnitude of a heavy-tailed kick, in units of the bound width.
LEVY_S_MIN = 1e-3


@dataclass(frozen=True)
class FireflyConfig:
    """Settings of one optimizer run."""

    n: int = 20                     # population size
    iterations: int = 5000          # sweep count
    beta0: float = 1.0              # attraction at zero distance
    gamma_fa: float = 1.0           # light absorption (normalized distance^-2)
    alpha: float = 0.25             # random kick scale, in bound widths
    alpha_decay: float = 1.0        # per-iteration multiplier on alpha, in (0, 1]
    noise: str = "uniform"          # kick distribution: uniform | gaussian | levy
    levy_lambda: float | None = None  # tail exponent in (1, 3]; required for levy noise
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise DomainError(f"population size must be an integer >= 2, got {self.n}")
        if not isinstance(self.iterations, int) or self.iterations < 1:
            raise DomainError(f"iterations must be an integer >= 1, got {self.iterations}")
        for name in ("beta0", "gamma_fa", "alpha"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)) or v < 0.0:
                raise DomainError(f"{name} must be finite and >= 0, got {v}")
        if not 0.0 < self.alpha_decay <= 1.0:
            raise DomainError(f"alpha_decay must lie in (0, 1], got {self.alpha_decay}")
        if self.noise not in NOISE_KINDS:
            raise DomainError(f"noise must be one of {NOISE_KINDS}, got {self.noise!r}")
        if self.noise == "levy":
            if self.levy_lambda is None:
                raise DomainError("levy noise requires levy_lambda")
            if not 1.0 < self.levy_lambda <= 3.0:
                raise DomainError(f"levy_lambda must lie in (1, 3], got {self.levy_lambda}")


@dataclass
class Swarm:
    """Population snapshot in physical coordinates."""

    positions: np.ndarray   # (n, D)
    fitness: np.ndarray     # (n,)
    best_x: np.ndarray      # (D,) best position found so far
    best_f: float           # best value found so far


@dataclass
class OptimizeResult:
    """Outcome of one optimize call."""

    best_x: np.ndarray
    best_f: float
    history: np.ndarray     # best-so-far value after each iteration
    swarm: Swarm            # final population
    n_evals: int
    trace: list = field(default_factory=list)  # per-iteration positions if recorded


def attractiveness(beta0: float, gamma_fa: float, r: float) -> float:
    """Attraction beta0 * exp(-gamma_fa * r^2) at distance r >= 0."""
    if not all(math.isfinite(v) for v in (beta0, gamma_fa, r)):
        raise DomainError("attractiveness requires finite inputs")
    if r < 0.0:
        raise DomainError(f"distance must be non-negative, got {r}")
    return beta0 * math.exp(-gamma_fa * r * r)


def levy_step(levy_lambda: float, rng: np.random.Generator, size=None):
    """Heavy-tailed random step(s) with tail law |s|^(-levy_lambda).

    Sampled by the inverse-power transform s = s_min * u^(-1/(lambda-1))
    with u uniform on (0, 1], then a random sign; magnitudes are drawn
    before signs.  Steps are expressed in units of the bound width
    (s_min = 1e-3 widths).

    Args:
        levy_lambda: tail exponent, in (1, 3].
        rng: numpy random generator.
        size: None for a scalar, else an output shape.

    Returns:
        float or ndarray of steps.
    """
    if not (isinstance(levy_lambda, (int, float)) and 1.0 < levy_lambda <= 3.0):
        raise DomainError(f"levy_lambda must lie in (1, 3], got {levy_lambda}")
    u = 1.0 - rng.random(size)          # uniform on (0, 1]
    magnitude = LEVY_S_MIN * u ** (-1.0 / (levy_lambda - 1.0))
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    out = sign * magnitude
    return out if size is not None else float(out)


def _draw_kicks(config: FireflyConfig, rng: np.random.Generator, shape):
    if config.noise == "uniform":
        return rng.random(shape) - 0.5
    if config.noise == "gaussian":
        return rng.standard_normal(shape)
    return levy_step(config.levy_lambda, rng, size=shape)


def _as_bounds(bounds, dim_hint=None) -> np.ndarray:
    b = np.asarray(bounds, dtype=float)
    if b.ndim != 2 or b.shape[1] != 2:
        raise DomainError(f"bounds must have shape (D, 2), got {b.shape}")
    if not np.all(np.isfinite(b)) or not np.all(b[:, 0] < b[:, 1]):
        raise DomainError("each bound must be finite with lower < upper")
    if dim_hint is not None and b.shape[0] != dim_hint:
        raise DomainError(f"bounds dimension {b.shape[0]} does not match positions ({dim_hint})")
    return b


def move_firefly(x_i, x_j, f_i: float, f_j: float, config: FireflyConfig,
                 rng: np.random.Generator, bounds=None) -> np.ndarray:
    """One attraction move of candidate i toward a brighter candidate j.

    The attraction distance is measured in box-normalized coordinates and
    the random kick is scaled per dimension by the bound width; the result
    is clamped to the box.  With f_j >= f_i (j not brighter) the position
    is returned unchanged and no randomness is consumed.

    Args:
        x_i, x_j: positions in physical coordinates.
        f_i, f_j: their objective values.
        config: optimizer settings (beta0, gamma_fa, alpha, noise).
        rng: numpy random generator.
        bounds: (D, 2) box; None means the unit box.

    Returns:
        New position of candidate i, shape (D,).
    """
    x_i = np.atleast_1d(np.asarray(x_i, dtype=float))
    x_j = np.atleast_1d(np.asarray(x_j, dtype=float))
    if x_i.shape != x_j.shape:
        raise DomainError("x_i and x_j must have the same shape")
    if bounds is None:
        bounds = np.column_stack([np.zeros(x_i.size), np.ones(x_i.size)])
    b = _as_bounds(bounds, x_i.size)
    if not (f_j < f_i):
        return x_i.copy()
    lo, width = b[:, 0], b[:, 1] - b[:, 0]
    xi_n = (x_i - lo) / width
    xj_n = (x_j - lo) / width
    r2 = float(np.sum((xi_n - xj_n) ** 2))
    beta = config.beta0 * math.exp(-config.gamma_fa * r2)
    kick = _draw_kicks(config, rng, x_i.shape)
    new_n = np.clip(xi_n + beta * (xj_n - xi_n) + config.alpha * kick, 0.0, 1.0)
    return lo + new_n * width


@njit(cache=True)
def _sweep(pos, fit, eps, beta0, gamma_fa, alpha):
    """In-place pairwise sweep over box-normalized positions.

    For each i in index order, i moves once toward every currently brighter
    j (using j's already-updated position); if nobody is brighter, i takes
    the kick eps[i, i] alone.  Fitness values are those of the last batch
    evaluation and are not refreshed mid-sweep.
    """
    n, d = pos.shape
    for i in range(n):
        moved = False
        for j in range(n):
            if fit[j] < fit[i]:
                moved = True
                r2 = 0.0
                for k in range(d):
                    diff = pos[i, k] - pos[j, k]
                    r2 += diff * diff
                beta = beta0 * math.exp(-gamma_fa * r2)
                for k in range(d):
                    v = pos[i, k] + beta * (pos[j, k] - pos[i, k]) + alpha * eps[i, j, k]
                    if v < 0.0:
                        v = 0.0
                    elif v > 1.0:
                        v = 1.0
                    pos[i, k] = v
        if not moved:
            for k in range(d):
                v = pos[i, k] + alpha * eps[i, i, k]
                if v < 0.0:
                    v = 0.0
                elif v > 1.0:
                    v = 1.0
                pos[i, k] = v


def _evaluate(objective, X: np.ndarray, vectorized: bool) -> np.ndarray:
    try:
        if vectorized:
            out = np.asarray(objective(X), dtype=float)
        else:
            out = np.array([float(objective(x)) for x in X], dtype=float)
    except Exception as exc:
        raise ObjectiveEvaluationError(
            f"objective evaluation failed: {exc}", position=X.copy()) from exc
    if out.shape != (X.shape[0],):
        raise ObjectiveEvaluationError(
            f"objective returned shape {out.shape}, expected ({X.shape[0]},)",
            position=X.copy())
    if np.any(np.isnan(out)):
        bad = X[int(np.argmax(np.isnan(out)))]
        raise ObjectiveEvaluationError(
            f"objective returned NaN at {bad}", position=bad.copy())
    return out


def optimize(objective, bounds, config: FireflyConfig, vectorized: bool = False,
             record_positions: bool = False) -> OptimizeResult:
    """Minimize an objective over a box with the firefly sweep.

    Args:
        objective: callable; maps a (D,) position to a float, or, with
            vectorized=True, an (n, D) batch to an (n,) array.  +inf is a
            legal value (e.g. penalty regions); NaN is an error.
        bounds: (D, 2) array-like of finite (lower, upper) pairs.
        config: optimizer settings; config.seed fixes the entire run.
        vectorized: whether the objective accepts batches.
        record_positions: keep a per-iteration copy of the population in
            the result's trace (memory-heavy for long runs).

    Returns:
        OptimizeResult with the best position/value, the monotone
        non-increasing best-so-far history (one entry per iteration), the
        final swarm and the evaluation count.
    """
    b = _as_bounds(bounds)
    lo, width = b[:, 0], b[:, 1] - b[:, 0]
    rng = np.random.default_rng(config.seed)
    n, dim = config.n, b.shape[0]

    pos = rng.random((n, dim))
    fit = _evaluate(objective, lo + pos * width, vectorized)
    best_i = int(np.argmin(fit))
    best_n = pos[best_i].copy()
    best_f = float(fit[best_i])

    history = np.empty(config.iterations)
    trace = []
    alpha = config.alpha
    for it in range(config.iterations):
        eps = _draw_kicks(config, rng, (n, n, dim))
        _sweep(pos, fit, eps, config.beta0, config.gamma_fa, alpha)
        fit = _evaluate(objective, lo + pos * width, vectorized)
        i = int(np.argmin(fit))
        if fit[i] < best_f:
            best_f = float(fit[i])
            best_n = pos[i].copy()
        history[it] = best_f
        alpha *= config.alpha_decay
        if record_positions:
            trace.append(lo + pos * width)

    swarm = Swarm(positions=lo + pos * width, fitness=fit.copy(),
                  best_x=lo + best_n * width, best_f=best_f)
    return OptimizeResult(best_x=swarm.best_x.copy(), best_f=best_f,
                          history=history, swarm=swarm,
                          n_evals=n * (config.iterations + 1), trace=trace)
