"""Inverse-problem layer: synthetic observations, linear baseline, and
firefly-driven least-squares / variance-penalized parameter recovery.

The forward map for fitting is the log-cosh startup curve: a candidate
(L, d_i, T_v, T_w, p_v) is expanded to a full parameter set, the startup
coefficient group gives (A, B), and predicted plug positions are compared
with observations.  The full ODE model is selectable for validation but is
orders of magnitude slower.  All optimization takes place in [0,1]
bound-normalized coordinates; p_v is handled in kPa throughout this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace as _dc_replace
from typing import Mapping, Sequence

import numpy as np
from numba import njit

from .errors import DomainError, RankDeficiencyError
from .analytic import plug_position_lncosh, _ln_cosh
from .firefly import FireflyConfig, optimize, _draw_kicks
from .integrate import simulate, STATUS_COMPLETED
from .model import PhysicalParams, STATIC_FRICTION_FACTOR, nondim_coeffs

PARAM_NAMES = ("L", "d_i", "T_v", "T_w", "p_v")

# Tight recovery box used by the constrained fits (p_v in kPa).
CONSTRAINED_BOUNDS = {
    "L": (0.15, 0.22),
    "d_i": (0.002, 0.004),
    "T_v": (15.0, 25.0),
    "T_w": (35.0, 45.0),
    "p_v": (80.0, 120.0),
}

# Weak positivity-style box for the unconstrained baseline: wide enough that
# only physical realizability limits the search.
LOOSE_BOUNDS = {
    "L": (0.02, 0.60),
    "d_i": (0.0008, 0.010),
    "T_v": (0.0, 80.0),
    "T_w": (0.0, 90.0),
    "p_v": (20.0, 300.0),
}

# Objective value standing in for a failed forward evaluation; finite so the
# optimizer can walk out of invalid regions.
FORWARD_FAILURE_PENALTY = 1e12

_FORWARD_MODELS = ("analytic", "ode")
_OBJECTIVE_MODES = ("lsq", "penalized")
_SIGMA_SCOPES = ("swarm", "ensemble")


@dataclass(frozen=True)
class ForwardConfig:
    """How candidate parameters are turned into predicted plug positions."""

    model: str = "analytic"          # analytic | ode
    t_end: float = 4e-3              # observation window (s)
    friction_coeff: float = STATIC_FRICTION_FACTOR  # frozen c_f of the startup coefficients
    p_v2: float | None = None        # cold-side pressure (Pa); None uses params.p_l
    ode_dt: float = 1e-8             # step size of the ode forward model (s)

    def __post_init__(self):
        if self.model not in _FORWARD_MODELS:
            raise DomainError(f"forward model must be one of {_FORWARD_MODELS}, got {self.model!r}")
        if not (math.isfinite(self.t_end) and self.t_end > 0.0):
            raise DomainError(f"t_end must be positive, got {self.t_end}")
        if not (math.isfinite(self.friction_coeff) and self.friction_coeff >= 0.0):
            raise DomainError(f"friction_coeff must be non-negative, got {self.friction_coeff}")
        if not (math.isfinite(self.ode_dt) and self.ode_dt > 0.0):
            raise DomainError(f"ode_dt must be positive, got {self.ode_dt}")
        if self.p_v2 is not None and not math.isfinite(self.p_v2):
            raise DomainError("p_v2 must be finite or None")


@dataclass(frozen=True)
class ObservationSet:
    """Timestamped plug-position observations."""

    times: np.ndarray        # (n,) strictly increasing seconds
    x_obs: np.ndarray        # (n,) observed positions (m)
    noise_sigma: float = 0.0
    source: str = "synthetic"          # synthetic | file
    truth: PhysicalParams | None = None  # generating parameters when synthetic

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        x_obs = np.asarray(self.x_obs, dtype=float)
        if times.ndim != 1 or times.shape != x_obs.shape:
            raise DomainError("times and x_obs must be matching 1-D arrays")
        if times.size < 2:
            raise DomainError("an observation set needs at least 2 samples")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(x_obs))):
            raise DomainError("observations must be finite")
        if not np.all(np.diff(times) > 0.0):
            raise DomainError("observation times must be strictly increasing")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0.0):
            raise DomainError(f"noise_sigma must be non-negative, got {self.noise_sigma}")
        if self.source not in ("synthetic", "file"):
            raise DomainError(f"source must be 'synthetic' or 'file', got {self.source!r}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "x_obs", x_obs)

    def __len__(self) -> int:
        return self.times.size

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.x_obs.tolist()))


@dataclass(frozen=True)
class EstimationProblem:
    """One inverse problem: which parameters to free, over which box, against
    which observations, under which objective."""

    observations: ObservationSet
    free_params: tuple[str, ...] = PARAM_NAMES
    bounds: Mapping[str, tuple[float, float]] | None = None
    fixed: PhysicalParams = field(default_factory=PhysicalParams)
    objective_mode: str = "penalized"   # lsq | penalized
    forward: ForwardConfig = field(default_factory=ForwardConfig)
    sigma_scope: str = "swarm"          # swarm | ensemble variance scope of the penalty

    def __post_init__(self):
        free = tuple(self.free_params)
        if not free:
            raise DomainError("free_params must be non-empty")
        for name in free:
            if name not in PARAM_NAMES:
                raise DomainError(f"unknown free parameter {name!r}; choose from {PARAM_NAMES}")
        if len(set(free)) != len(free):
            raise DomainError("free_params must not repeat")
        object.__setattr__(self, "free_params", free)
        if self.objective_mode not in _OBJECTIVE_MODES:
            raise DomainError(f"objective_mode must be one of {_OBJECTIVE_MODES}")
        if self.sigma_scope not in _SIGMA_SCOPES:
            raise DomainError(f"sigma_scope must be one of {_SIGMA_SCOPES}")
        if self.bounds is not None:
            clean = {}
            for name, pair in dict(self.bounds).items():
                if name not in PARAM_NAMES:
                    raise DomainError(f"bound given for unknown parameter {name!r}")
                lo, hi = (float(pair[0]), float(pair[1]))
                if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                    raise DomainError(f"bound for {name} must satisfy lower <= upper, got {pair}")
                clean[name] = (lo, hi)
            object.__setattr__(self, "bounds", clean)

    def bound_arrays(self) -> np.ndarray:
        """Bounds of the free parameters as a (k, 2) array; requires bounds
        for every free parameter."""
        if self.bounds is None:
            raise DomainError("problem has no bounds")
        missing = [n for n in self.free_params if n not in self.bounds]
        if missing:
            raise DomainError(f"missing bounds for free parameters: {missing}")
        return np.array([self.bounds[n] for n in self.free_params], dtype=float)

    def replace(self, **changes) -> "EstimationProblem":
        return _dc_replace(self, **changes)


@dataclass(frozen=True)
class FitResult:
    """Estimates from a single optimization run."""

    estimates: dict            # free parameter name -> value (p_v in kPa)
    objective_value: float
    seed: int
    iterations_used: int


@dataclass(frozen=True)
class EnsembleStats:
    """Per-parameter statistics over an ensemble of runs.

    Standard deviations use the unbiased (n-1) denominator.
    """

    params: tuple[str, ...]
    mean: dict
    std: dict
    min: dict
    max: dict
    n_runs: int
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_results(cls, results: Sequence[FitResult], params: Sequence[str],
                     meta: dict | None = None) -> "EnsembleStats":
        if len(results) < 2:
            raise DomainError("ensemble statistics need at least 2 runs")
        cols = {n: np.array([r.estimates[n] for r in results], dtype=float) for n in params}
        return cls(
            params=tuple(params),
            mean={n: float(np.mean(v)) for n, v in cols.items()},
            std={n: float(np.std(v, ddof=1)) for n, v in cols.items()},
            min={n: float(np.min(v)) for n, v in cols.items()},
            max={n: float(np.max(v)) for n, v in cols.items()},
            n_runs=len(results),
            meta=dict(meta or {}),
        )


# ---------------------------------------------------------------------------
# forward map
# ---------------------------------------------------------------------------

def candidate_params(base: PhysicalParams, free_params: Sequence[str],
                     values: Sequence[float]) -> PhysicalParams:
    """Expand free-parameter values into a full parameter set.

    Ties follow the forward model's conventions: a free L also sets the
    sheared length L_p, a free d_i rescales the reference column L_0 to
    25 d_i, T_v sets the initial temperature, and p_v (kPa) seeds the
    initial pressure p_v0 (Pa).
    """
    if len(free_params) != len(values):
        raise DomainError("free_params and values must align")
    kw = {}
    for name, v in zip(free_params, values):
        v = float(v)
        if name == "L":
            kw["L"] = v
            kw["L_p"] = v
        elif name == "d_i":
            kw["d_i"] = v
            kw["L_0"] = 25.0 * v
        elif name == "T_v":
            kw["T_v0"] = v
        elif name == "T_w":
            kw["T_w"] = v
        elif name == "p_v":
            kw["p_v0"] = 1000.0 * v
        else:
            raise DomainError(f"unknown free parameter {name!r}")
    return base.replace(**kw)


def observation_times(n_points: int, t_end: float) -> np.ndarray:
    """Uniform sampling times (t_end/n, ..., t_end); t = 0 carries no
    information since every startup curve passes through the origin."""
    if not isinstance(n_points, int) or n_points < 2:
        raise DomainError(f"n_points must be an integer >= 2, got {n_points}")
    if not (math.isfinite(t_end) and t_end > 0.0):
        raise DomainError(f"t_end must be positive, got {t_end}")
    return np.linspace(t_end / n_points, t_end, n_points)


def predict_positions(params: PhysicalParams, times: np.ndarray,
                      forward: ForwardConfig) -> np.ndarray:
    """Forward-model plug positions at the given times.

    Raises DomainError when the candidate cannot produce a curve (invalid
    parameters, non-positive startup coefficients, or an early-stopped
    integration in ode mode).
    """
    times = np.asarray(times, dtype=float)
    p_v2 = params.p_l if forward.p_v2 is None else forward.p_v2
    if forward.model == "analytic":
        coeffs = nondim_coeffs(params, params.initial_state(), params.p_v0, p_v2,
                               c_f=forward.friction_coeff)
        return plug_position_lncosh(coeffs.A, coeffs.B, times)
    t_end = float(times[-1])
    n_steps = int(round(t_end / forward.ode_dt))
    store_every = max(1, n_steps // 4000)
    traj = simulate(params, p_v1=None, p_v2=p_v2, t_end=t_end,
                    dt=forward.ode_dt, store_every=store_every)
    if traj.meta["status"] != STATUS_COMPLETED:
        raise DomainError(
            f"forward integration stopped early at step {traj.meta['stop_step']}: "
            f"{traj.meta['stop_reason']}")
    return np.interp(times, traj.t, traj.x_p)


def generate_synthetic(params_true: PhysicalParams,
                       forward_config: ForwardConfig | None = None,
                       n_points: int = 25, noise_sigma: float = 0.0,
                       seed: int = 0, noise_rel: float | None = None) -> ObservationSet:
    """Sample the forward model at uniform times and add Gaussian noise.

    Args:
        params_true: generating parameter set.
        forward_config: forward model settings; defaults to the analytic
            startup curve over its default window.
        n_points: number of samples.
        noise_sigma: absolute noise scale (m).
        seed: RNG seed for the noise draw.
        noise_rel: if given, overrides noise_sigma with
            noise_rel * RMS(clean curve).

    Returns:
        ObservationSet with source "synthetic" and the truth attached.
    """
    forward = forward_config or ForwardConfig()
    times = observation_times(n_points, forward.t_end)
    clean = predict_positions(params_true, times, forward)
    if noise_rel is not None:
        if not (math.isfinite(noise_rel) and noise_rel >= 0.0):
            raise DomainError(f"noise_rel must be non-negative, got {noise_rel}")
        noise_sigma = float(noise_rel * math.sqrt(float(np.mean(clean ** 2))))
    if not (math.isfinite(noise_sigma) and noise_sigma >= 0.0):
        raise DomainError(f"noise_sigma must be non-negative, got {noise_sigma}")
    x = clean.copy()
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        x = clean + rng.normal(0.0, noise_sigma, size=clean.shape)
    return ObservationSet(times=times, x_obs=x, noise_sigma=noise_sigma,
                          source="synthetic", truth=params_true)


# ---------------------------------------------------------------------------
# objectives
# ---------------------------------------------------------------------------

def _candidate_array(candidate, problem: EstimationProblem) -> np.ndarray:
    if isinstance(candidate, Mapping):
        missing = [n for n in problem.free_params if n not in candidate]
        if missing:
            raise DomainError(f"candidate missing values for {missing}")
        return np.array([float(candidate[n]) for n in problem.free_params])
    arr = np.asarray(candidate, dtype=float).ravel()
    if arr.size != len(problem.free_params):
        raise DomainError(
            f"candidate has {arr.size} values, expected {len(problem.free_params)}")
    return arr


def residual_ss(candidate, problem: EstimationProblem) -> float:
    """Sum of squared prediction errors at the observation times.

    ``candidate`` is a value per free parameter, as a sequence in
    problem.free_params order or a name->value mapping (p_v in kPa).
    A candidate whose forward evaluation fails scores the finite
    FORWARD_FAILURE_PENALTY instead of raising.
    """
    values = _candidate_array(candidate, problem)
    try:
        params = candidate_params(problem.fixed, problem.free_params, values)
        pred = predict_positions(params, problem.observations.times, problem.forward)
    except DomainError:
        return FORWARD_FAILURE_PENALTY
    return float(np.sum((problem.observations.x_obs - pred) ** 2))


def _batch_residual(problem: EstimationProblem, pop: np.ndarray) -> np.ndarray:
    """Vectorized residual_ss over population rows (analytic forward model
    only; other modes fall back to the scalar path row by row)."""
    if problem.forward.model != "analytic":
        return np.array([residual_ss(row, problem) for row in pop])
    fx = problem.fixed
    m = pop.shape[0]
    col = {name: pop[:, i] for i, name in enumerate(problem.free_params)}
    L = col.get("L", np.full(m, fx.L))
    d_i = col.get("d_i", np.full(m, fx.d_i))
    p_v0 = 1000.0 * col["p_v"] if "p_v" in col else np.full(m, fx.p_v0)
    L_p = col["L"] if "L" in col else np.full(m, fx.L_p)
    L_0 = 25.0 * col["d_i"] if "d_i" in col else np.full(m, fx.L_0)
    p_v2 = fx.p_l if problem.forward.p_v2 is None else problem.forward.p_v2

    core = d_i - 2.0 * fx.delta
    beta = math.pi * core ** 2 * (p_v0 - p_v2) / 4.0 + fx.g
    gamma = math.pi * d_i * L_p * problem.forward.friction_coeff * fx.rho_l / 2.0
    beta1 = fx.rho_l * L_0 * math.pi * d_i ** 2 / 4.0
    with np.errstate(divide="ignore", invalid="ignore"):
        A = beta / beta1
        B = gamma / beta1
        valid = ((core > 0.0) & (L > 0.0) & (d_i > 0.0) & (beta1 > 0.0)
                 & (A > 0.0) & (B > 0.0) & np.isfinite(A) & np.isfinite(B))
        times = problem.observations.times
        z = np.sqrt(np.where(valid, A * B, 1.0))[:, None] * times[None, :]
        pred = _ln_cosh(z) / np.where(valid, B, 1.0)[:, None]
        res = np.sum((problem.observations.x_obs[None, :] - pred) ** 2, axis=1)
    return np.where(valid, res, FORWARD_FAILURE_PENALTY)


def _normalized(pop: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    lo = bounds[:, 0]
    width = bounds[:, 1] - bounds[:, 0]
    safe = np.where(width > 0.0, width, 1.0)
    return np.where(width > 0.0, (pop - lo) / safe, 0.0)


def penalized_objective(population, problem: EstimationProblem) -> np.ndarray:
    """Residual plus the swarm-dispersion penalty, per candidate.

    For each candidate the value is residual_ss plus the sum over free
    parameters of the population variance (unbiased, bound-normalized
    coordinates).  The penalty is a property of the whole population, so
    every candidate in one call receives the same added term: within one
    population the ordering is by residual, while across iterations a
    tighter swarm scores lower.  A single-candidate population has zero
    variance by convention.
    """
    pop = np.atleast_2d(np.asarray(population, dtype=float))
    if pop.size == 0:
        raise DomainError("population must be non-empty")
    if pop.ndim != 2 or pop.shape[1] != len(problem.free_params):
        raise DomainError(
            f"population must have shape (m, {len(problem.free_params)}), got {pop.shape}")
    res = _batch_residual(problem, pop)
    penalty = 0.0
    if pop.shape[0] >= 2:
        norm = _normalized(pop, problem.bound_arrays())
        penalty = float(np.sum(np.var(norm, axis=0, ddof=1)))
    return res + penalty


def linear_lsq_estimate(K, u) -> np.ndarray:
    """Least-squares solution of K q = u via a stable decomposition.

    Raises RankDeficiencyError when K has dependent columns (the normal
    equations are singular and regularization would be needed).
    """
    K = np.asarray(K, dtype=float)
    u = np.asarray(u, dtype=float).ravel()
    if K.ndim != 2 or K.shape[0] != u.size:
        raise DomainError(f"K must be (n, m) with n matching u, got {K.shape} and {u.size}")
    if not (np.all(np.isfinite(K)) and np.all(np.isfinite(u))):
        raise DomainError("K and u must be finite")
    if np.linalg.matrix_rank(K) < K.shape[1]:
        raise RankDeficiencyError(
            "design matrix is rank-deficient; regularization needed")
    q, *_ = np.linalg.lstsq(K, u, rcond=None)
    return q


# ---------------------------------------------------------------------------
# fitting drivers
# ---------------------------------------------------------------------------

# Kick schedule used by the fitting drivers when no FireflyConfig is given.
# The decay anneals exploration into consensus early; with a slower decay
# the tight swarm keeps random-walking through unidentified directions for
# thousands of sweeps and the run-to-run scatter of those parameters grows
# to the width of the box.
_FIT_ALPHA = 0.03
_FIT_ALPHA_DECAY = 0.99


def _default_fa_config(iterations: int = 5000) -> FireflyConfig:
    return FireflyConfig(n=20, iterations=iterations, beta0=1.0, gamma_fa=1.0,
                         alpha=_FIT_ALPHA, alpha_decay=_FIT_ALPHA_DECAY)


def _split_active(bounds: np.ndarray):
    """Indices of searchable dimensions vs. point-bound (pinned) ones."""
    width = bounds[:, 1] - bounds[:, 0]
    active = np.nonzero(width > 0.0)[0]
    pinned = np.nonzero(width == 0.0)[0]
    return active, pinned


# Column roles inside the penalized sweep kernel, in PARAM_NAMES order.
_KERNEL_CODES = {name: i for i, name in enumerate(PARAM_NAMES)}
_LN2 = math.log(2.0)


@njit(cache=True)
def _kernel_residual(row, codes, base, times, x_obs):
    """Sum of squared log-cosh curve errors for one denormalized candidate.

    base packs the fixed quantities in the order (L_p, d_i, L_0, p_v0,
    delta, g, rho_l, p_v2, c_f); free columns overwrite them through the
    same ties as candidate_params.
    """
    L_p = base[0]
    d_i = base[1]
    L_0 = base[2]
    p_v0 = base[3]
    for c in range(codes.size):
        code = codes[c]
        if code == 0:
            L_p = row[c]
        elif code == 1:
            d_i = row[c]
            L_0 = 25.0 * row[c]
        elif code == 4:
            p_v0 = 1000.0 * row[c]
    core = d_i - 2.0 * base[4]
    beta = math.pi * core * core * (p_v0 - base[7]) / 4.0 + base[5]
    gamma = math.pi * d_i * L_p * base[8] * base[6] / 2.0
    beta1 = base[6] * L_0 * math.pi * d_i * d_i / 4.0
    if core <= 0.0 or beta1 <= 0.0:
        return FORWARD_FAILURE_PENALTY
    A = beta / beta1
    B = gamma / beta1
    if not (A > 0.0 and B > 0.0 and math.isfinite(A) and math.isfinite(B)):
        return FORWARD_FAILURE_PENALTY
    w = math.sqrt(A * B)
    total = 0.0
    for t in range(times.size):
        z = w * times[t]
        if z > 20.0:
            lc = z - _LN2
        else:
            lc = math.log(math.cosh(z))
        r = x_obs[t] - lc / B
        total += r * r
    return total


@njit(cache=True)
def _kernel_dispersion(pos):
    """Sum over columns of the unbiased variance of normalized positions."""
    n, k = pos.shape
    total = 0.0
    for c in range(k):
        m = 0.0
        for i in range(n):
            m += pos[i, c]
        m /= n
        ss = 0.0
        for i in range(n):
            d = pos[i, c] - m
            ss += d * d
        total += ss / (n - 1.0)
    return total


@njit(cache=True)
def _penalized_sweep(pos, fit, eps, alpha, beta0, gamma_fa,
                     codes, base, times, x_obs, lo, width):
    """Pairwise sweep with the penalized objective refreshed after each move.

    The dispersion penalty is a property of the population at the moment a
    candidate is scored, so a stored brightness goes stale as soon as any
    firefly moves.  Refreshing fit[i] right after each move keeps rankings
    honest: a candidate sitting near the swarm mean scores lower than an
    equal-residual outlier, which is what pulls unidentified coordinates
    into agreement instead of leaving them wherever the best run-off
    happened to land.
    """
    n, k = pos.shape
    row = np.empty(k)
    for i in range(n):
        moved = False
        for j in range(n):
            if fit[j] < fit[i]:
                moved = True
                r2 = 0.0
                for c in range(k):
                    diff = pos[i, c] - pos[j, c]
                    r2 += diff * diff
                b = beta0 * math.exp(-gamma_fa * r2)
                for c in range(k):
                    v = pos[i, c] + b * (pos[j, c] - pos[i, c]) + alpha * eps[i, j, c]
                    if v < 0.0:
                        v = 0.0
                    elif v > 1.0:
                        v = 1.0
                    pos[i, c] = v
                for c in range(k):
                    row[c] = lo[c] + width[c] * pos[i, c]
                fit[i] = _kernel_residual(row, codes, base, times, x_obs) \
                    + _kernel_dispersion(pos)
        if not moved:
            for c in range(k):
                v = pos[i, c] + alpha * eps[i, i, c]
                if v < 0.0:
                    v = 0.0
                elif v > 1.0:
                    v = 1.0
                pos[i, c] = v
            for c in range(k):
                row[c] = lo[c] + width[c] * pos[i, c]
            fit[i] = _kernel_residual(row, codes, base, times, x_obs) \
                + _kernel_dispersion(pos)


def _run_penalized_fa(problem: EstimationProblem, bounds: np.ndarray,
                      fa_config: FireflyConfig, seed: int) -> FitResult:
    """One variance-penalized FA run with per-move objective refresh.

    Only available for the analytic forward model; the ode forward is far
    too slow to evaluate inside the sweep.
    """
    active, pinned = _split_active(bounds)
    names = problem.free_params
    if active.size == 0:
        point = bounds[:, 0].copy()
        value = float(penalized_objective(point[None, :], problem)[0])
        return FitResult(estimates={n: float(v) for n, v in zip(names, point)},
                         objective_value=value, seed=seed, iterations_used=0)

    fx = problem.fixed
    # pinned columns act as fixed values, applied through the usual ties
    base_params = fx
    if pinned.size:
        base_params = candidate_params(fx, [names[i] for i in pinned],
                                       bounds[pinned, 0])
    p_v2 = fx.p_l if problem.forward.p_v2 is None else problem.forward.p_v2
    base = np.array([base_params.L_p, base_params.d_i, base_params.L_0,
                     base_params.p_v0, base_params.delta, base_params.g,
                     base_params.rho_l, p_v2, problem.forward.friction_coeff])
    codes = np.array([_KERNEL_CODES[names[i]] for i in active], dtype=np.int64)
    times = np.ascontiguousarray(problem.observations.times)
    x_obs = np.ascontiguousarray(problem.observations.x_obs)
    lo = np.ascontiguousarray(bounds[active, 0])
    width = np.ascontiguousarray(bounds[active, 1] - bounds[active, 0])

    cfg = _dc_replace(fa_config, seed=seed)
    rng = np.random.default_rng(cfg.seed)
    n, k = cfg.n, active.size
    pos = rng.random((n, k))
    fit = np.empty(n)
    disp0 = _kernel_dispersion(pos) if n >= 2 else 0.0
    for i in range(n):
        fit[i] = _kernel_residual(lo + width * pos[i], codes, base,
                                  times, x_obs) + disp0
    best_i = int(np.argmin(fit))
    best_x = pos[best_i].copy()
    best_f = float(fit[best_i])
    alpha = cfg.alpha
    for _ in range(cfg.iterations):
        eps = _draw_kicks(cfg, rng, (n, n, k))
        _penalized_sweep(pos, fit, eps, alpha, cfg.beta0, cfg.gamma_fa,
                         codes, base, times, x_obs, lo, width)
        best_i = int(np.argmin(fit))
        if fit[best_i] < best_f:
            best_f = float(fit[best_i])
            best_x = pos[best_i].copy()
        alpha *= cfg.alpha_decay

    full = np.empty(len(names))
    full[active] = lo + width * best_x
    if pinned.size:
        full[pinned] = bounds[pinned, 0]
    return FitResult(estimates={n: float(v) for n, v in zip(names, full)},
                     objective_value=best_f, seed=seed,
                     iterations_used=cfg.iterations)


def _run_single_fa(problem: EstimationProblem, bounds: np.ndarray,
                   objective_vectorized, fa_config: FireflyConfig,
                   seed: int) -> FitResult:
    active, pinned = _split_active(bounds)
    names = problem.free_params
    if active.size == 0:
        # Fully pinned box: the single feasible point is the estimate.
        point = bounds[:, 0].copy()
        value = float(objective_vectorized(point[None, :])[0])
        return FitResult(estimates={n: float(v) for n, v in zip(names, point)},
                         objective_value=value, seed=seed, iterations_used=0)

    def embed(X_active: np.ndarray) -> np.ndarray:
        full = np.empty((X_active.shape[0], len(names)))
        full[:, active] = X_active
        full[:, pinned] = bounds[pinned, 0]
        return full

    cfg = _dc_replace(fa_config, seed=seed)
    result = optimize(lambda X: objective_vectorized(embed(X)),
                      bounds[active], cfg, vectorized=True)
    best_full = embed(result.best_x[None, :])[0]
    return FitResult(estimates={n: float(v) for n, v in zip(names, best_full)},
                     objective_value=float(result.best_f), seed=seed,
                     iterations_used=cfg.iterations)


def fit_constrained(problem: EstimationProblem,
                    fa_config: FireflyConfig | None = None,
                    n_runs: int = 40, seed: int = 0):
    """Bounded variance-penalized fit: independent FA runs plus ensemble stats.

    Requires objective_mode "penalized" and bounds for every free parameter.
    Run r uses RNG seed ``seed + r``; any seed carried by fa_config is
    overridden.  With sigma_scope "ensemble" each run minimizes the plain
    residual inside the box and the dispersion penalty is evaluated across
    the run ensemble afterwards (reported in stats.meta).

    Returns:
        (EnsembleStats, list[FitResult])
    """
    if problem.objective_mode != "penalized":
        raise DomainError("fit_constrained requires objective_mode='penalized'")
    if not isinstance(n_runs, int) or n_runs < 2:
        raise DomainError(f"n_runs must be an integer >= 2, got {n_runs}")
    bounds = problem.bound_arrays()
    fa = fa_config or _default_fa_config()
    if problem.sigma_scope == "swarm" and problem.forward.model == "analytic":
        # per-move refresh keeps the dispersion penalty current (see
        # _penalized_sweep); only affordable with the analytic forward map
        results = [_run_penalized_fa(problem, bounds, fa, seed + r)
                   for r in range(n_runs)]
    else:
        if problem.sigma_scope == "swarm":
            objective = lambda X: penalized_objective(X, problem)
        else:
            objective = lambda X: _batch_residual(problem, X)
        results = [_run_single_fa(problem, bounds, objective, fa, seed + r)
                   for r in range(n_runs)]
    meta = {"seed": seed, "sigma_scope": problem.sigma_scope}
    if problem.sigma_scope == "ensemble":
        pop = np.array([[r.estimates[n] for n in problem.free_params] for r in results])
        norm = _normalized(pop, bounds)
        dispersion = float(np.sum(np.var(norm, axis=0, ddof=1)))
        meta["ensemble_penalty"] = dispersion
        meta["ensemble_objective"] = float(
            np.sum([r.objective_value for r in results]) + dispersion)
    stats = EnsembleStats.from_results(results, problem.free_params, meta=meta)
    return stats, results


def fit_lsq(problem: EstimationProblem, n_restarts: int = 40, seed: int = 0,
            fa_config: FireflyConfig | None = None):
    """Multi-start plain least-squares fit over a weak positivity box.

    Uses problem.bounds when present, otherwise the module-level
    LOOSE_BOUNDS.  Restart r uses seed ``seed + r``.  Individual restart
    failures are recorded rather than fatal as long as at least two
    restarts succeed.

    Returns:
        (list[FitResult], EnsembleStats); failures are listed in
        stats.meta["failures"] as (seed, message) pairs.
    """
    if problem.objective_mode != "lsq":
        raise DomainError("fit_lsq requires objective_mode='lsq'")
    if not isinstance(n_restarts, int) or n_restarts < 1:
        raise DomainError(f"n_restarts must be an integer >= 1, got {n_restarts}")
    if problem.bounds is not None:
        bounds = problem.bound_arrays()
    else:
        bounds = np.array([LOOSE_BOUNDS[n] for n in problem.free_params])
    fa = fa_config or _default_fa_config(iterations=2000)
    objective = lambda X: _batch_residual(problem, X)
    results, failures = [], []
    for r in range(n_restarts):
        try:
            results.append(_run_single_fa(problem, bounds, objective, fa, seed + r))
        except Exception as exc:  # noqa: BLE001 - survive isolated restart failures
            failures.append((seed + r, str(exc)))
    if len(results) < 2:
        raise RuntimeError(
            f"only {len(results)} of {n_restarts} restarts succeeded; "
            f"failures: {failures}")
    stats = EnsembleStats.from_results(
        results, problem.free_params,
        meta={"seed": seed, "failures": failures})
    return results, stats
