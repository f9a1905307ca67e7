"""Inverse-problem layer: forward map, synthetic observations, objectives,
and the two fitting drivers on small, fast configurations."""

import math

import numpy as np
import pytest

from phpipe.errors import DomainError, RankDeficiencyError
from phpipe.estimation import (
    CONSTRAINED_BOUNDS,
    FORWARD_FAILURE_PENALTY,
    LOOSE_BOUNDS,
    PARAM_NAMES,
    EnsembleStats,
    EstimationProblem,
    FitResult,
    ForwardConfig,
    ObservationSet,
    candidate_params,
    fit_constrained,
    fit_lsq,
    generate_synthetic,
    linear_lsq_estimate,
    observation_times,
    penalized_objective,
    predict_positions,
    residual_ss,
)
from phpipe.firefly import FireflyConfig
from phpipe.model import PhysicalParams

# frozen curve value at the defaults (see test_analytic)
ORACLE_XP_2MS = 0.025761449985954678

TRUTH = (0.18, 0.0033, 20.0, 40.0, 100.0)


def small_fa(iterations=400, n=12):
    # annealing schedule: without decay the dispersion term never settles
    return FireflyConfig(n=n, iterations=iterations, alpha=0.03, alpha_decay=0.99)


@pytest.fixture
def params():
    return PhysicalParams()


@pytest.fixture
def noiseless(params):
    return generate_synthetic(params, n_points=25, noise_sigma=0.0)


@pytest.fixture
def problem(noiseless):
    return EstimationProblem(observations=noiseless, bounds=CONSTRAINED_BOUNDS)


def test_observation_times_grid():
    t = observation_times(25, 4e-3)
    assert t.shape == (25,)
    assert t[0] == pytest.approx(4e-3 / 25, rel=1e-15)
    assert t[-1] == 4e-3
    assert np.allclose(np.diff(t), 4e-3 / 25, rtol=1e-12)
    with pytest.raises(DomainError):
        observation_times(1, 4e-3)
    with pytest.raises(DomainError):
        observation_times(25, 0.0)


def test_candidate_params_ties(params):
    p = candidate_params(params, ("L", "d_i", "T_v", "T_w", "p_v"),
                         (0.2, 0.003, 22.0, 42.0, 90.0))
    assert p.L == 0.2 and p.L_p == 0.2
    assert p.d_i == 0.003 and p.L_0 == 25.0 * 0.003
    assert p.T_v0 == 22.0
    assert p.T_w == 42.0
    assert p.p_v0 == 90000.0
    assert p.delta == params.delta          # untouched fields carried over
    with pytest.raises(DomainError):
        candidate_params(params, ("L",), (0.2, 0.3))
    with pytest.raises(DomainError):
        candidate_params(params, ("rho_l",), (1000.0,))


def test_predict_positions_analytic_frozen(params):
    x = predict_positions(params, np.array([2e-3]), ForwardConfig())
    assert x[0] == pytest.approx(ORACLE_XP_2MS, rel=1e-13)


def test_predict_positions_ode_mechanics(params):
    t = observation_times(10, 4e-3)
    x = predict_positions(params, t, ForwardConfig(model="ode", ode_dt=1e-8))
    assert x.shape == t.shape
    assert np.all(np.isfinite(x))
    assert abs(x[0]) < 1e-5                 # starts from rest at the origin
    # the coupled model quenches its own driving pressure, so the curve
    # must not follow the fixed-coefficient analytic startup
    ana = predict_positions(params, t, ForwardConfig())
    assert np.max(np.abs(x - ana)) > 10.0 * np.max(np.abs(x))


def test_generate_synthetic_noiseless_round_trip(params, noiseless):
    clean = predict_positions(params, noiseless.times, ForwardConfig())
    assert np.array_equal(noiseless.x_obs, clean)
    assert noiseless.noise_sigma == 0.0
    assert noiseless.source == "synthetic"
    assert noiseless.truth is params


def test_generate_synthetic_relative_noise(params):
    obs = generate_synthetic(params, n_points=25, noise_rel=0.02, seed=2)
    clean = predict_positions(params, obs.times, ForwardConfig())
    assert obs.noise_sigma == pytest.approx(
        0.02 * math.sqrt(float(np.mean(clean ** 2))), rel=1e-12)
    again = generate_synthetic(params, n_points=25, noise_rel=0.02, seed=2)
    assert np.array_equal(obs.x_obs, again.x_obs)
    other = generate_synthetic(params, n_points=25, noise_rel=0.02, seed=3)
    assert not np.array_equal(obs.x_obs, other.x_obs)


def test_generate_synthetic_noise_level_is_calibrated(params):
    # residual at the truth ~ sigma^2 * n; the ratio over many seeds must
    # average near 1 or the noise model is mis-scaled
    sigma = 5e-4
    prob = None
    ratios = []
    for seed in range(100):
        obs = generate_synthetic(params, n_points=25, noise_sigma=sigma, seed=seed)
        prob = EstimationProblem(observations=obs, bounds=CONSTRAINED_BOUNDS)
        ratios.append(residual_ss(TRUTH, prob) / (sigma ** 2 * 25))
    assert 0.7 < float(np.mean(ratios)) < 1.3


def test_residual_accepts_mapping_and_sequence(problem):
    r_seq = residual_ss(TRUTH, problem)
    r_map = residual_ss(dict(zip(PARAM_NAMES, TRUTH)), problem)
    assert r_seq == r_map == 0.0
    with pytest.raises(DomainError):
        residual_ss({"L": 0.18}, problem)
    with pytest.raises(DomainError):
        residual_ss((0.18, 0.0033), problem)


def test_residual_respects_free_param_order(noiseless):
    prob = EstimationProblem(observations=noiseless, free_params=("p_v", "L"),
                             bounds=CONSTRAINED_BOUNDS)
    assert residual_ss((100.0, 0.18), prob) == 0.0
    assert residual_ss((100.0, 0.18), prob) != residual_ss((100.0, 0.19), prob)


def test_residual_forward_failure_penalty(problem, params):
    # a bore thinner than twice the film leaves no vapor core, so the
    # candidate has no forward curve and scores the finite penalty
    bad = (0.18, 1e-5, 20.0, 40.0, 100.0)
    assert residual_ss(bad, problem) == FORWARD_FAILURE_PENALTY
    assert FORWARD_FAILURE_PENALTY == 1e12


def test_penalized_objective_dispersion_term(problem):
    # two candidates differing in one parameter by a known normalized gap
    lo, hi = CONSTRAINED_BOUNDS["T_v"]
    a = np.array(TRUTH)
    b = a.copy()
    b[2] += 2.0
    pop = np.vstack([a, b])
    expected_penalty = 0.5 * (2.0 / (hi - lo)) ** 2
    out = penalized_objective(pop, problem)
    res = np.array([residual_ss(a, problem), residual_ss(b, problem)])
    assert out == pytest.approx(res + expected_penalty, rel=1e-12)
    # the penalty never pushes a value below the bare residual
    assert np.all(out >= res)


def test_penalized_objective_single_row_equals_residual(problem):
    row = np.array(TRUTH)
    out = penalized_objective(row[None, :], problem)
    assert out.shape == (1,)
    assert out[0] == residual_ss(row, problem)


def test_penalized_objective_row_order_invariance(problem):
    rng = np.random.default_rng(5)
    b = problem.bound_arrays()
    pop = b[:, 0] + rng.random((6, 5)) * (b[:, 1] - b[:, 0])
    out = penalized_objective(pop, problem)
    perm = rng.permutation(6)
    out_perm = penalized_objective(pop[perm], problem)
    assert np.array_equal(out[perm], out_perm)


def test_penalized_objective_batch_matches_scalar(problem):
    rng = np.random.default_rng(7)
    b = problem.bound_arrays()
    pop = b[:, 0] + rng.random((5, 5)) * (b[:, 1] - b[:, 0])
    norm = (pop - b[:, 0]) / (b[:, 1] - b[:, 0])
    penalty = float(np.sum(np.var(norm, axis=0, ddof=1)))
    out = penalized_objective(pop, problem)
    scalar = np.array([residual_ss(row, problem) for row in pop])
    assert out == pytest.approx(scalar + penalty, rel=1e-12)


def test_penalized_objective_shape_errors(problem):
    with pytest.raises(DomainError):
        penalized_objective(np.zeros((2, 3)), problem)
    with pytest.raises(DomainError):
        penalized_objective(np.zeros((0, 5)), problem)


def test_linear_lsq_identity_and_line():
    q = linear_lsq_estimate(np.eye(3), [1.0, 2.0, 3.0])
    assert q == pytest.approx([1.0, 2.0, 3.0], rel=1e-14)
    t = np.linspace(0.0, 1.0, 20)
    K = np.column_stack([np.ones_like(t), t])
    u = 0.7 + 2.5 * t
    q = linear_lsq_estimate(K, u)
    assert q == pytest.approx([0.7, 2.5], rel=1e-12)


def test_linear_lsq_rank_deficiency():
    t = np.linspace(0.0, 1.0, 10)
    K = np.column_stack([t, 2.0 * t])
    with pytest.raises(RankDeficiencyError):
        linear_lsq_estimate(K, t)
    with pytest.raises(DomainError):
        linear_lsq_estimate(np.ones((3, 1)), [1.0, 2.0])


def test_point_bounds_collapse_to_exact_estimates(noiseless):
    point = {n: (v, v) for n, v in zip(PARAM_NAMES, TRUTH)}
    prob = EstimationProblem(observations=noiseless, bounds=point)
    stats, results = fit_constrained(prob, fa_config=small_fa(iterations=5, n=4),
                                     n_runs=2, seed=0)
    for r in results:
        assert tuple(r.estimates[n] for n in PARAM_NAMES) == TRUTH
    assert all(stats.std[n] == 0.0 for n in PARAM_NAMES)


def test_single_parameter_recovery(noiseless):
    prob = EstimationProblem(observations=noiseless, free_params=("p_v",),
                             bounds={"p_v": (80.0, 120.0)})
    stats, results = fit_constrained(prob, fa_config=small_fa(iterations=1000),
                                     n_runs=3, seed=0)
    assert abs(stats.mean["p_v"] - 100.0) < 3.0
    assert stats.std["p_v"] < 8.0
    for r in results:
        assert 80.0 <= r.estimates["p_v"] <= 120.0


def test_nested_box_shrinks_scatter(params):
    obs = generate_synthetic(params, n_points=25, noise_rel=0.02, seed=2)
    tight = dict(CONSTRAINED_BOUNDS)
    tight["T_v"] = (18.0, 22.0)
    wide = dict(CONSTRAINED_BOUNDS)
    wide["T_v"] = (10.0, 40.0)
    st_tight, _ = fit_constrained(
        EstimationProblem(observations=obs, bounds=tight),
        fa_config=small_fa(), n_runs=8, seed=1)
    st_wide, _ = fit_constrained(
        EstimationProblem(observations=obs, bounds=wide),
        fa_config=small_fa(), n_runs=8, seed=1)
    assert st_tight.std["T_v"] <= st_wide.std["T_v"]


def test_fit_constrained_contract(problem):
    stats, results = fit_constrained(problem, fa_config=small_fa(iterations=200),
                                     n_runs=3, seed=5)
    assert stats.n_runs == 3 and len(results) == 3
    assert stats.meta["sigma_scope"] == "swarm"
    b = problem.bound_arrays()
    for r in results:
        assert isinstance(r, FitResult)
        vals = np.array([r.estimates[n] for n in PARAM_NAMES])
        assert np.all(vals >= b[:, 0]) and np.all(vals <= b[:, 1])
        assert math.isfinite(r.objective_value)
    seeds = [r.seed for r in results]
    assert seeds == [5, 6, 7]


def test_fit_constrained_deterministic(problem):
    a_stats, a_res = fit_constrained(problem, fa_config=small_fa(iterations=150),
                                     n_runs=2, seed=9)
    b_stats, b_res = fit_constrained(problem, fa_config=small_fa(iterations=150),
                                     n_runs=2, seed=9)
    for ra, rb in zip(a_res, b_res):
        assert ra.estimates == rb.estimates
    assert a_stats.mean == b_stats.mean


def test_fit_constrained_ensemble_scope(noiseless):
    prob = EstimationProblem(observations=noiseless, bounds=CONSTRAINED_BOUNDS,
                             sigma_scope="ensemble")
    stats, results = fit_constrained(prob, fa_config=small_fa(iterations=200),
                                     n_runs=3, seed=0)
    meta = stats.meta
    assert meta["sigma_scope"] == "ensemble"
    assert meta["ensemble_penalty"] >= 0.0
    total = float(np.sum([r.objective_value for r in results]))
    assert meta["ensemble_objective"] == pytest.approx(
        total + meta["ensemble_penalty"], rel=1e-12)


def test_fit_constrained_mode_and_run_count_errors(problem):
    with pytest.raises(DomainError):
        fit_constrained(problem.replace(objective_mode="lsq"))
    with pytest.raises(DomainError):
        fit_constrained(problem, n_runs=1)
    no_bounds = problem.replace(bounds=None)
    with pytest.raises(DomainError):
        fit_constrained(no_bounds, fa_config=small_fa(iterations=5), n_runs=2)


def test_fit_lsq_contract(noiseless):
    prob = EstimationProblem(observations=noiseless, objective_mode="lsq")
    results, stats = fit_lsq(prob, n_restarts=3, seed=2,
                             fa_config=small_fa(iterations=300))
    assert len(results) == 3
    assert stats.meta["failures"] == []
    wide = np.array([LOOSE_BOUNDS[n] for n in PARAM_NAMES])
    for r in results:
        vals = np.array([r.estimates[n] for n in PARAM_NAMES])
        assert np.all(vals >= wide[:, 0]) and np.all(vals <= wide[:, 1])


def test_fit_lsq_mode_and_restart_errors(problem, noiseless):
    with pytest.raises(DomainError):
        fit_lsq(problem)
    lsq_prob = EstimationProblem(observations=noiseless, objective_mode="lsq")
    with pytest.raises(DomainError):
        fit_lsq(lsq_prob, n_restarts=0)


def test_observation_set_validation():
    t = np.array([0.1, 0.2, 0.3])
    x = np.array([1.0, 2.0, 3.0])
    obs = ObservationSet(times=t, x_obs=x)
    assert len(obs) == 3
    assert obs.samples == [(0.1, 1.0), (0.2, 2.0), (0.3, 3.0)]
    with pytest.raises(DomainError):
        ObservationSet(times=t[::-1], x_obs=x)
    with pytest.raises(DomainError):
        ObservationSet(times=t[:1], x_obs=x[:1])
    with pytest.raises(DomainError):
        ObservationSet(times=t, x_obs=np.array([1.0, float("nan"), 3.0]))
    with pytest.raises(DomainError):
        ObservationSet(times=t, x_obs=x, noise_sigma=-1.0)
    with pytest.raises(DomainError):
        ObservationSet(times=t, x_obs=x, source="guess")


def test_problem_validation(noiseless):
    with pytest.raises(DomainError):
        EstimationProblem(observations=noiseless, free_params=())
    with pytest.raises(DomainError):
        EstimationProblem(observations=noiseless, free_params=("L", "L"))
    with pytest.raises(DomainError):
        EstimationProblem(observations=noiseless, free_params=("porosity",))
    with pytest.raises(DomainError):
        EstimationProblem(observations=noiseless, bounds={"L": (0.3, 0.1)})
    with pytest.raises(DomainError):
        EstimationProblem(observations=noiseless, bounds={"width": (0.0, 1.0)})
    with pytest.raises(DomainError):
        EstimationProblem(observations=noiseless, objective_mode="map")
    with pytest.raises(DomainError):
        EstimationProblem(observations=noiseless, sigma_scope="global")
    partial = EstimationProblem(observations=noiseless, bounds={"L": (0.1, 0.3)})
    with pytest.raises(DomainError):
        partial.bound_arrays()


def test_ensemble_stats_formulas():
    results = [FitResult(estimates={"L": v}, objective_value=0.0, seed=i,
                         iterations_used=1)
               for i, v in enumerate((0.1, 0.2, 0.4))]
    stats = EnsembleStats.from_results(results, ("L",))
    vals = np.array([0.1, 0.2, 0.4])
    assert stats.mean["L"] == pytest.approx(vals.mean(), rel=1e-15)
    assert stats.std["L"] == pytest.approx(vals.std(ddof=1), rel=1e-15)
    assert stats.min["L"] == 0.1 and stats.max["L"] == 0.4
    with pytest.raises(DomainError):
        EnsembleStats.from_results(results[:1], ("L",))


def test_ode_forward_noiseless_round_trip(params):
    fwd = ForwardConfig(model="ode", t_end=1e-3, ode_dt=1e-8)
    obs = generate_synthetic(params, forward_config=fwd, n_points=5,
                             noise_sigma=0.0)
    prob = EstimationProblem(observations=obs, bounds=CONSTRAINED_BOUNDS,
                             forward=fwd)
    assert residual_ss(TRUTH, prob) == 0.0
