"""Optimizer kernel checks: attraction law, heavy-tailed kicks, the single
move contract, and the full sweep driver on toy objectives."""

import math

import numpy as np
import pytest

from phpipe.errors import DomainError, ObjectiveEvaluationError
from phpipe.firefly import (
    LEVY_S_MIN,
    NOISE_KINDS,
    FireflyConfig,
    OptimizeResult,
    attractiveness,
    levy_step,
    move_firefly,
    optimize,
)


def sphere(x):
    return float(np.sum(np.asarray(x) ** 2))


def test_attractiveness_values():
    assert attractiveness(1.5, 2.0, 0.0) == 1.5
    r = 0.7
    assert attractiveness(1.5, 2.0, r) == 1.5 * math.exp(-2.0 * r * r)
    grid = np.linspace(0.0, 3.0, 50)
    vals = [attractiveness(1.0, 1.0, r) for r in grid]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        attractiveness(1.0, 1.0, -0.1)


def test_levy_tail_law():
    # P(|s| > k) = (s_min / k)^(lambda - 1) for the inverse-power transform
    rng = np.random.default_rng(11)
    s = levy_step(2.0, rng, size=1_000_000)
    mag = np.abs(s)
    assert mag.min() >= LEVY_S_MIN
    for k_mult, expected in ((10.0, 0.1), (100.0, 0.01)):
        frac = np.mean(mag > k_mult * LEVY_S_MIN)
        assert frac == pytest.approx(expected, rel=0.1)


def test_levy_sign_symmetry():
    rng = np.random.default_rng(4)
    s = levy_step(1.5, rng, size=200_000)
    assert abs(np.mean(np.sign(s))) < 0.01


def test_levy_scalar_and_validation():
    rng = np.random.default_rng(0)
    out = levy_step(2.5, rng)
    assert isinstance(out, float) and abs(out) >= LEVY_S_MIN
    with pytest.raises(DomainError):
        levy_step(1.0, rng)
    with pytest.raises(DomainError):
        levy_step(3.5, rng)


def test_move_toward_dimmer_is_identity_without_randomness():
    cfg = FireflyConfig(n=2, iterations=1)
    x_i = np.array([0.2, 0.8])
    x_j = np.array([0.5, 0.5])
    rng = np.random.default_rng(9)
    out = move_firefly(x_i, x_j, f_i=1.0, f_j=2.0, config=cfg, rng=rng)
    assert np.array_equal(out, x_i)
    assert out is not x_i
    # the skipped move must not consume any randomness
    assert rng.random() == np.random.default_rng(9).random()


def test_move_full_attraction_lands_on_target():
    cfg = FireflyConfig(n=2, iterations=1, beta0=1.0, gamma_fa=0.0, alpha=0.0)
    rng = np.random.default_rng(0)
    x_i = np.array([0.1, 0.9, 0.4])
    x_j = np.array([0.6, 0.2, 0.5])
    out = move_firefly(x_i, x_j, f_i=2.0, f_j=1.0, config=cfg, rng=rng)
    assert out == pytest.approx(x_j, rel=1e-12)


def test_move_respects_bounds():
    cfg = FireflyConfig(n=2, iterations=1, beta0=0.0, gamma_fa=1.0, alpha=50.0)
    bounds = np.array([[-2.0, 3.0], [10.0, 20.0]])
    rng = np.random.default_rng(1)
    for _ in range(50):
        out = move_firefly([2.9, 19.0], [-1.0, 11.0], 2.0, 1.0, cfg, rng, bounds)
        assert np.all(out >= bounds[:, 0]) and np.all(out <= bounds[:, 1])


def test_move_default_box_matches_explicit_unit_box():
    cfg = FireflyConfig(n=2, iterations=1, alpha=0.3)
    unit = np.array([[0.0, 1.0], [0.0, 1.0]])
    a = move_firefly([0.2, 0.7], [0.6, 0.1], 2.0, 1.0, cfg,
                     np.random.default_rng(5))
    b = move_firefly([0.2, 0.7], [0.6, 0.1], 2.0, 1.0, cfg,
                     np.random.default_rng(5), bounds=unit)
    assert np.array_equal(a, b)


def test_move_shape_mismatch():
    cfg = FireflyConfig(n=2, iterations=1)
    with pytest.raises(DomainError):
        move_firefly([0.1, 0.2], [0.3], 2.0, 1.0, cfg, np.random.default_rng(0))


def test_config_validation():
    with pytest.raises(DomainError):
        FireflyConfig(n=1)
    with pytest.raises(DomainError):
        FireflyConfig(iterations=0)
    with pytest.raises(DomainError):
        FireflyConfig(beta0=-1.0)
    with pytest.raises(DomainError):
        FireflyConfig(alpha=float("nan"))
    with pytest.raises(DomainError):
        FireflyConfig(alpha_decay=0.0)
    with pytest.raises(DomainError):
        FireflyConfig(alpha_decay=1.5)
    with pytest.raises(DomainError):
        FireflyConfig(noise="brownian")
    with pytest.raises(DomainError):
        FireflyConfig(noise="levy")               # missing tail exponent
    with pytest.raises(DomainError):
        FireflyConfig(noise="levy", levy_lambda=3.5)
    assert FireflyConfig(noise="levy", levy_lambda=2.0).levy_lambda == 2.0
    assert set(NOISE_KINDS) == {"uniform", "gaussian", "levy"}


def test_bounds_validation():
    cfg = FireflyConfig(n=3, iterations=1)
    with pytest.raises(DomainError):
        optimize(sphere, [[1.0, 1.0]], cfg)
    with pytest.raises(DomainError):
        optimize(sphere, [[0.0, 1.0, 2.0]], cfg)
    with pytest.raises(DomainError):
        optimize(sphere, [[0.0, float("inf")]], cfg)


def test_optimize_frozen_swarm_without_attraction_or_kicks():
    cfg = FireflyConfig(n=6, iterations=20, beta0=0.0, alpha=0.0, seed=3)
    res = optimize(sphere, [[-1.0, 1.0]] * 3, cfg, record_positions=True)
    assert np.array_equal(res.trace[0], res.trace[-1])
    assert res.history[0] == res.history[-1] == res.best_f
    assert res.best_f == pytest.approx(sphere(res.best_x), rel=1e-12)


def test_optimize_history_contract():
    cfg = FireflyConfig(n=10, iterations=150, alpha=0.2, alpha_decay=0.97, seed=1)
    res = optimize(sphere, [[-2.0, 2.0]] * 2, cfg)
    assert res.history.shape == (150,)
    assert np.all(np.diff(res.history) <= 0.0)
    assert res.history[-1] == res.best_f
    assert res.n_evals == 10 * 151


def test_optimize_containment():
    bounds = np.array([[-3.0, -1.0], [5.0, 9.0]])
    cfg = FireflyConfig(n=8, iterations=60, alpha=0.4, seed=2)
    res = optimize(sphere, bounds, cfg)
    assert np.all(res.best_x >= bounds[:, 0]) and np.all(res.best_x <= bounds[:, 1])
    assert np.all(res.swarm.positions >= bounds[:, 0])
    assert np.all(res.swarm.positions <= bounds[:, 1])


def test_optimize_deterministic_per_seed():
    cfg = FireflyConfig(n=10, iterations=80, seed=42)
    bounds = [[-2.0, 2.0]] * 3
    a = optimize(sphere, bounds, cfg)
    b = optimize(sphere, bounds, cfg)
    assert np.array_equal(a.best_x, b.best_x)
    assert a.best_f == b.best_f
    assert np.array_equal(a.history, b.history)
    c = optimize(sphere, bounds, FireflyConfig(n=10, iterations=80, seed=43))
    assert not np.array_equal(a.best_x, c.best_x)


def test_optimize_constant_objective():
    cfg = FireflyConfig(n=5, iterations=30, seed=0)
    res = optimize(lambda x: 7.5, [[0.0, 1.0]] * 2, cfg)
    assert res.best_f == 7.5
    assert np.all(res.history == 7.5)


def test_optimize_one_dimensional_target():
    cfg = FireflyConfig(n=15, iterations=200, alpha=0.2, alpha_decay=0.95, seed=6)
    res = optimize(lambda x: abs(float(x[0]) - 0.3), [[0.0, 1.0]], cfg)
    assert abs(res.best_x[0] - 0.3) < 1e-3


def test_optimize_vectorized_matches_scalar():
    cfg = FireflyConfig(n=12, iterations=100, alpha=0.25, alpha_decay=0.98, seed=5)
    bounds = [[-5.0, 5.0]] * 4

    def batch(X):
        return np.sum(X ** 2, axis=1)

    a = optimize(sphere, bounds, cfg)
    b = optimize(batch, bounds, cfg, vectorized=True)
    assert np.array_equal(a.best_x, b.best_x)
    assert a.best_f == b.best_f
    assert np.array_equal(a.history, b.history)


def test_optimize_accepts_inf_penalties():
    def half_penalized(x):
        return float("inf") if x[0] > 0.0 else sphere(x)

    cfg = FireflyConfig(n=10, iterations=80, seed=8)
    res = optimize(half_penalized, [[-1.0, 1.0]] * 2, cfg)
    assert math.isfinite(res.best_f)
    assert res.best_x[0] <= 0.0


def test_optimize_nan_objective_error_carries_position():
    def bad(x):
        return float("nan") if x[0] > 0.5 else sphere(x)

    cfg = FireflyConfig(n=10, iterations=50, seed=0)
    with pytest.raises(ObjectiveEvaluationError) as exc_info:
        optimize(bad, [[0.0, 1.0]] * 2, cfg)
    assert exc_info.value.position is not None


def test_optimize_vectorized_shape_error():
    cfg = FireflyConfig(n=4, iterations=5, seed=0)
    with pytest.raises(ObjectiveEvaluationError):
        optimize(lambda X: np.zeros(3), [[0.0, 1.0]], cfg, vectorized=True)


def test_optimize_trace_recording():
    cfg = FireflyConfig(n=7, iterations=25, seed=9)
    bounds = np.array([[-1.0, 2.0]] * 3)
    res = optimize(sphere, bounds, cfg, record_positions=True)
    assert isinstance(res, OptimizeResult)
    assert len(res.trace) == 25
    for snap in (res.trace[0], res.trace[-1]):
        assert snap.shape == (7, 3)
        assert np.all(snap >= bounds[:, 0]) and np.all(snap <= bounds[:, 1])


def test_optimize_gaussian_and_levy_noise_run():
    bounds = [[-1.0, 1.0]] * 2
    for noise, lam in (("gaussian", None), ("levy", 2.0)):
        cfg = FireflyConfig(n=8, iterations=40, alpha=0.1, noise=noise,
                            levy_lambda=lam, seed=3)
        res = optimize(sphere, bounds, cfg)
        assert math.isfinite(res.best_f)
