"""Three-state toy world: shortcut bias vs expert-sampled convergence."""

import math

import numpy as np
import pytest

from certlab import curriculum as cur
from certlab.errors import InvalidInputError


WORLD = cur.ToyWorld()


class TestWorld:
    def test_feature_map_is_pinned(self):
        np.testing.assert_array_equal(
            WORLD.features, [[1.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 0.0]]
        )
        np.testing.assert_array_equal(WORLD.valuation, [1.0, 0.0, 0.0])

    def test_bad_valuation_rejected(self):
        with pytest.raises(InvalidInputError):
            cur.ToyWorld(valuation=np.array([1.0, 1.0, 0.0]))


class TestSuccessRate:
    def test_zero_weights_are_uniform(self):
        assert abs(cur.success_rate(WORLD, np.zeros(3)) - 1.0 / 3.0) <= 1e-15

    def test_strong_expert(self):
        expected = math.exp(10.0) / (math.exp(10.0) + 2.0)
        assert abs(cur.success_rate(WORLD, np.array([10.0, 0.0, 0.0])) - expected) <= 1e-12
        assert abs(expected - 0.999909) <= 1e-6

    def test_shortcut_weights_kill_success(self):
        got = cur.success_rate(WORLD, np.array([0.0, 10.0, 10.0]))
        expected = 1.0 / (1.0 + math.exp(20.0) + math.exp(10.0))
        assert abs(got - expected) <= 1e-20
        assert abs(got - 2.06e-9) <= 1e-11

    def test_common_score_shift_is_invisible(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            theta = rng.uniform(-4, 4, 3)
            shifted = theta + 1.7 * np.array([1.0, 1.0, 0.0])
            assert abs(cur.success_rate(WORLD, theta) - cur.success_rate(WORLD, shifted)) <= 1e-12

    def test_policy_norm_bound_enforced(self):
        with pytest.raises(InvalidInputError):
            cur.LogLinearPolicy(theta=np.array([60.0, 0.0, 0.0]))


class TestDatasets:
    def test_biased_is_all_shortcut(self):
        data = cur.generate_dataset(WORLD, "biased", None, 100, seed=0)
        assert data.n == 100
        assert np.all(data.samples == cur.SHORTCUT)

    def test_biased_invariant_enforced(self):
        with pytest.raises(InvalidInputError):
            cur.LatentDataset(samples=np.array([0, 1, 1]), provenance="biased")

    def test_curriculum_tracks_expert_frequencies(self):
        theta = np.array([10.0, 0.0, 0.0])
        n = 10_000
        data = cur.generate_dataset(WORLD, "curriculum", theta, n, seed=1)
        p = cur.success_rate(WORLD, theta)
        freq = float(np.mean(data.samples == cur.EXPERT))
        assert abs(freq - p) <= 3.0 * math.sqrt(p * (1.0 - p) / n) + 1e-12

    def test_uniform_expert_frequencies(self):
        n = 30_000
        data = cur.generate_dataset(WORLD, "curriculum", np.zeros(3), n, seed=2)
        counts = data.counts()
        for k in range(3):
            assert abs(counts[k] / n - 1.0 / 3.0) <= 3.0 * math.sqrt((1 / 3) * (2 / 3) / n)

    def test_curriculum_needs_expert(self):
        with pytest.raises(InvalidInputError):
            cur.generate_dataset(WORLD, "curriculum", None, 10, seed=0)


class TestMleFit:
    def test_balanced_data_fits_flat_scores(self):
        data = cur.LatentDataset(samples=np.tile([0, 1, 2], 600), provenance="curriculum")
        fit = cur.mle_fit(WORLD, data)
        scores = WORLD.features @ fit.policy.theta
        assert scores.max() - scores.min() <= 1e-4
        assert abs(cur.success_rate(WORLD, fit.policy) - 1.0 / 3.0) <= 1e-4
        assert fit.final_grad_norm < 1e-8

    def test_biased_data_caps_success(self):
        data = cur.generate_dataset(WORLD, "biased", None, 1000, seed=0)
        fit = cur.mle_fit(WORLD, data)
        assert cur.success_rate(WORLD, fit.policy) <= 0.01

    def test_strong_expert_recovered(self):
        theta = np.array([10.0, 0.0, 0.0])
        data = cur.generate_dataset(WORLD, "curriculum", theta, 100_000, seed=3)
        fit = cur.mle_fit(WORLD, data)
        assert abs(cur.success_rate(WORLD, fit.policy) - cur.success_rate(WORLD, theta)) <= 0.005

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        h = 1e-5
        for _ in range(25):
            theta = rng.uniform(-5, 5, 3)
            counts = rng.integers(1, 40, 3).astype(float)
            grad = cur.log_likelihood_grad(WORLD, theta, counts)
            numeric = np.zeros(3)
            for i in range(3):
                up, down = theta.copy(), theta.copy()
                up[i] += h
                down[i] -= h
                numeric[i] = (
                    cur.log_likelihood(WORLD, up, counts) - cur.log_likelihood(WORLD, down, counts)
                ) / (2 * h)
            assert np.linalg.norm(grad - numeric) <= 1e-6 * max(np.linalg.norm(grad), 1e-9)

    def test_projection_keeps_iterates_in_ball(self):
        data = cur.generate_dataset(WORLD, "biased", None, 10, seed=0)
        fit = cur.mle_fit(WORLD, data, iterations=200, step=5.0, param_bound=3.0)
        assert np.linalg.norm(fit.policy.theta) <= 3.0 + 1e-9


class TestSweep:
    def test_total_variation(self):
        assert cur.total_variation([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]) == 1.0
        assert cur.total_variation([0.5, 0.5, 0.0], [0.5, 0.5, 0.0]) == 0.0

    def test_curriculum_sweep_shrinks(self):
        result = cur.convergence_sweep(
            WORLD, np.array([2.0, 0.0, 0.0]), (100, 10_000), trials_per_n=6, seed=0
        )
        assert result.rows[0].mean_gap > result.rows[-1].mean_gap
        assert result.slope < 0.0

    def test_biased_sweep_is_flat(self):
        result = cur.convergence_sweep(
            WORLD, np.array([2.0, 0.0, 0.0]), (100, 1000), trials_per_n=3, seed=0,
            provenance="biased",
        )
        gaps = [row.mean_gap for row in result.rows]
        assert abs(gaps[0] - gaps[1]) <= 1e-12  # biased fits ignore n entirely

    def test_grid_validation(self):
        with pytest.raises(InvalidInputError):
            cur.convergence_sweep(WORLD, np.zeros(3), (100,), trials_per_n=5, seed=0)
        with pytest.raises(InvalidInputError):
            cur.convergence_sweep(WORLD, np.zeros(3), (100, 50), trials_per_n=5, seed=0)
