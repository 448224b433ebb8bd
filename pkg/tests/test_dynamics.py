"""Discrete argmax-reset chains, continuous error accumulation, retention curve."""

import math

import numpy as np
import pytest

from certlab import dynamics
from certlab.errors import InvalidInputError, SamplingExhaustedError
from certlab.seeding import rng_for


class TestSubDecisionalCheck:
    def test_margin_not_crossed(self):
        assert dynamics.check_sub_decisional([2.0, 1.0, 0.0], [0.0, 0.5, 0.0])

    def test_margin_crossed(self):
        assert not dynamics.check_sub_decisional([2.0, 1.0, 0.0], [0.0, 1.5, 0.0])

    def test_tie_goes_to_lowest_index(self):
        # perturbed logits tie at 1.4; index 0 wins on both sides
        assert dynamics.check_sub_decisional([2.0, 1.0, 0.0], [-0.6, 0.4, 0.0])

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            dynamics.check_sub_decisional([1.0, 0.0], [0.0, 0.0, 0.0])


class TestNoiseSampler:
    def test_zero_scale_is_zero_noise(self):
        noise, rejections = dynamics.sample_sub_decisional_noise(
            [3.0, 1.0, 0.0], 0.0, rng_for(0, "x")
        )
        assert not noise.any()
        assert rejections == 0

    def test_postcondition_always_holds(self):
        rng = rng_for(1, "noise")
        logits = np.array([2.0, 1.0, 0.5, 0.0])
        for _ in range(200):
            noise, _ = dynamics.sample_sub_decisional_noise(logits, 0.5, rng)
            assert dynamics.check_sub_decisional(logits, noise)

    def test_small_scale_accepts_almost_always(self):
        rng = rng_for(2, "noise")
        logits = np.array([2.0, 1.0, 0.0])  # margin 1
        draws, rejections = 2000, 0
        for _ in range(draws):
            _, rej = dynamics.sample_sub_decisional_noise(logits, 0.1, rng)
            rejections += rej
        assert draws / (draws + rejections) > 0.99

    def test_exhaustion_raises(self):
        # isotropic noise keeps acceptance near 1/B even at huge scales, so
        # the guard is exercised with a zero attempt budget
        rng = rng_for(3, "noise")
        with pytest.raises(SamplingExhaustedError):
            dynamics.sample_sub_decisional_noise([1e-9, 0.0], 1e6, rng, max_attempts=0)


class TestPrefixLogits:
    SPEC = dynamics.DiscreteChainSpec(steps=6, n_options=5, noise_scale=0.2, logit_seed=9)

    def test_deterministic(self):
        a = dynamics.prefix_logits(self.SPEC, (1, 2))
        b = dynamics.prefix_logits(self.SPEC, (1, 2))
        np.testing.assert_array_equal(a, b)

    def test_prefix_sensitivity(self):
        a = dynamics.prefix_logits(self.SPEC, (1, 2))
        b = dynamics.prefix_logits(self.SPEC, (2, 1))
        assert np.abs(a - b).max() > 1e-6

    def test_margin_floor_enforced(self):
        for prefix in [(), (0,), (1, 3), (4, 4, 4)]:
            logits = dynamics.prefix_logits(self.SPEC, prefix)
            top_two = np.partition(logits, logits.size - 2)[-2:]
            assert top_two[1] - top_two[0] >= self.SPEC.min_margin - 1e-12


class TestDiscreteChain:
    def test_zero_noise_never_diverges(self):
        spec = dynamics.DiscreteChainSpec(steps=6, n_options=5, noise_scale=0.0, logit_seed=1)
        assert dynamics.simulate_discrete_chain(spec, 2000, seed=0) == 0

    def test_sub_decisional_noise_never_diverges(self):
        spec = dynamics.DiscreteChainSpec(steps=6, n_options=5, noise_scale=0.2, logit_seed=1)
        assert dynamics.simulate_discrete_chain(spec, 5000, seed=0) == 0

    def test_unconstrained_large_noise_diverges(self):
        spec = dynamics.DiscreteChainSpec(
            steps=6, n_options=5, noise_scale=5.0, sub_decisional_only=False, logit_seed=1
        )
        assert dynamics.simulate_discrete_chain(spec, 2000, seed=0) > 0

    def test_deterministic_given_seed(self):
        spec = dynamics.DiscreteChainSpec(
            steps=5, n_options=4, noise_scale=3.0, sub_decisional_only=False, logit_seed=2
        )
        a = dynamics.simulate_discrete_chain(spec, 3000, seed=11)
        b = dynamics.simulate_discrete_chain(spec, 3000, seed=11)
        assert a == b


class TestLatentChain:
    def test_zero_noise_trajectories_coincide(self):
        config = dynamics.LatentConfig(dim=4, steps=5, lipschitz=0.9, sigma_h=0.0)
        pair = dynamics.simulate_latent_chain(config, np.ones(4), seed=0)
        np.testing.assert_array_equal(pair.clean, pair.noisy)
        assert pair.final_error_sq == 0.0

    def test_shapes(self):
        config = dynamics.LatentConfig(dim=3, steps=7, lipschitz=1.0, sigma_h=0.1)
        pair = dynamics.simulate_latent_chain(config, np.zeros(3), seed=1)
        assert pair.clean.shape == (8, 3)
        assert pair.noisy.shape == (8, 3)

    def test_inconsistent_pair_rejected(self):
        clean = np.zeros((3, 2))
        noisy = np.ones((3, 2))
        with pytest.raises(InvalidInputError):
            dynamics.TrajectoryPair(clean=clean, noisy=noisy, final_error_sq=0.0)

    def test_transition_operator_norm_is_exact(self):
        for kind in ("linear_scaling", "rotation_scaling"):
            config = dynamics.LatentConfig(
                dim=6, steps=1, lipschitz=1.3, sigma_h=0.0, transition=kind
            )
            matrix = dynamics.transition_matrix(config)
            top_singular = np.linalg.svd(matrix, compute_uv=False)[0]
            assert abs(top_singular - 1.3) <= 1e-12

    def test_rotation_is_orthogonal(self):
        config = dynamics.LatentConfig(
            dim=5, steps=1, lipschitz=1.0, sigma_h=0.0, transition="rotation_scaling"
        )
        q = dynamics.transition_matrix(config)
        np.testing.assert_allclose(q @ q.T, np.eye(5), atol=1e-12)

    def test_contraction_toward_fixed_point(self):
        for kind in ("linear_scaling", "rotation_scaling"):
            config = dynamics.LatentConfig(
                dim=6, steps=10, lipschitz=0.8, sigma_h=0.0, transition=kind
            )
            h0 = rng_for(1, kind).standard_normal(6)
            pair = dynamics.simulate_latent_chain(config, h0, seed=2)
            assert np.linalg.norm(pair.clean[-1]) <= 0.8**10 * np.linalg.norm(h0) + 1e-9


class TestClosedForm:
    def test_unit_lipschitz_branch(self):
        config = dynamics.LatentConfig(dim=8, steps=6, lipschitz=1.0, sigma_h=0.1)
        assert abs(dynamics.expected_error_closed_form(config) - 0.48) <= 1e-15

    def test_contractive_value(self):
        config = dynamics.LatentConfig(dim=8, steps=6, lipschitz=0.8, sigma_h=0.1)
        expected = (1.0 - 0.8**12) / (1.0 - 0.64) * 0.08
        assert abs(dynamics.expected_error_closed_form(config) - expected) <= 1e-15

    def test_geometric_limit(self):
        config = dynamics.LatentConfig(dim=1, steps=500, lipschitz=0.8, sigma_h=1.0)
        assert abs(dynamics.expected_error_closed_form(config) - 1.0 / 0.36) <= 1e-9

    def test_branch_boundary_uses_linear_growth(self):
        config = dynamics.LatentConfig(dim=2, steps=9, lipschitz=1.0 + 1e-10, sigma_h=1.0)
        assert dynamics.expected_error_closed_form(config) == 18.0


class TestMonteCarloError:
    def test_zero_noise(self):
        config = dynamics.LatentConfig(dim=4, steps=5, lipschitz=1.1, sigma_h=0.0)
        assert dynamics.monte_carlo_error(config, 500, seed=0) == (0.0, 0.0)

    def test_single_step_mean(self):
        config = dynamics.LatentConfig(dim=8, steps=1, lipschitz=2.0, sigma_h=0.1)
        mean, se = dynamics.monte_carlo_error(config, 30_000, seed=1)
        assert abs(mean - 0.08) <= 3.0 * se

    @pytest.mark.parametrize("lipschitz", [0.8, 1.0, 1.2])
    @pytest.mark.parametrize("kind", ["linear_scaling", "rotation_scaling"])
    def test_matches_closed_form(self, lipschitz, kind):
        config = dynamics.LatentConfig(
            dim=8, steps=6, lipschitz=lipschitz, sigma_h=0.1, transition=kind
        )
        closed = dynamics.expected_error_closed_form(config)
        mean, se = dynamics.monte_carlo_error(config, 30_000, seed=3)
        assert abs(mean - closed) <= 3.0 * se

    def test_requires_minimum_trials(self):
        config = dynamics.LatentConfig(dim=2, steps=2, lipschitz=1.0, sigma_h=0.1)
        with pytest.raises(InvalidInputError):
            dynamics.monte_carlo_error(config, 50, seed=0)

    def test_deterministic_given_seed(self):
        config = dynamics.LatentConfig(dim=3, steps=4, lipschitz=1.0, sigma_h=0.2)
        assert dynamics.monte_carlo_error(config, 5000, seed=9) == dynamics.monte_carlo_error(
            config, 5000, seed=9
        )


class TestAccuracyCurve:
    def test_normal_cdf_reference_points(self):
        assert dynamics.normal_cdf(0.0) == 0.5
        assert abs(dynamics.normal_cdf(1.0) - 0.8413447460685429) <= 1e-12
        for z in (-3.0, -1.0, 0.3, 2.5):
            assert abs(dynamics.normal_cdf(z) + dynamics.normal_cdf(-z) - 1.0) <= 1e-15

    def test_curve_monotone_with_limits(self):
        spec = dynamics.AccuracyCurveSpec(
            margin=2.0, noise_gain=4.0, sigma_grid=tuple(np.geomspace(1e-4, 1e5, 30))
        )
        curve = dynamics.accuracy_curve(spec)
        values = [a for _, a in curve]
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert values[0] >= 1.0 - 1e-12
        assert abs(values[-1] - 0.5) <= 1e-3

    def test_unit_argument_hits_phi_one(self):
        spec = dynamics.AccuracyCurveSpec(margin=2.0, noise_gain=4.0, sigma_grid=(1.0,))
        (_, value), = dynamics.accuracy_curve(spec)
        assert abs(value - 0.8413447460685429) <= 1e-12

    def test_grid_validation(self):
        with pytest.raises(InvalidInputError):
            dynamics.AccuracyCurveSpec(margin=1.0, noise_gain=1.0, sigma_grid=(0.2, 0.1))
        with pytest.raises(InvalidInputError):
            dynamics.AccuracyCurveSpec(margin=1.0, noise_gain=1.0, sigma_grid=(0.0, 0.1))
        with pytest.raises(InvalidInputError):
            dynamics.AccuracyCurveSpec(margin=-1.0, noise_gain=1.0, sigma_grid=(0.1,))

    def test_empirical_sweep_matches_curve(self):
        sweep = dynamics.empirical_accuracy_sweep(
            dim=16, margin=2.0, sigma_grid=(0.2, 0.5, 1.0, 2.0, 5.0), trials=30_000, seed=5
        )
        assert sweep["row_diff_norm_sq"] == 16.0
        for row in sweep["rows"]:
            band = 3.0 * math.sqrt(row["analytic"] * (1.0 - row["analytic"]) / 30_000)
            assert abs(row["empirical"] - row["analytic"]) <= band
