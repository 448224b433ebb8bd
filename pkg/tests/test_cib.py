"""Conditional information-bottleneck solver against its brute-force oracle."""

import math

import numpy as np
import pytest

from certlab import cib
from certlab.errors import EnumerationTooLargeError, InvalidInputError


def two_by_two_problem():
    # matched past/future with 0.45 on each diagonal cell, 0.05 off
    joint = np.array([[[0.45, 0.05], [0.05, 0.45]]])
    return cib.CibProblem(joint=joint)


class TestTypes:
    def test_joint_must_sum_to_one(self):
        with pytest.raises(InvalidInputError):
            cib.CibProblem(joint=np.full((1, 2, 2), 0.3))

    def test_joint_must_be_nonnegative(self):
        joint = np.array([[[0.7, -0.1], [0.2, 0.2]]])
        with pytest.raises(InvalidInputError):
            cib.CibProblem(joint=joint)

    def test_alphabet_minimums(self):
        with pytest.raises(InvalidInputError):
            cib.CibProblem(joint=np.full((1, 1, 2), 0.5))

    def test_encoder_rows_must_normalize(self):
        with pytest.raises(InvalidInputError):
            cib.Encoder(table=np.array([[0.5, 0.4], [0.5, 0.5]]))

    def test_info_plane_rejects_future_exceeding_past(self):
        with pytest.raises(InvalidInputError):
            cib.InfoPlanePoint(i_past=0.1, i_future=0.5, beta=1.0, objective=0.0)


class TestConditionalMutualInformation:
    def test_constant_encoder_carries_nothing(self):
        problem = two_by_two_problem()
        encoder = cib.constant_encoder(2, 2)
        assert cib.conditional_mutual_information(problem, encoder, "past") == 0.0
        assert cib.conditional_mutual_information(problem, encoder, "future") == 0.0

    def test_identity_encoder_is_lossless(self):
        problem = two_by_two_problem()
        encoder = cib.identity_encoder(2)
        # direct four-cell evaluation of the past<->future information
        hand = 2 * 0.45 * math.log(0.45 / 0.25) + 2 * 0.05 * math.log(0.05 / 0.25)
        i_past = cib.conditional_mutual_information(problem, encoder, "past")
        i_future = cib.conditional_mutual_information(problem, encoder, "future")
        assert abs(i_past - math.log(2.0)) <= 1e-12  # H(S_past), uniform here
        assert abs(i_future - hand) <= 1e-12
        assert abs(hand - 0.368) <= 1e-3

    def test_future_never_exceeds_past(self):
        rng = np.random.default_rng(0)
        for i in range(20):
            problem = cib.random_problem(3, 3, 2, seed=i)
            table = rng.dirichlet(np.ones(2), size=3)
            encoder = cib.Encoder(table=table)
            i_past = cib.conditional_mutual_information(problem, encoder, "past")
            i_future = cib.conditional_mutual_information(problem, encoder, "future")
            assert i_future <= i_past + 1e-9

    def test_bad_target_rejected(self):
        with pytest.raises(InvalidInputError):
            cib.conditional_mutual_information(
                two_by_two_problem(), cib.identity_encoder(2), "sideways"
            )


class TestBetaSchedule:
    def test_spot_values(self):
        assert cib.beta_schedule(0, 10) == 0.0
        assert abs(cib.beta_schedule(5, 10) - 1.0) <= 1e-15
        assert abs(cib.beta_schedule(9, 10) - 9.0) <= 1e-12
        assert abs(cib.beta_schedule(5, 10, scale=2.5) - 2.5) <= 1e-15

    def test_monotone_in_stage(self):
        values = [cib.beta_schedule(k, 12) for k in range(12)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_terminal_stage_rejected(self):
        with pytest.raises(InvalidInputError):
            cib.beta_schedule(10, 10)
        with pytest.raises(InvalidInputError):
            cib.beta_schedule(-1, 10)


class TestSolver:
    def test_beta_zero_collapses(self):
        problem = cib.random_noisy_problem(3, 3, 1, seed=3)
        solution = cib.solve_cib(problem, 0.0, 2, restarts=4, seed=0)
        assert solution.point.i_past <= 1e-6
        assert solution.point.objective <= 1e-12

    def test_large_beta_recovers_all_predictive_information(self):
        problem = cib.random_noisy_problem(3, 3, 1, seed=3)
        ceiling = cib.conditional_mutual_information(problem, cib.identity_encoder(3), "future")
        solution = cib.solve_cib(problem, 1000.0, 3, restarts=8, seed=0)
        assert abs(solution.point.i_future - ceiling) <= 1e-4

    def test_never_worse_than_brute_force(self):
        for seed in range(6):
            problem = cib.random_problem(3, 3, 1, seed=seed)
            for beta in (0.5, 2.0):
                solution = cib.solve_cib(problem, beta, 2, restarts=8, seed=seed)
                brute, _ = cib.brute_force_cib(problem, beta, 2)
                assert solution.point.objective <= brute + 1e-8

    def test_objective_trace_monotone(self):
        problem = cib.grouped_future_problem()
        solution = cib.solve_cib(problem, 2.0, 2, restarts=8, seed=1)
        trace = solution.objective_trace
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))

    def test_deterministic_given_seed(self):
        problem = cib.random_problem(3, 3, 2, seed=5)
        a = cib.solve_cib(problem, 1.5, 2, restarts=6, seed=42)
        b = cib.solve_cib(problem, 1.5, 2, restarts=6, seed=42)
        assert a.point == b.point
        np.testing.assert_array_equal(a.encoder.table, b.encoder.table)

    def test_rejects_bad_arguments(self):
        problem = two_by_two_problem()
        with pytest.raises(InvalidInputError):
            cib.solve_cib(problem, -1.0, 2)
        with pytest.raises(InvalidInputError):
            cib.solve_cib(problem, 1.0, 0)
        with pytest.raises(InvalidInputError):
            cib.solve_cib(problem, 1.0, 2, tol=0.0)


class TestBruteForce:
    def test_beta_zero_minimum_is_constant_map(self):
        problem = cib.random_problem(3, 3, 1, seed=1)
        best, mapping = cib.brute_force_cib(problem, 0.0, 2)
        assert abs(best) <= 1e-12
        assert len(set(mapping)) == 1

    def test_lossless_regime_groups_by_future_profile(self):
        problem = cib.grouped_future_problem()
        _, mapping = cib.brute_force_cib(problem, 5.0, 2)
        assert mapping[0] == mapping[1] != mapping[2]

    def test_enumeration_cap(self):
        problem = cib.random_problem(8, 2, 1, seed=0)
        with pytest.raises(EnumerationTooLargeError):
            cib.brute_force_cib(problem, 1.0, 10)

    def test_golden_grouped_problem_value(self):
        # frozen after the first computation; guards solver and oracle alike
        best, mapping = cib.brute_force_cib(cib.grouped_future_problem(), 2.0, 2)
        assert abs(best - (-0.20289806975715452)) <= 1e-12
        assert mapping[0] == mapping[1] != mapping[2]


class TestDecoderProbability:
    def test_deterministic_future_reaches_one(self):
        joint = np.zeros((1, 2, 2))
        joint[0, 0, 0] = 0.5
        joint[0, 1, 1] = 0.5
        problem = cib.CibProblem(joint=joint)
        assert cib.max_decoder_probability(problem, cib.identity_encoder(2)) == 1.0

    def test_capped_conditionals_cap_every_decoder(self):
        problem = cib.random_noisy_problem(3, 3, 2, seed=9, max_conditional=0.9)
        rng = np.random.default_rng(2)
        for _ in range(20):
            encoder = cib.Encoder(table=rng.dirichlet(np.ones(2), size=3))
            assert cib.max_decoder_probability(problem, encoder) <= 0.9 + 1e-12


class TestFrontier:
    def test_small_frontier_is_clean(self):
        problem = cib.random_noisy_problem(3, 3, 1, seed=7)
        frontier = cib.information_frontier(
            problem, (0.0, 0.5, 2.0, 50.0), n_latent=3, restarts=8, seed=0
        )
        assert not frontier.defects
        past = [p.i_past for p in frontier.points]
        assert all(b >= a - 1e-9 for a, b in zip(past, past[1:]))

    def test_grid_validation(self):
        problem = two_by_two_problem()
        with pytest.raises(InvalidInputError):
            cib.information_frontier(problem, (1.0, 0.5), n_latent=2)
        with pytest.raises(InvalidInputError):
            cib.information_frontier(problem, (), n_latent=2)


class TestSerialization:
    def test_round_trip(self):
        problem = cib.random_problem(3, 4, 2, seed=11)
        rebuilt = cib.problem_from_rows(cib.problem_to_rows(problem))
        np.testing.assert_allclose(rebuilt.joint, problem.joint, atol=1e-15)

    def test_empty_rows_rejected(self):
        with pytest.raises(InvalidInputError):
            cib.problem_from_rows([])
