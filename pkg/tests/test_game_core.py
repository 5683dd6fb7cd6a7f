"""
Tests for game computations: utilities, best responses, dominance and Stackelberg commitments
"""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from src.core.errors import DimensionMismatchError, DominatedStrategyError, InvalidGameError, InvalidStrategyError
from src.core.game_core import (
    best_responses,
    brute_force_stackelberg,
    conservative_commitment,
    constant_sum_value,
    is_weakly_dominated,
    max_margin,
    pure_nash_equilibria,
    random_game,
    simplex_grid,
    stackelberg,
    table1_game,
    table1_game_for_learner,
    utility,
)
from src.models.game_models import Game, MixedStrategy, PlayerRole


def simplex_points(size):
    weights = st.lists(st.integers(min_value=0, max_value=20), min_size=size, max_size=size)
    return weights.filter(lambda w: sum(w) > 0).map(lambda w: np.array(w, dtype=float) / sum(w))


class TestGameModel:
    def test_rejects_payoff_above_scale(self):
        with pytest.raises(InvalidGameError):
            Game([[3.0]], [[0.0]], ('a',), ('b',), scale=2.0)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(InvalidGameError):
            Game([[0.0, 1.0]], [[0.0]], ('a',), ('b', 'c'), scale=1.0)

    def test_rejects_duplicate_names(self):
        with pytest.raises(InvalidGameError):
            Game([[0.0, 1.0]], [[0.0, 1.0]], ('a',), ('b', 'b'), scale=1.0)

    def test_mixed_strategy_must_sum_to_one(self):
        with pytest.raises(InvalidStrategyError):
            MixedStrategy([0.5, 0.6])

    def test_dict_round_trip_keeps_game(self, table1):
        assert Game.from_dict(table1.to_dict()) == table1


class TestUtility:
    def test_pure_entries(self, table1):
        assert utility(table1, [0, 1], [0, 0, 1]) == 2.0
        assert utility(table1, [1, 0], [1, 0, 0], PlayerRole.LEARNER) == pytest.approx(0.05)

    def test_dimension_mismatch(self, table1):
        with pytest.raises(DimensionMismatchError):
            utility(table1, [1.0], [0, 0, 1])

    @settings(max_examples=50, deadline=None)
    @given(simplex_points(2), simplex_points(2), simplex_points(3), st.floats(min_value=0.0, max_value=1.0))
    def test_bilinear_in_optimizer_strategy(self, a1, a2, beta, weight):
        game = table1_game(0.05)
        mixed = MixedStrategy(a1).mix(MixedStrategy(a2), weight)
        expected = (1 - weight) * utility(game, a1, beta) + weight * utility(game, a2, beta)
        assert utility(game, mixed, beta) == pytest.approx(expected, abs=1e-12)


class TestBestResponses:
    def test_table1_uniform_has_tie(self, table1):
        # at (1/2, 1/2) Mid and Right both give the learner 0
        assert best_responses(table1, [0.5, 0.5]) == [1, 2]

    def test_pure_top(self, table1):
        assert best_responses(table1, [1.0, 0.0]) == [0]

    @settings(max_examples=50, deadline=None)
    @given(simplex_points(2))
    def test_best_response_is_maximal(self, alpha):
        game = table1_game(0.05)
        values = alpha @ game.learner_payoffs
        for j in best_responses(game, alpha):
            assert values[j] >= values.max() - 1e-9


class TestDominance:
    def test_average_column_is_dominated(self):
        game = Game([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]], [[1.0, 0.0, 0.5], [0.0, 1.0, 0.5]],
                    ('u', 'd'), ('l', 'r', 'm'), scale=1.0)
        certificate = is_weakly_dominated(game, 2)
        assert certificate.dominated
        assert certificate.dominating_mix[[0, 1]] == pytest.approx([0.5, 0.5])
        assert not is_weakly_dominated(game, 0).dominated

    def test_table1_has_no_dominated_actions(self, table1):
        assert not any(is_weakly_dominated(table1, j).dominated for j in range(3))

    def test_single_action_never_dominated(self):
        game = Game([[1.0]], [[1.0]], ('a',), ('b',), scale=1.0)
        assert not is_weakly_dominated(game, 0).dominated


class TestStackelberg:
    def test_table1(self, table1):
        solution = stackelberg(table1)
        assert solution.value == pytest.approx(0.0, abs=1e-9)
        assert solution.commitment.probs == pytest.approx([0.5, 0.5], abs=1e-9)
        assert table1.learner_actions[solution.response] == 'Right'

    def test_value_tie_goes_to_larger_margin(self, table1):
        # Left and Right both reach 0; Right is enforceable with the larger margin
        assert max_margin(table1, 2)[1] > max_margin(table1, 0)[1] > 0
        assert stackelberg(table1).response == 2

    def test_matching_pennies(self, pennies):
        assert stackelberg(pennies).value == pytest.approx(0.0, abs=1e-9)

    def test_two_action_learner_game(self, two_action):
        solution = stackelberg(two_action)
        assert solution.value == pytest.approx(2.5, abs=1e-9)
        assert solution.response == 1
        assert solution.commitment.probs == pytest.approx([0.5, 0.5], abs=1e-9)

    def test_horizon_coupled_variant(self):
        game = table1_game_for_learner(0.0025)
        assert game.learner_payoffs[0, 0] == pytest.approx(0.05)
        assert stackelberg(game).value == pytest.approx(0.0, abs=1e-9)

    def test_response_is_a_best_response(self):
        for seed in range(10):
            game = random_game(3, 3, seed)
            solution = stackelberg(game)
            assert solution.response in best_responses(game, solution.commitment)

    @pytest.mark.parametrize('seed', range(25))
    @pytest.mark.parametrize('cols', [2, 3])
    def test_matches_exact_grid_on_two_row_games(self, seed, cols):
        # integer payoffs in [-2, 2]: every breakpoint has a denominator dividing 840
        game = random_game(2, cols, seed)
        oracle_value, _, _ = brute_force_stackelberg(game, resolution=840)
        assert stackelberg(game).value == pytest.approx(oracle_value, abs=1e-7)

    @pytest.mark.parametrize('seed', range(50))
    def test_grid_oracle_on_three_row_games(self, seed):
        """Two-sided when the LP commitment is a grid point, one-sided otherwise: a best-response
        region that is a single off-grid point or a sliver between grid points is invisible to the grid"""
        game = random_game(3, 3, seed)
        solution = stackelberg(game)
        oracle_value, _, _ = brute_force_stackelberg(game, resolution=200)
        assert oracle_value <= solution.value + 1e-7
        scaled = solution.commitment.probs * 200
        if np.allclose(scaled, np.round(scaled), atol=1e-9):
            assert oracle_value == pytest.approx(solution.value, abs=1e-2)

    @pytest.mark.parametrize('seed', range(10))
    def test_zero_sum_value_matches_minimax(self, seed):
        payoffs = random_game(3, 3, seed).optimizer_payoffs
        game = Game(payoffs, -payoffs, ('a1', 'a2', 'a3'), ('b1', 'b2', 'b3'), scale=2.0)
        # variables (alpha, v): maximize v subject to v <= alpha @ U[:, j]
        result = linprog(
            c=[0.0, 0.0, 0.0, -1.0],
            A_ub=np.hstack([-payoffs.T, np.ones((3, 1))]),
            b_ub=np.zeros(3),
            A_eq=[[1.0, 1.0, 1.0, 0.0]],
            b_eq=[1.0],
            bounds=[(0, None)] * 3 + [(None, None)],
            method='highs',
        )
        assert constant_sum_value(game) == pytest.approx(0.0)
        assert stackelberg(game).value == pytest.approx(-result.fun, abs=1e-7)


class TestConservativeCommitment:
    def test_table1_makes_right_unique(self, table1):
        commitment = conservative_commitment(table1, 0.05)
        assert commitment.target_response == 2
        assert commitment.margin > 0
        assert best_responses(table1, commitment.strategy) == [2]
        values = commitment.strategy.probs @ table1.learner_payoffs
        assert values[2] - np.delete(values, 2).max() >= commitment.margin - 1e-9

    def test_utility_loss_is_bounded_by_delta(self, table1):
        delta = 0.05
        commitment = conservative_commitment(table1, delta)
        achieved = utility(table1, commitment.strategy, MixedStrategy.pure(2, 3))
        assert achieved >= stackelberg(table1).value - 2 * table1.scale * delta - 1e-9

    def test_max_margin_of_right(self, table1):
        alpha, kappa = max_margin(table1, 2)
        values = alpha.probs @ table1.learner_payoffs
        assert kappa > 0
        assert values[2] - max(values[0], values[1]) == pytest.approx(kappa, abs=1e-9)

    def test_duplicate_column_raises(self):
        game = Game([[0.0, 1.0], [0.0, 1.0]], [[1.0, 1.0], [0.0, 0.0]], ('u', 'd'), ('l', 'r'), scale=1.0)
        with pytest.raises(DominatedStrategyError):
            conservative_commitment(game, 0.1)

    @pytest.mark.parametrize('delta', [0.0, 1.0, -0.1])
    def test_delta_range(self, table1, delta):
        with pytest.raises(ValueError):
            conservative_commitment(table1, delta)


class TestHelpers:
    def test_random_game_is_seeded(self):
        assert random_game(3, 2, 7) == random_game(3, 2, 7)
        assert random_game(3, 2, 7).learner_actions == ('b1', 'b2')

    def test_pure_nash_of_prisoners_dilemma(self):
        payoffs = [[-1.0, -3.0], [0.0, -2.0]]
        game = Game(payoffs, np.array(payoffs).T, ('c', 'd'), ('c', 'd'), scale=3.0)
        assert pure_nash_equilibria(game) == [(1, 1)]

    def test_constant_sum_detection(self, pennies, table1):
        assert constant_sum_value(pennies) == pytest.approx(0.0)
        assert constant_sum_value(table1) is None

    def test_simplex_grid(self):
        grid = simplex_grid(3, 4)
        assert grid.shape == (15, 3)
        assert grid.sum(axis=1) == pytest.approx(np.ones(15))
        assert len({tuple(row) for row in grid}) == 15
