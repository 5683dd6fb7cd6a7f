"""
Tests for policies, round schedules and the commitment optimizer
"""
import numpy as np
import pytest

from src.core.errors import DominatedStrategyError, ScheduleError
from src.core.game_core import best_responses, stackelberg
from src.core.optimizers import (
    OptimizerStrategy,
    StackelbergCommit,
    build_schedule,
    commitment_schedule,
    exploit_policy_table1,
    policy_to_schedule,
)
from src.models.game_models import Game, MixedStrategy
from src.models.policy_models import Policy, PolicyStep, RoundSchedule


class TestPolicy:
    def test_requires_positive_total(self):
        with pytest.raises(ScheduleError):
            Policy.from_pairs([([1.0, 0.0], 0.0)])

    def test_rejects_negative_duration(self):
        with pytest.raises(ScheduleError):
            Policy.from_pairs([([1.0, 0.0], -1.0), ([0.0, 1.0], 2.0)])

    def test_scaled_and_normalized(self):
        policy = Policy.from_pairs([([1.0, 0.0], 1.0), ([0.0, 1.0], 3.0)])
        assert policy.scaled(2.0).total_duration == pytest.approx(8.0)
        assert [step.duration for step in policy.normalized()] == pytest.approx([0.25, 0.75])

    def test_dict_round_trip(self):
        policy = exploit_policy_table1()
        assert Policy.from_dict(policy.to_dict()) == policy

    def test_dict_needs_steps(self):
        with pytest.raises(ScheduleError):
            Policy.from_dict({'alpha': [1.0]})


class TestPolicyToSchedule:
    def test_exploit_halves(self):
        schedule = policy_to_schedule(exploit_policy_table1(), 10)
        assert schedule.allocations() == [5, 5]
        assert schedule.strategy_at(4) == MixedStrategy([1.0, 0.0])
        assert schedule.strategy_at(5) == MixedStrategy([0.0, 1.0])

    def test_leftover_rounds_go_to_earliest_steps(self):
        policy = Policy.from_pairs([([1.0, 0.0], 1.0), ([0.0, 1.0], 1.0), ([0.5, 0.5], 1.0)])
        assert policy_to_schedule(policy, 10).allocations() == [4, 3, 3]

    def test_too_few_rounds(self):
        with pytest.raises(ScheduleError):
            policy_to_schedule(exploit_policy_table1(), 1)

    def test_zero_duration_steps_are_skipped(self):
        policy = Policy.from_pairs([([1.0, 0.0], 1.0), ([0.5, 0.5], 0.0), ([0.0, 1.0], 1.0)])
        schedule = policy_to_schedule(policy, 7)
        assert schedule.num_rounds == 7
        assert schedule.allocations() == [4, 3]

    @pytest.mark.parametrize('rounds', [2, 3, 17, 1000, 99_999])
    def test_covers_every_round(self, rounds):
        assert policy_to_schedule(exploit_policy_table1(), rounds).num_rounds == rounds


class TestRoundSchedule:
    def test_constant(self):
        schedule = RoundSchedule.constant([0.5, 0.5], 10)
        assert schedule.is_constant
        assert schedule.materialize().shape == (10, 2)

    def test_rejects_empty(self):
        with pytest.raises(ScheduleError):
            RoundSchedule.from_segments([([1.0, 0.0], 0)])

    def test_strategy_at_out_of_range(self):
        with pytest.raises(ScheduleError):
            RoundSchedule.constant([1.0], 3).strategy_at(3)

    def test_materialize_follows_segments(self):
        schedule = RoundSchedule.from_segments([([1.0, 0.0], 2), ([0.0, 1.0], 1)])
        assert schedule.materialize().tolist() == [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]


class TestCommitment:
    def test_replays_the_same_strategy(self, table1):
        schedule = commitment_schedule(table1, 0.1, 10)
        assert schedule.num_rounds == 10
        assert schedule.is_constant
        assert best_responses(table1, schedule.strategy_at(0)) == [2]

    def test_small_delta_approaches_stackelberg(self, table1):
        commitment = commitment_schedule(table1, 1e-6, 5).strategy_at(0)
        assert commitment.probs == pytest.approx(stackelberg(table1).commitment.probs, abs=1e-5)

    def test_commit_object(self, table1):
        optimizer = StackelbergCommit(table1, 0.05)
        assert optimizer.commitment.target_response == 2
        assert optimizer.schedule(3).allocations() == [3]

    def test_dominated_target_propagates(self):
        game = Game([[0.0, 1.0], [0.0, 1.0]], [[1.0, 1.0], [0.0, 0.0]], ('u', 'd'), ('l', 'r'), scale=1.0)
        with pytest.raises(DominatedStrategyError):
            commitment_schedule(game, 0.1, 10)


class TestBuildSchedule:
    def test_needs_exactly_one_source(self, table1):
        with pytest.raises(ScheduleError):
            build_schedule(table1, 10)
        with pytest.raises(ScheduleError):
            build_schedule(table1, 10, policy=exploit_policy_table1(), delta=0.1)

    def test_policy_width_must_match_game(self, table1):
        policy = Policy.from_pairs([([1.0, 0.0, 0.0], 1.0)])
        with pytest.raises(ScheduleError):
            build_schedule(table1, 10, policy=policy)

    def test_policy_source(self, table1):
        assert build_schedule(table1, 4, policy=exploit_policy_table1()).allocations() == [2, 2]


class TestAdaptiveProtocol:
    def test_callable_object_satisfies_protocol(self):
        class AlwaysTop:
            def strategy(self, t, learner_history):
                return MixedStrategy.pure(0, 2)

        assert isinstance(AlwaysTop(), OptimizerStrategy)
