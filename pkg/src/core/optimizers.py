"""
Optimizer-side strategies: the conservative Stackelberg commitment, scripted
policies and their conversion into per-round schedules
"""
import logging
from typing import Optional, Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import ScheduleError
from .game_core import conservative_commitment
from ..models.game_models import Commitment, Game, MixedStrategy
from ..models.policy_models import Policy, PolicyStep, RoundSchedule

logger = logging.getLogger(__name__)

ROUNDING_SLACK = 1e-9


@runtime_checkable
class OptimizerStrategy(Protocol):
    """Adaptive optimizer: picks the round-t strategy after seeing the learner's past actions"""

    def strategy(self, t: int, learner_history: Sequence[int]) -> MixedStrategy:
        ...


class StackelbergCommit:
    """Replays the perturbed Stackelberg commitment every round"""

    def __init__(self, game: Game, delta: float):
        self.game = game
        self.delta = delta
        self.commitment: Commitment = conservative_commitment(game, delta)
        logger.info(
            f"📋 Commitment toward {game.learner_actions[self.commitment.target_response]} "
            f"with margin {self.commitment.margin:.4f}"
        )

    def schedule(self, rounds: int) -> RoundSchedule:
        return RoundSchedule.constant(self.commitment.strategy, rounds)


def commitment_schedule(game: Game, delta: float, rounds: int) -> RoundSchedule:
    """conservative_commitment(game, delta).strategy replayed for all rounds"""
    return StackelbergCommit(game, delta).schedule(rounds)


def policy_to_schedule(policy: Policy, rounds: int) -> RoundSchedule:
    """floor(t_i * T) rounds per normalized step; leftover rounds go one each to the earliest steps"""
    if rounds < len(policy):
        raise ScheduleError(f"{rounds} rounds cannot represent a policy with {len(policy)} steps")

    weights = np.array([step.duration for step in policy.normalized()])
    allocation = np.floor(weights * rounds + ROUNDING_SLACK).astype(int)
    remainder = rounds - int(allocation.sum())
    for index in np.flatnonzero(weights > 0):
        if remainder <= 0:
            break
        allocation[index] += 1
        remainder -= 1
    if remainder != 0:
        raise ScheduleError(f"Could not allocate {rounds} rounds over weights {weights.tolist()}")

    logger.debug(f"Policy of {len(policy)} steps laid out as {allocation.tolist()} rounds")
    return RoundSchedule.from_segments([(step.alpha, int(n)) for step, n in zip(policy, allocation)])


def exploit_policy_table1(epsilon: float = 0.05) -> Policy:
    """Top for the first half, Bottom for the second half"""
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
    return Policy((
        PolicyStep(MixedStrategy.pure(0, 2), 0.5),
        PolicyStep(MixedStrategy.pure(1, 2), 0.5),
    ))


def build_schedule(game: Game, rounds: int, policy: Optional[Policy] = None,
                   delta: Optional[float] = None) -> RoundSchedule:
    """Schedule from either a scripted policy or a commitment perturbation delta"""
    if (policy is None) == (delta is None):
        raise ScheduleError("Provide exactly one of a policy or a commitment delta")
    if policy is not None:
        if policy.num_actions != game.num_optimizer_actions:
            raise ScheduleError(
                f"Policy strategies have {policy.num_actions} entries, game has {game.num_optimizer_actions} rows"
            )
        return policy_to_schedule(policy, rounds)
    return commitment_schedule(game, delta, rounds)
