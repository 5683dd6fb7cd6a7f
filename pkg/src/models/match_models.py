"""
Data models for repeated-game matches and sweeps
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from ..core.errors import ConfigurationError, DimensionMismatchError, ScheduleError
from .game_models import Game
from .learner_models import LearnerConfig, RewardTrace, SwapFunction
from .policy_models import RoundSchedule


class SamplingMode(str, Enum):
    EXPECTED = 'expected'
    SAMPLED = 'sampled'


@dataclass
class MatchConfig:
    """One optimizer-vs-learner run of T rounds.

    Exactly one of schedule (non-adaptive) or optimizer (adaptive callback) is set.
    """
    game: Game
    learner: LearnerConfig
    rounds: int
    schedule: Optional[RoundSchedule] = None
    optimizer: Optional[Any] = None
    seed: int = 0
    mode: SamplingMode = SamplingMode.EXPECTED
    config_id: str = ''

    def __post_init__(self):
        try:
            self.mode = SamplingMode(self.mode)
        except ValueError:
            raise ConfigurationError(f"Unknown sampling mode: {self.mode}")
        if self.rounds < 1:
            raise ConfigurationError(f"A match needs at least one round, got {self.rounds}")
        if (self.schedule is None) == (self.optimizer is None):
            raise ConfigurationError("Provide exactly one of a round schedule or an adaptive optimizer")
        if self.schedule is not None:
            if self.schedule.num_rounds != self.rounds:
                raise ScheduleError(f"Schedule covers {self.schedule.num_rounds} rounds, match has {self.rounds}")
            if self.schedule.num_actions != self.game.num_optimizer_actions:
                raise DimensionMismatchError(
                    f"Schedule strategies have {self.schedule.num_actions} entries, "
                    f"game has {self.game.num_optimizer_actions} rows"
                )
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass
class MatchResult:
    config_id: str
    seed: int
    rounds: int
    optimizer_total: float
    learner_total: float
    trace: RewardTrace
    distributions: np.ndarray
    optimizer_utilities: np.ndarray
    regret: float
    swap_regret: float
    swap_function: SwapFunction
    learner_label: str = ''
    mode: SamplingMode = SamplingMode.EXPECTED
    optimizer_actions: Optional[np.ndarray] = None

    @property
    def optimizer_average(self) -> float:
        return self.optimizer_total / self.rounds

    def action_frequencies(self) -> np.ndarray:
        """Fraction of rounds each learner action was pulled"""
        counts = np.bincount(self.trace.chosen, minlength=self.trace.num_arms)
        return counts / self.rounds

    def summary(self) -> Dict[str, Any]:
        return {
            'config_id': self.config_id,
            'seed': self.seed,
            'T': self.rounds,
            'learner': self.learner_label,
            'mode': self.mode.value,
            'optimizer_avg': self.optimizer_average,
            'learner_total': self.learner_total,
            'regret': self.regret,
            'swap_regret': self.swap_regret,
            'action_frequencies': self.action_frequencies().round(6).tolist(),
        }


@dataclass
class SweepEntry:
    """Outcome of one run inside a sweep: a result, or the error that stopped it"""
    index: int
    config_id: str
    seed: int
    result: Optional[MatchResult] = None
    error_message: Optional[str] = field(default=None)

    @property
    def success(self) -> bool:
        return self.result is not None
