"""
Data models for optimizer policies and per-round schedules
"""
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Sequence, Tuple

import numpy as np

from ..core.errors import DimensionMismatchError, ScheduleError
from .game_models import MixedStrategy, StrategyLike


def _strategy(value: StrategyLike) -> MixedStrategy:
    return value if isinstance(value, MixedStrategy) else MixedStrategy(np.asarray(value, dtype=float))


@dataclass(frozen=True)
class PolicyStep:
    """Play alpha for duration units of (continuous) time"""
    alpha: MixedStrategy
    duration: float

    def __post_init__(self):
        object.__setattr__(self, 'alpha', _strategy(self.alpha))
        object.__setattr__(self, 'duration', float(self.duration))
        if not np.isfinite(self.duration) or self.duration < 0:
            raise ScheduleError(f"Step durations must be finite and non-negative, got {self.duration}")


@dataclass(frozen=True)
class Policy:
    """Sequence of (mixed strategy, duration) steps with positive total duration"""
    steps: Tuple[PolicyStep, ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise ScheduleError("A policy needs at least one step")
        sizes = {step.alpha.size for step in steps}
        if len(sizes) != 1:
            raise DimensionMismatchError(f"Policy steps mix strategy sizes {sorted(sizes)}")
        if not sum(step.duration for step in steps) > 0:
            raise ScheduleError("A policy needs positive total duration")
        object.__setattr__(self, 'steps', steps)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[StrategyLike, float]]) -> 'Policy':
        return cls(tuple(PolicyStep(alpha, duration) for alpha, duration in pairs))

    @property
    def total_duration(self) -> float:
        return float(sum(step.duration for step in self.steps))

    @property
    def num_actions(self) -> int:
        return self.steps[0].alpha.size

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[PolicyStep]:
        return iter(self.steps)

    def scaled(self, factor: float) -> 'Policy':
        if not factor > 0:
            raise ScheduleError(f"Scale factor must be positive, got {factor}")
        return Policy(tuple(PolicyStep(step.alpha, step.duration * factor) for step in self.steps))

    def normalized(self) -> 'Policy':
        return self.scaled(1.0 / self.total_duration)

    def to_dict(self) -> Dict[str, Any]:
        return {'steps': [{'alpha': step.alpha.probs.tolist(), 't': step.duration} for step in self.steps]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Policy':
        if 'steps' not in data or not isinstance(data['steps'], list):
            raise ScheduleError("Policy description needs a 'steps' list")
        pairs = []
        for index, step in enumerate(data['steps']):
            if not isinstance(step, dict) or 'alpha' not in step or 't' not in step:
                raise ScheduleError(f"Policy step {index} needs 'alpha' and 't' fields")
            pairs.append((step['alpha'], step['t']))
        return cls.from_pairs(pairs)


@dataclass(frozen=True)
class RoundSchedule:
    """Non-adaptive optimizer play: run-length segments of (strategy, number of rounds)"""
    segments: Tuple[Tuple[MixedStrategy, int], ...]

    def __post_init__(self):
        if any(rounds < 0 for _, rounds in self.segments):
            raise ScheduleError("Segment lengths must be non-negative")
        segments = tuple((_strategy(alpha), int(rounds)) for alpha, rounds in self.segments if int(rounds) > 0)
        if not segments:
            raise ScheduleError("A schedule needs at least one round")
        if len({alpha.size for alpha, _ in segments}) != 1:
            raise DimensionMismatchError("Schedule segments mix strategy sizes")
        object.__setattr__(self, 'segments', segments)
        object.__setattr__(self, '_ends', np.cumsum([rounds for _, rounds in segments]))

    @classmethod
    def constant(cls, strategy: StrategyLike, rounds: int) -> 'RoundSchedule':
        if rounds < 1:
            raise ScheduleError(f"A schedule needs at least one round, got {rounds}")
        return cls(((_strategy(strategy), rounds),))

    @classmethod
    def from_segments(cls, segments: Sequence[Tuple[StrategyLike, int]]) -> 'RoundSchedule':
        return cls(tuple(segments))

    @property
    def num_rounds(self) -> int:
        return int(self._ends[-1])

    @property
    def num_actions(self) -> int:
        return self.segments[0][0].size

    @property
    def is_constant(self) -> bool:
        first = self.segments[0][0]
        return all(alpha == first for alpha, _ in self.segments)

    def allocations(self) -> List[int]:
        return [rounds for _, rounds in self.segments]

    def strategy_at(self, t: int) -> MixedStrategy:
        if not 0 <= t < self.num_rounds:
            raise ScheduleError(f"Round {t} outside [0, {self.num_rounds})")
        return self.segments[int(np.searchsorted(self._ends, t, side='right'))][0]

    def materialize(self) -> np.ndarray:
        """T x M array with one optimizer strategy per round"""
        return np.vstack([np.tile(alpha.probs, (rounds, 1)) for alpha, rounds in self.segments])
