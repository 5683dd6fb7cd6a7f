"""
Data models for learner configuration, reward traces and regret audits
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..core.errors import ConfigurationError, DimensionMismatchError, FeedbackModeError


class LearnerAlgorithm(str, Enum):
    MW = 'mw'
    FTPL = 'ftpl'
    FTL = 'ftl'
    EXP3 = 'exp3'
    BLUM_MANSOUR = 'blum_mansour'
    ADVERSARIAL = 'adversarial_mean_based'


class FeedbackMode(str, Enum):
    EXPERTS = 'experts'
    BANDIT = 'bandit'


# algorithms that may run inside the swap-regret wrapper
INNER_ALGORITHMS = (LearnerAlgorithm.MW, LearnerAlgorithm.FTPL, LearnerAlgorithm.FTL)


@dataclass
class LearnerConfig:
    """Which learner to build and how.

    learning_rate is the step size for MW/EXP3 and the perturbation scale for
    FTPL; None selects the horizon-dependent default. gamma is the mean-based
    slack used by FTL and the adversarial learner.
    """
    algorithm: LearnerAlgorithm
    learning_rate: Optional[float] = None
    gamma: Optional[float] = None
    feedback: Optional[FeedbackMode] = None
    seed: int = 0
    inner: Optional[LearnerAlgorithm] = None

    def __post_init__(self):
        try:
            self.algorithm = LearnerAlgorithm(self.algorithm)
            if self.inner is not None:
                self.inner = LearnerAlgorithm(self.inner)
            if self.feedback is not None:
                self.feedback = FeedbackMode(self.feedback)
        except ValueError as e:
            raise ConfigurationError(f"Invalid learner setting: {e}")

        if self.feedback is None:
            self.feedback = FeedbackMode.BANDIT if self.algorithm == LearnerAlgorithm.EXP3 else FeedbackMode.EXPERTS
        if self.algorithm == LearnerAlgorithm.BLUM_MANSOUR and self.inner is None:
            self.inner = LearnerAlgorithm.MW
        self.validate()

    def validate(self):
        if self.learning_rate is not None and not self.learning_rate > 0:
            raise ConfigurationError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.gamma is not None and not 0.0 < self.gamma < 1.0:
            raise ConfigurationError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.algorithm == LearnerAlgorithm.EXP3 and self.feedback != FeedbackMode.BANDIT:
            raise ConfigurationError("EXP3 requires bandit feedback")
        if self.algorithm != LearnerAlgorithm.EXP3 and self.feedback != FeedbackMode.EXPERTS:
            raise ConfigurationError(f"{self.algorithm.value} requires experts feedback")
        if self.inner is not None:
            if self.algorithm != LearnerAlgorithm.BLUM_MANSOUR:
                raise ConfigurationError("inner is only meaningful for the blum_mansour learner")
            if self.inner not in INNER_ALGORITHMS:
                raise ConfigurationError(f"Unsupported inner algorithm: {self.inner.value}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def label(self) -> str:
        if self.algorithm == LearnerAlgorithm.BLUM_MANSOUR:
            return f"blum_mansour({self.inner.value})"
        return self.algorithm.value

    def with_seed(self, seed: int) -> 'LearnerConfig':
        return LearnerConfig(self.algorithm, self.learning_rate, self.gamma, self.feedback, seed, self.inner)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {'algorithm': self.algorithm.value, 'feedback': self.feedback.value}
        if self.learning_rate is not None:
            data['learning_rate'] = self.learning_rate
        if self.gamma is not None:
            data['gamma'] = self.gamma
        if self.inner is not None:
            data['inner'] = self.inner.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], seed: int = 0) -> 'LearnerConfig':
        if 'algorithm' not in data:
            raise ConfigurationError("Learner settings need an 'algorithm' field")
        unknown = set(data) - {'algorithm', 'learning_rate', 'gamma', 'feedback', 'inner', 'seed'}
        if unknown:
            raise ConfigurationError(f"Unknown learner settings: {', '.join(sorted(unknown))}")
        return cls(
            algorithm=data['algorithm'],
            learning_rate=data.get('learning_rate'),
            gamma=data.get('gamma'),
            feedback=data.get('feedback'),
            seed=int(data.get('seed', seed)),
            inner=data.get('inner'),
        )


@dataclass
class Feedback:
    """What a learner sees after a round: the full reward vector, or one pulled arm and its reward"""
    rewards: Optional[np.ndarray] = None
    chosen: Optional[int] = None
    reward: Optional[float] = None

    @classmethod
    def experts(cls, rewards: Sequence[float]) -> 'Feedback':
        return cls(rewards=np.asarray(rewards, dtype=float))

    @classmethod
    def bandit(cls, chosen: int, reward: float) -> 'Feedback':
        return cls(chosen=int(chosen), reward=float(reward))

    @property
    def mode(self) -> FeedbackMode:
        if self.rewards is not None and self.chosen is None:
            return FeedbackMode.EXPERTS
        if self.rewards is None and self.chosen is not None and self.reward is not None:
            return FeedbackMode.BANDIT
        raise FeedbackModeError("Feedback must carry either a reward vector or a (chosen, reward) pair")


@dataclass(eq=False)
class RewardTrace:
    """Per-round reward vectors r[t, i] and pulled arms; row t is round t (0-based)"""
    rewards: np.ndarray
    chosen: np.ndarray

    def __post_init__(self):
        self.rewards = np.asarray(self.rewards, dtype=float)
        self.chosen = np.asarray(self.chosen, dtype=int).reshape(-1)
        if self.rewards.ndim != 2:
            raise DimensionMismatchError(f"Rewards must be a T x K matrix, got shape {self.rewards.shape}")
        if self.rewards.shape[0] != self.chosen.size:
            raise DimensionMismatchError(
                f"Trace has {self.rewards.shape[0]} reward rows but {self.chosen.size} chosen arms"
            )
        if self.chosen.size and (self.chosen.min() < 0 or self.chosen.max() >= self.rewards.shape[1]):
            raise DimensionMismatchError(f"Chosen arms must lie in [0, {self.rewards.shape[1]})")
        self._cumulative: Optional[np.ndarray] = None

    @property
    def num_rounds(self) -> int:
        return int(self.rewards.shape[0])

    @property
    def num_arms(self) -> int:
        return int(self.rewards.shape[1])

    @property
    def cumulative(self) -> np.ndarray:
        """sigma[t, i] = sum of rewards[s, i] for s <= t"""
        if self._cumulative is None:
            self._cumulative = np.cumsum(self.rewards, axis=0)
        return self._cumulative

    def realized_rewards(self) -> np.ndarray:
        return self.rewards[np.arange(self.num_rounds), self.chosen]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RewardTrace):
            return NotImplemented
        return np.array_equal(self.rewards, other.rewards) and np.array_equal(self.chosen, other.chosen)


@dataclass(frozen=True)
class SwapFunction:
    """Map pi from arms to arms; mapping[i] replaces every play of arm i"""
    mapping: tuple

    def __post_init__(self):
        mapping = tuple(int(j) for j in self.mapping)
        if any(j < 0 or j >= len(mapping) for j in mapping):
            raise DimensionMismatchError(f"Swap function entries must lie in [0, {len(mapping)}): {mapping}")
        object.__setattr__(self, 'mapping', mapping)

    @classmethod
    def identity(cls, num_arms: int) -> 'SwapFunction':
        return cls(tuple(range(num_arms)))

    @classmethod
    def constant(cls, target: int, num_arms: int) -> 'SwapFunction':
        return cls(tuple([target] * num_arms))

    @property
    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.mapping))

    def __call__(self, arm: int) -> int:
        return self.mapping[arm]


@dataclass(frozen=True)
class SwapRegretReport:
    value: float
    swap_function: SwapFunction
    per_arm_gain: tuple = ()


@dataclass(frozen=True)
class MeanBasedViolation:
    """Arm trailing the leader by more than gamma*T that was still played with probability above gamma"""
    round: int
    arm: int
    probability: float
    deficit: float


@dataclass
class AuditReport:
    gamma: float
    threshold: float
    violations: List[MeanBasedViolation] = field(default_factory=list)
    regret: Optional[float] = None
    swap_regret: Optional[float] = None
    swap_function: Optional[SwapFunction] = None

    @property
    def passed(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        lines = [f"{len(self.violations)} violations (gamma={self.gamma:.6g}, slack={self.threshold:.6g})"]
        if self.regret is not None:
            lines.append(f"regret: {self.regret:.6f}")
        if self.swap_regret is not None:
            lines.append(f"swap regret: {self.swap_regret:.6f} via {list(self.swap_function.mapping)}")
        return "\n".join(lines)
