"""
Learner algorithms for the repeated game: the mean-based family (MW, FTPL, FTL,
EXP3), the swap-regret wrapper and the white-box adversarial mean-based learner
"""
import logging
from abc import ABC, abstractmethod
from typing import List, Optional, Union

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ConfigurationError, DimensionMismatchError, FeedbackModeError, StationaryDistributionError
from ..models.game_models import Game, StrategyLike, as_probs
from ..models.learner_models import Feedback, FeedbackMode, LearnerAlgorithm, LearnerConfig

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence]

STATIONARY_TOLERANCE = 1e-9
DIRECT_SOLVE_MAX_ARMS = 64
POWER_ITERATION_TOLERANCE = 1e-12
POWER_ITERATION_MAX_STEPS = 100_000


def default_learning_rate(num_arms: int, horizon: int) -> float:
    """sqrt(ln K / T), with K floored at 2 so a single arm still gets a positive rate"""
    return float(np.sqrt(np.log(max(num_arms, 2)) / horizon))


def default_exp3_rate(num_arms: int, horizon: int) -> float:
    return float(np.sqrt(np.log(max(num_arms, 2)) / (horizon * num_arms)))


def within_slack(cumulative: np.ndarray, threshold: float) -> List[int]:
    """Arms whose cumulative reward is at least leader - threshold"""
    cumulative = np.asarray(cumulative, dtype=float)
    return [int(i) for i in np.flatnonzero(cumulative >= cumulative.max() - threshold)]


def uniform_leader_probability(gaps: np.ndarray) -> float:
    """P(u + g_k > v_k for every rival k) with u, v_k iid Uniform[0, 1].

    The integrand prod_k clip(g_k + u, 0, 1) is a polynomial between the points
    where some factor leaves (0, 1), so each piece is integrated exactly.
    """
    gaps = np.asarray(gaps, dtype=float)
    if np.any(gaps <= -1.0):
        return 0.0
    if np.all(gaps >= 1.0):
        return 1.0
    breaks = np.concatenate([[0.0, 1.0], -gaps, 1.0 - gaps])
    breaks = np.unique(np.clip(breaks, 0.0, 1.0))
    total = 0.0
    for low, high in zip(breaks[:-1], breaks[1:]):
        middle = 0.5 * (low + high)
        values = gaps + middle
        if np.any(values <= 0.0):
            continue
        piece = Polynomial([1.0])
        for gap in gaps[values < 1.0]:
            piece = piece * Polynomial([gap, 1.0])
        antiderivative = piece.integ()
        total += antiderivative(high) - antiderivative(low)
    return float(total)


def stationary_distribution(transition: np.ndarray) -> np.ndarray:
    """p with p Q = p and sum(p) = 1 for a row-stochastic Q.

    Small chains use the minimum-norm least-squares solution, which is the
    uniform vector for the identity chain; larger ones use power iteration.
    """
    transition = np.asarray(transition, dtype=float)
    k = transition.shape[0]
    if transition.shape != (k, k):
        raise DimensionMismatchError(f"Transition matrix must be square, got {transition.shape}")

    if k <= DIRECT_SOLVE_MAX_ARMS:
        system = np.vstack([transition.T - np.eye(k), np.ones((1, k))])
        target = np.zeros(k + 1)
        target[-1] = 1.0
        probs = np.linalg.lstsq(system, target, rcond=None)[0]
    else:
        probs = np.full(k, 1.0 / k)
        for _ in range(POWER_ITERATION_MAX_STEPS):
            updated = probs @ transition
            if np.abs(updated - probs).sum() <= POWER_ITERATION_TOLERANCE:
                probs = updated
                break
            probs = updated

    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if not total > 0:
        raise StationaryDistributionError(f"Stationary solve returned a non-positive vector for Q=\n{transition}")
    probs = probs / total
    residual = float(np.abs(probs @ transition - probs).sum())
    if residual > STATIONARY_TOLERANCE:
        raise StationaryDistributionError(
            f"Stationary distribution residual {residual:.3e} exceeds {STATIONARY_TOLERANCE:g} "
            f"(K={k}, p={np.round(probs, 6).tolist()})"
        )
    return probs


class Learner(ABC):
    """Single-threaded learner state; one instance per match"""

    feedback_mode = FeedbackMode.EXPERTS
    needs_optimizer_strategy = False

    def __init__(self, num_arms: int, horizon: int, seed: SeedLike = 0):
        if num_arms < 1:
            raise ConfigurationError(f"Learner needs at least one arm, got {num_arms}")
        if horizon < 1:
            raise ConfigurationError(f"Horizon must be positive, got {horizon}")
        self.num_arms = num_arms
        self.horizon = horizon
        self.rng = np.random.default_rng(seed)
        self.cumulative = np.zeros(num_arms)
        self.rounds_observed = 0
        self._last_probs: Optional[np.ndarray] = None

    @property
    def name(self) -> str:
        return type(self).__name__

    def distribution(self, t: int, optimizer_strategy: Optional[StrategyLike] = None) -> np.ndarray:
        """Play distribution for round t given everything observed so far"""
        probs = self._distribution(t, optimizer_strategy)
        self._last_probs = probs
        return probs

    @abstractmethod
    def _distribution(self, t: int, optimizer_strategy: Optional[StrategyLike]) -> np.ndarray:
        ...

    def sample(self, probs: np.ndarray) -> int:
        """Draw one arm from probs with this learner's own generator"""
        edges = np.cumsum(probs)
        arm = int(np.searchsorted(edges, self.rng.random() * edges[-1], side='right'))
        return min(arm, self.num_arms - 1)

    def observe(self, feedback: Feedback):
        mode = feedback.mode
        if mode != self.feedback_mode:
            raise FeedbackModeError(f"{self.name} expects {self.feedback_mode.value} feedback, got {mode.value}")
        if mode == FeedbackMode.EXPERTS:
            if feedback.rewards.shape != (self.num_arms,):
                raise DimensionMismatchError(
                    f"{self.name} expects {self.num_arms} rewards, got shape {feedback.rewards.shape}"
                )
            self.cumulative += feedback.rewards
        elif not 0 <= feedback.chosen < self.num_arms:
            raise DimensionMismatchError(f"Pulled arm {feedback.chosen} outside [0, {self.num_arms})")
        self._update(feedback)
        self.rounds_observed += 1

    def _update(self, feedback: Feedback):
        """Algorithm-specific bookkeeping beyond the cumulative rewards"""

    def step(self, t: int, feedback: Optional[Feedback] = None,
             optimizer_strategy: Optional[StrategyLike] = None) -> np.ndarray:
        """Absorb the previous round's feedback, then return the round-t distribution"""
        if feedback is not None:
            self.observe(feedback)
        return self.distribution(t, optimizer_strategy)


class MultiplicativeWeights(Learner):
    """Weights proportional to exp(eta * cumulative reward)"""

    def __init__(self, num_arms: int, horizon: int, learning_rate: Optional[float] = None, seed: SeedLike = 0):
        super().__init__(num_arms, horizon, seed)
        self.learning_rate = learning_rate or default_learning_rate(num_arms, horizon)

    def _distribution(self, t, optimizer_strategy):
        scores = self.learning_rate * self.cumulative
        weights = np.exp(scores - scores.max())
        return weights / weights.sum()


class FollowThePerturbedLeader(Learner):
    """argmax of cumulative + Uniform[0, scale] noise, with its exact play distribution"""

    def __init__(self, num_arms: int, horizon: int, perturbation_scale: Optional[float] = None, seed: SeedLike = 0):
        super().__init__(num_arms, horizon, seed)
        self.perturbation_scale = perturbation_scale or float(np.sqrt(horizon))

    def _distribution(self, t, optimizer_strategy):
        if self.num_arms == 1:
            return np.ones(1)
        gaps = (self.cumulative[:, None] - self.cumulative[None, :]) / self.perturbation_scale
        probs = np.array([uniform_leader_probability(np.delete(gaps[i], i)) for i in range(self.num_arms)])
        return probs / probs.sum()


class FollowTheLeader(Learner):
    """Uniform over arms within gamma*T of the leader: the reference gamma-mean-based learner"""

    def __init__(self, num_arms: int, horizon: int, gamma: Optional[float] = None, seed: SeedLike = 0):
        super().__init__(num_arms, horizon, seed)
        self.gamma = gamma or horizon ** -0.25
        self.threshold = self.gamma * horizon

    def _distribution(self, t, optimizer_strategy):
        leaders = within_slack(self.cumulative, self.threshold)
        probs = np.zeros(self.num_arms)
        probs[leaders] = 1.0 / len(leaders)
        return probs


class Exp3(Learner):
    """Importance-weighted exponential weights on losses (reward_scale - r) / (2 reward_scale)"""

    feedback_mode = FeedbackMode.BANDIT

    def __init__(self, num_arms: int, horizon: int, learning_rate: Optional[float] = None,
                 reward_scale: float = 1.0, seed: SeedLike = 0):
        super().__init__(num_arms, horizon, seed)
        self.learning_rate = learning_rate or default_exp3_rate(num_arms, horizon)
        self.reward_scale = reward_scale
        self.log_weights = np.zeros(num_arms)

    def _distribution(self, t, optimizer_strategy):
        weights = np.exp(self.log_weights - self.log_weights.max())
        return weights / weights.sum()

    def _update(self, feedback: Feedback):
        probs = self._last_probs if self._last_probs is not None else self._distribution(0, None)
        loss = (self.reward_scale - feedback.reward) / (2.0 * self.reward_scale)
        self.log_weights[feedback.chosen] -= self.learning_rate * loss / probs[feedback.chosen]
        self._last_probs = None


class BlumMansour(Learner):
    """Swap-regret wrapper: one inner learner per arm, play the stationary distribution of their rows"""

    def __init__(self, num_arms: int, horizon: int, inner: List[Learner], seed: SeedLike = 0):
        super().__init__(num_arms, horizon, seed)
        if len(inner) != num_arms:
            raise ConfigurationError(f"Swap wrapper needs {num_arms} inner learners, got {len(inner)}")
        if any(learner.feedback_mode != FeedbackMode.EXPERTS for learner in inner):
            raise ConfigurationError("Inner learners of the swap wrapper need experts feedback")
        self.inner = inner
        self.last_transition: Optional[np.ndarray] = None

    @property
    def name(self) -> str:
        return f"BlumMansour({self.inner[0].name})"

    def _distribution(self, t, optimizer_strategy):
        transition = np.vstack([learner.distribution(t) for learner in self.inner])
        self.last_transition = transition
        return stationary_distribution(transition)

    def _update(self, feedback: Feedback):
        probs = self._last_probs if self._last_probs is not None else self._distribution(self.rounds_observed, None)
        for weight, learner in zip(probs, self.inner):
            learner.observe(Feedback.experts(weight * feedback.rewards))
        self._last_probs = None


class AdversarialMeanBased(Learner):
    """Mean-based learner that sees the optimizer's mixed strategy and plays the optimizer's
    worst column among the arms within gamma*T (strict) of the leader"""

    needs_optimizer_strategy = True

    def __init__(self, game: Game, horizon: int, gamma: Optional[float] = None, seed: SeedLike = 0):
        super().__init__(game.num_learner_actions, horizon, seed)
        self.game = game
        self.gamma = gamma or horizon ** -0.5
        self.threshold = self.gamma * horizon
        self.last_candidates: List[int] = []

    def candidate_set(self) -> List[int]:
        """J_t: arms whose deficit to the leader is strictly below gamma*T"""
        deficit = self.cumulative.max() - self.cumulative
        return [int(j) for j in np.flatnonzero(deficit < self.threshold)]

    def choose(self, optimizer_strategy: StrategyLike) -> int:
        return adversarial_step(optimizer_strategy, self.game, self)

    def _distribution(self, t, optimizer_strategy):
        if optimizer_strategy is None:
            raise ConfigurationError("The adversarial learner needs the optimizer's round strategy")
        probs = np.zeros(self.num_arms)
        probs[self.choose(optimizer_strategy)] = 1.0
        return probs


def adversarial_step(alpha: StrategyLike, game: Game, learner: AdversarialMeanBased) -> int:
    """Learner action with the lowest optimizer utility against alpha among the learner's J_t"""
    if game.num_learner_actions != learner.num_arms:
        raise DimensionMismatchError(
            f"Game has {game.num_learner_actions} learner actions, the learner tracks {learner.num_arms}"
        )
    column_values = as_probs(alpha, game.num_optimizer_actions) @ game.optimizer_payoffs
    candidates = learner.candidate_set()
    learner.last_candidates = candidates
    # np.argmin keeps the lowest index among ties
    return candidates[int(np.argmin(column_values[candidates]))]


def build_learner(config: LearnerConfig, num_arms: int, horizon: int, game: Optional[Game] = None) -> Learner:
    """Instantiate the learner described by config for a K-armed problem of the given horizon"""
    algorithm = config.algorithm
    logger.debug(f"Building {config.label} learner: K={num_arms}, T={horizon}, seed={config.seed}")

    if algorithm == LearnerAlgorithm.MW:
        return MultiplicativeWeights(num_arms, horizon, config.learning_rate, seed=config.seed)
    if algorithm == LearnerAlgorithm.FTPL:
        return FollowThePerturbedLeader(num_arms, horizon, config.learning_rate, seed=config.seed)
    if algorithm == LearnerAlgorithm.FTL:
        return FollowTheLeader(num_arms, horizon, config.gamma, seed=config.seed)
    if algorithm == LearnerAlgorithm.EXP3:
        scale = game.scale if game is not None else 1.0
        return Exp3(num_arms, horizon, config.learning_rate, reward_scale=scale, seed=config.seed)
    if algorithm == LearnerAlgorithm.BLUM_MANSOUR:
        children = np.random.SeedSequence(config.seed).spawn(num_arms)
        inner_config = LearnerConfig(config.inner, config.learning_rate, config.gamma, FeedbackMode.EXPERTS)
        inner = [_build_inner(inner_config, num_arms, horizon, child) for child in children]
        return BlumMansour(num_arms, horizon, inner, seed=config.seed)
    if algorithm == LearnerAlgorithm.ADVERSARIAL:
        if game is None:
            raise ConfigurationError("The adversarial mean-based learner needs the game")
        if game.num_learner_actions != num_arms:
            raise DimensionMismatchError(f"Game has {game.num_learner_actions} learner actions, expected {num_arms}")
        return AdversarialMeanBased(game, horizon, config.gamma, seed=config.seed)
    raise ConfigurationError(f"Unknown learner algorithm: {algorithm}")


def _build_inner(config: LearnerConfig, num_arms: int, horizon: int, seed: np.random.SeedSequence) -> Learner:
    if config.algorithm == LearnerAlgorithm.MW:
        return MultiplicativeWeights(num_arms, horizon, config.learning_rate, seed=seed)
    if config.algorithm == LearnerAlgorithm.FTPL:
        return FollowThePerturbedLeader(num_arms, horizon, config.learning_rate, seed=seed)
    return FollowTheLeader(num_arms, horizon, config.gamma, seed=seed)
