"""
Repeated-game harness: runs T rounds of optimizer against learner and records
the learner's reward trace together with the utility and regret metrics
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .errors import LabError
from .learners import build_learner
from .regret_audit import regret, swap_regret
from ..models.game_models import MixedStrategy
from ..models.learner_models import Feedback, FeedbackMode, RewardTrace
from ..models.match_models import MatchConfig, MatchResult, SamplingMode, SweepEntry
from ..utils.run_logger import run_logger

logger = logging.getLogger(__name__)

# second entropy word for the optimizer's own action sampling
OPTIMIZER_STREAM = 0x0F7


def _optimizer_rounds(config: MatchConfig, chosen: np.ndarray) -> Iterator[Tuple[int, MixedStrategy]]:
    """(t, alpha_t) pairs; adaptive optimizers see the learner's actions before round t"""
    if config.schedule is not None:
        t = 0
        for alpha, length in config.schedule.segments:
            for _ in range(length):
                yield t, alpha
                t += 1
    else:
        for t in range(config.rounds):
            yield t, config.optimizer.strategy(t, chosen[:t].tolist())


def run(config: MatchConfig) -> MatchResult:
    """Play config.rounds rounds; deterministic given config.seed"""
    game = config.game
    rounds = config.rounds
    num_arms = game.num_learner_actions
    learner = build_learner(config.learner.with_seed(config.seed), num_arms, rounds, game)
    optimizer_rng = np.random.default_rng([config.seed, OPTIMIZER_STREAM])
    sampled = config.mode == SamplingMode.SAMPLED
    bandit = learner.feedback_mode == FeedbackMode.BANDIT

    run_logger.log_match_start(game.name, config.learner.label, rounds, config.seed, config.mode.value)
    logger.debug(f"Match {config.config_id or '<unnamed>'}: {config.learner.label}, T={rounds}, seed={config.seed}")

    rewards = np.empty((rounds, num_arms))
    chosen = np.empty(rounds, dtype=int)
    distributions = np.empty((rounds, num_arms))
    optimizer_utilities = np.empty(rounds)
    learner_utilities = np.empty(rounds)
    optimizer_actions = np.empty(rounds, dtype=int) if sampled else None

    cached_alpha = None
    learner_row = optimizer_row = edges = None
    feedback = None
    for t, alpha in _optimizer_rounds(config, chosen):
        if alpha is not cached_alpha:
            cached_alpha = alpha
            learner_row = alpha.probs @ game.learner_payoffs
            optimizer_row = alpha.probs @ game.optimizer_payoffs
            edges = np.cumsum(alpha.probs)

        probs = learner.step(t, feedback, alpha if learner.needs_optimizer_strategy else None)
        arm = learner.sample(probs)

        if sampled:
            action = min(int(np.searchsorted(edges, optimizer_rng.random() * edges[-1], side='right')),
                         game.num_optimizer_actions - 1)
            optimizer_actions[t] = action
            reward_vector = game.learner_payoffs[action]
            optimizer_utilities[t] = game.optimizer_payoffs[action, arm]
            learner_utilities[t] = reward_vector[arm]
        else:
            reward_vector = learner_row
            optimizer_utilities[t] = optimizer_row @ probs
            learner_utilities[t] = reward_vector @ probs

        rewards[t] = reward_vector
        chosen[t] = arm
        distributions[t] = probs
        feedback = Feedback.bandit(arm, reward_vector[arm]) if bandit else Feedback.experts(reward_vector)

    trace = RewardTrace(rewards, chosen)
    swap = swap_regret(trace)
    result = MatchResult(
        config_id=config.config_id,
        seed=config.seed,
        rounds=rounds,
        optimizer_total=float(optimizer_utilities.sum()),
        learner_total=float(learner_utilities.sum()),
        trace=trace,
        distributions=distributions,
        optimizer_utilities=optimizer_utilities,
        regret=regret(trace),
        swap_regret=swap.value,
        swap_function=swap.swap_function,
        learner_label=config.learner.label,
        mode=config.mode,
        optimizer_actions=optimizer_actions,
    )
    run_logger.log_match_result(result.summary())
    return result


def _run_entry(indexed: Tuple[int, MatchConfig]) -> SweepEntry:
    index, config = indexed
    try:
        return SweepEntry(index=index, config_id=config.config_id, seed=config.seed, result=run(config))
    except (LabError, ValueError) as e:
        logger.error(f"❌ Run {index} ({config.config_id or 'unnamed'}, seed {config.seed}) failed: {e}")
        run_logger.log_run_error('match', f"{config.config_id}#{config.seed}", str(e))
        return SweepEntry(index=index, config_id=config.config_id, seed=config.seed, error_message=str(e))


def sweep(configs: Sequence[MatchConfig], workers: int = 1) -> List[SweepEntry]:
    """Independent runs in input order; a failing run is reported in its entry without stopping the rest"""
    if not configs:
        raise ValueError("sweep needs at least one match configuration")
    indexed = list(enumerate(configs))
    if workers > 1 and len(indexed) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(indexed))) as executor:
            entries = list(executor.map(_run_entry, indexed))
    else:
        entries = [_run_entry(item) for item in indexed]

    failed = sum(not entry.success for entry in entries)
    run_logger.log_sweep(len(entries), failed)
    logger.info(f"📊 Sweep finished: {len(entries) - failed}/{len(entries)} runs succeeded")
    return entries
