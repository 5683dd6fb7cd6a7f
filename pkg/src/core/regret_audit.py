"""
External regret, swap regret and mean-based audits over realized reward traces
"""
import logging
from typing import List, Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatchError
from ..models.learner_models import (
    AuditReport,
    MeanBasedViolation,
    RewardTrace,
    SwapFunction,
    SwapRegretReport,
)

logger = logging.getLogger(__name__)

GAIN_TOLERANCE = 1e-12


def regret(trace: RewardTrace) -> float:
    """Best fixed arm's total minus the realized total; may be negative"""
    if trace.num_rounds == 0:
        return 0.0
    best_fixed = float(trace.rewards.sum(axis=0).max())
    return best_fixed - float(trace.realized_rewards().sum())


def _rewards_by_source(trace: RewardTrace) -> np.ndarray:
    """totals[i, j] = sum of rewards of arm j over the rounds where arm i was pulled"""
    totals = np.zeros((trace.num_arms, trace.num_arms))
    np.add.at(totals, trace.chosen, trace.rewards)
    return totals


def swap_gain(trace: RewardTrace, mapping: Union[SwapFunction, Sequence[int]]) -> float:
    """Reward gained by replaying every pull of arm i as mapping[i]"""
    swap = mapping if isinstance(mapping, SwapFunction) else SwapFunction(tuple(mapping))
    if len(swap.mapping) != trace.num_arms:
        raise DimensionMismatchError(f"Swap function covers {len(swap.mapping)} arms, trace has {trace.num_arms}")
    totals = _rewards_by_source(trace)
    arms = np.arange(trace.num_arms)
    return float((totals[arms, list(swap.mapping)] - totals[arms, arms]).sum())


def swap_regret(trace: RewardTrace) -> SwapRegretReport:
    """Maximum of swap_gain over all maps, solved independently per source arm"""
    totals = _rewards_by_source(trace)
    mapping = []
    gains = []
    for arm in range(trace.num_arms):
        row = totals[arm]
        best = float(row.max())
        if row[arm] >= best - GAIN_TOLERANCE:
            mapping.append(arm)
            gains.append(0.0)
        else:
            mapping.append(int(np.argmax(row)))
            gains.append(best - float(row[arm]))
    return SwapRegretReport(value=float(sum(gains)), swap_function=SwapFunction(tuple(mapping)),
                            per_arm_gain=tuple(gains))


def mean_based_violations(trace: RewardTrace, distributions: np.ndarray, gamma: float,
                          horizon: Optional[int] = None) -> List[MeanBasedViolation]:
    """(round, arm) pairs where the arm trailed the leader by more than gamma*T before the round
    yet was played with probability above gamma"""
    distributions = np.asarray(distributions, dtype=float)
    if distributions.shape != trace.rewards.shape:
        raise DimensionMismatchError(
            f"Distributions have shape {distributions.shape}, trace rewards {trace.rewards.shape}"
        )
    horizon = horizon or trace.num_rounds
    threshold = gamma * horizon

    before = np.zeros_like(trace.rewards)
    if trace.num_rounds > 1:
        before[1:] = trace.cumulative[:-1]
    deficit = before.max(axis=1, keepdims=True) - before
    rounds, arms = np.nonzero((deficit > threshold) & (distributions > gamma))
    return [
        MeanBasedViolation(round=int(t), arm=int(i), probability=float(distributions[t, i]),
                           deficit=float(deficit[t, i]))
        for t, i in zip(rounds, arms)
    ]


def mean_based_audit(trace: RewardTrace, distributions: np.ndarray, gamma: float,
                     horizon: Optional[int] = None) -> AuditReport:
    """Full audit: mean-based violations plus external and swap regret"""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    horizon = horizon or trace.num_rounds
    violations = mean_based_violations(trace, distributions, gamma, horizon)
    swap = swap_regret(trace)
    report = AuditReport(
        gamma=gamma,
        threshold=gamma * horizon,
        violations=violations,
        regret=regret(trace),
        swap_regret=swap.value,
        swap_function=swap.swap_function,
    )
    if violations:
        logger.info(f"⚠️ Mean-based audit found {len(violations)} violations at gamma={gamma:.4g}")
    else:
        logger.info(f"✅ Mean-based audit passed at gamma={gamma:.4g}")
    return report
