"""
Bimatrix game computations: utilities, best responses, weak dominance,
Stackelberg commitments and the built-in example games
"""
import itertools
import logging
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import DimensionMismatchError, DominatedStrategyError, LPSolveError
from .lp_solver import lp_solve
from ..models.game_models import (
    Commitment,
    ConstraintSense,
    DominanceCertificate,
    Game,
    LinearProgram,
    LPStatus,
    MixedStrategy,
    PlayerRole,
    StackelbergSolution,
    StrategyLike,
    as_probs,
)

logger = logging.getLogger(__name__)

__all__ = [
    'utility', 'best_responses', 'is_weakly_dominated', 'stackelberg', 'max_margin',
    'conservative_commitment', 'lp_solve', 'table1_game', 'table1_game_for_learner',
    'matching_pennies', 'two_action_learner_game', 'random_game', 'pure_nash_equilibria',
    'constant_sum_value', 'brute_force_stackelberg', 'simplex_grid',
]

TIE_TOLERANCE = 1e-9


def utility(game: Game, alpha: StrategyLike, beta: StrategyLike,
            player: Union[PlayerRole, str] = PlayerRole.OPTIMIZER) -> float:
    """Bilinear form alpha^T U beta for the requested player"""
    a = as_probs(alpha, game.num_optimizer_actions)
    b = as_probs(beta, game.num_learner_actions)
    payoffs = game.optimizer_payoffs if PlayerRole(player) == PlayerRole.OPTIMIZER else game.learner_payoffs
    return float(a @ payoffs @ b)


def best_responses(game: Game, alpha: StrategyLike) -> List[int]:
    """Learner actions within TIE_TOLERANCE of the best learner utility against alpha"""
    values = as_probs(alpha, game.num_optimizer_actions) @ game.learner_payoffs
    return [int(j) for j in np.flatnonzero(values >= values.max() - TIE_TOLERANCE)]


def is_weakly_dominated(game: Game, action: int) -> DominanceCertificate:
    """Feasibility LP: does some mix of the other learner actions match action against every row?"""
    n = game.num_learner_actions
    if not 0 <= action < n:
        raise DimensionMismatchError(f"Learner action {action} outside [0, {n})")
    if n < 2:
        return DominanceCertificate(action=action, dominated=False)

    others = [k for k in range(n) if k != action]
    payoffs = game.learner_payoffs
    m = game.num_optimizer_actions
    lp = LinearProgram(
        objective=np.zeros(len(others)),
        constraint_matrix=np.vstack([payoffs[:, others], np.ones((1, len(others)))]),
        constraint_bounds=np.concatenate([payoffs[:, action], [1.0]]),
        senses=[ConstraintSense.GE] * m + [ConstraintSense.EQ],
    )
    result = lp_solve(lp)
    if not result.is_optimal:
        return DominanceCertificate(action=action, dominated=False)

    mix = np.zeros(n)
    mix[others] = result.x
    logger.debug(f"Learner action {game.learner_actions[action]} is weakly dominated by {np.round(mix, 6)}")
    return DominanceCertificate(action=action, dominated=True, dominating_mix=mix)


def _best_response_lp(game: Game, target: int) -> LinearProgram:
    """max u_O(alpha, target) over alpha such that target is a learner best response"""
    others = [k for k in range(game.num_learner_actions) if k != target]
    m = game.num_optimizer_actions
    rows = [game.learner_payoffs[:, k] - game.learner_payoffs[:, target] for k in others]
    rows.append(np.ones(m))
    return LinearProgram(
        objective=game.optimizer_payoffs[:, target],
        constraint_matrix=np.array(rows).reshape(-1, m),
        constraint_bounds=np.concatenate([np.zeros(len(others)), [1.0]]),
        senses=[ConstraintSense.LE] * len(others) + [ConstraintSense.EQ],
    )


def max_margin(game: Game, target: int) -> Tuple[MixedStrategy, float]:
    """alpha' maximizing kappa = min over b' != target of u_L(alpha', target) - u_L(alpha', b')"""
    m = game.num_optimizer_actions
    others = [k for k in range(game.num_learner_actions) if k != target]
    # variables: alpha (m entries), kappa (free, capped at the payoff range)
    rows = [np.append(game.learner_payoffs[:, k] - game.learner_payoffs[:, target], 1.0) for k in others]
    rows.append(np.append(np.ones(m), 0.0))
    objective = np.zeros(m + 1)
    objective[-1] = 1.0
    lp = LinearProgram(
        objective=objective,
        constraint_matrix=np.array(rows).reshape(-1, m + 1),
        constraint_bounds=np.concatenate([np.zeros(len(others)), [1.0]]),
        senses=[ConstraintSense.LE] * len(others) + [ConstraintSense.EQ],
        lower_bounds=[0.0] * m + [None],
        upper_bounds=[None] * m + [2.0 * game.scale],
    )
    result = lp_solve(lp).require_optimal()
    alpha = _normalized(result.x[:m])
    return alpha, float(result.x[-1])


def _normalized(values: np.ndarray) -> MixedStrategy:
    probs = np.clip(values, 0.0, None)
    return MixedStrategy(probs / probs.sum())


def stackelberg(game: Game) -> StackelbergSolution:
    """Optimal commitment with optimistic learner tie-breaking.

    One LP per learner action; value ties are resolved toward the action that
    can be enforced with the largest margin, then toward the lowest index.
    """
    candidates: List[Tuple[int, MixedStrategy, float]] = []
    failures = 0
    for target in range(game.num_learner_actions):
        result = lp_solve(_best_response_lp(game, target))
        if result.is_optimal:
            alpha = _normalized(result.x)
            candidates.append((target, alpha, utility(game, alpha, MixedStrategy.pure(target, game.num_learner_actions))))
        elif result.status == LPStatus.INFEASIBLE:
            logger.debug(f"Learner action {game.learner_actions[target]} is never a best response")
        else:
            failures += 1
            logger.warning(f"⚠️ Stackelberg LP for {game.learner_actions[target]} ended with {result.status.value}")

    if not candidates:
        raise LPSolveError(f"All {game.num_learner_actions} Stackelberg LPs failed ({failures} numerical failures)")

    best_value = max(value for _, _, value in candidates)
    tied = [c for c in candidates if c[2] >= best_value - TIE_TOLERANCE]
    # margin outranks index: a value-tied action with no enforcement margin loses to one that has it
    if len(tied) > 1:
        margins = {target: _safe_margin(game, target) for target, _, _ in tied}
        best_margin = max(margins.values())
        tied = [c for c in tied if margins[c[0]] >= best_margin - TIE_TOLERANCE]

    response, commitment, value = tied[0]
    logger.debug(f"Stackelberg response {game.learner_actions[response]} with value {value:.6f}")
    return StackelbergSolution(commitment=commitment, response=response, value=value)


def _safe_margin(game: Game, target: int) -> float:
    try:
        return max_margin(game, target)[1]
    except LPSolveError:
        return -np.inf


def conservative_commitment(game: Game, delta: float,
                            solution: Optional[StackelbergSolution] = None) -> Commitment:
    """(1 - delta) * Stackelberg commitment + delta * max-margin strategy"""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    solution = solution or stackelberg(game)
    target = solution.response
    perturbation, kappa = max_margin(game, target)
    if kappa <= TIE_TOLERANCE:
        raise DominatedStrategyError(
            f"Learner action {game.learner_actions[target]} cannot be made a unique best response "
            f"(best margin {kappa:.3e}); it is weakly dominated"
        )
    strategy = solution.commitment.mix(perturbation, delta)
    logger.debug(f"Conservative commitment toward {game.learner_actions[target]}: margin {delta * kappa:.6f}")
    return Commitment(
        strategy=strategy,
        target_response=target,
        margin=delta * kappa,
        delta=delta,
        perturbation=perturbation,
    )


def table1_game(epsilon: float = 0.05) -> Game:
    """Two-row, three-column game where the optimizer beats its Stackelberg value 0 against mean-based learners"""
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
    return Game(
        optimizer_payoffs=[[0.0, -2.0, -2.0], [0.0, -2.0, 2.0]],
        learner_payoffs=[[epsilon, -1.0, 0.0], [-1.0, 1.0, 0.0]],
        optimizer_actions=('Top', 'Bottom'),
        learner_actions=('Left', 'Mid', 'Right'),
        scale=2.0,
        name=f"table1-eps{epsilon:g}",
    )


def table1_game_for_learner(gamma: float) -> Game:
    """Horizon-coupled variant whose Left entry is sqrt(gamma)"""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    return table1_game(float(np.sqrt(gamma)))


def matching_pennies() -> Game:
    payoffs = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return Game(
        optimizer_payoffs=payoffs,
        learner_payoffs=-payoffs,
        optimizer_actions=('Heads', 'Tails'),
        learner_actions=('Heads', 'Tails'),
        scale=1.0,
        name='matching-pennies',
    )


def two_action_learner_game() -> Game:
    """Coordination-style game with two learner actions and Stackelberg value 2.5"""
    return Game(
        optimizer_payoffs=[[1.0, 3.0], [0.0, 2.0]],
        learner_payoffs=[[1.0, 0.0], [0.0, 1.0]],
        optimizer_actions=('Up', 'Down'),
        learner_actions=('Left', 'Right'),
        scale=3.0,
        name='two-action-learner',
    )


def random_game(rows: int, cols: int, seed: int, low: int = -2, high: int = 2) -> Game:
    """Integer payoffs drawn uniformly from [low, high]"""
    if rows < 1 or cols < 1:
        raise ValueError(f"Random game needs positive dimensions, got {rows}x{cols}")
    if low > high:
        raise ValueError(f"low ({low}) must not exceed high ({high})")
    rng = np.random.default_rng(seed)
    optimizer = rng.integers(low, high + 1, size=(rows, cols)).astype(float)
    learner = rng.integers(low, high + 1, size=(rows, cols)).astype(float)
    return Game(
        optimizer_payoffs=optimizer,
        learner_payoffs=learner,
        optimizer_actions=tuple(f"a{i + 1}" for i in range(rows)),
        learner_actions=tuple(f"b{j + 1}" for j in range(cols)),
        scale=float(max(abs(low), abs(high), 1)),
        name=f"random-{rows}x{cols}-seed{seed}",
    )


def pure_nash_equilibria(game: Game) -> List[Tuple[int, int]]:
    optimizer_best = game.optimizer_payoffs >= game.optimizer_payoffs.max(axis=0, keepdims=True) - TIE_TOLERANCE
    learner_best = game.learner_payoffs >= game.learner_payoffs.max(axis=1, keepdims=True) - TIE_TOLERANCE
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(optimizer_best & learner_best))]


def constant_sum_value(game: Game) -> Optional[float]:
    """C when u_O + u_L = C everywhere, else None"""
    total = game.optimizer_payoffs + game.learner_payoffs
    if float(np.ptp(total)) <= TIE_TOLERANCE:
        return float(total[0, 0])
    return None


def simplex_grid(size: int, resolution: int) -> np.ndarray:
    """Every point of the probability simplex whose coordinates are multiples of 1/resolution"""
    if size < 1 or resolution < 1:
        raise ValueError(f"simplex_grid needs size >= 1 and resolution >= 1, got {size}, {resolution}")
    points = []
    # stars and bars: bar positions split resolution units over size coordinates
    for bars in itertools.combinations(range(resolution + size - 1), size - 1):
        edges = np.array((-1,) + bars + (resolution + size - 1,))
        points.append(np.diff(edges) - 1)
    return np.array(points, dtype=float) / resolution


def brute_force_stackelberg(game: Game, resolution: int = 200) -> Tuple[float, MixedStrategy, int]:
    """Grid oracle: best optimistic best-response value over simplex_grid(M, resolution)"""
    grid = simplex_grid(game.num_optimizer_actions, resolution)
    learner_values = grid @ game.learner_payoffs
    optimizer_values = grid @ game.optimizer_payoffs
    is_best = learner_values >= learner_values.max(axis=1, keepdims=True) - TIE_TOLERANCE
    masked = np.where(is_best, optimizer_values, -np.inf)
    per_point = masked.max(axis=1)
    index = int(np.argmax(per_point))
    response = int(np.argmax(masked[index]))
    return float(per_point[index]), MixedStrategy(grid[index]), response
