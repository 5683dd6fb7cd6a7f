"""
Control-problem view of non-adaptive optimizer play.

The learner's cumulative utilities are tracked relative to its last action,
x_i = u_i - u_N, and the state space is split into the cones S_j where action
j leads. A policy moves the state along straight segments; each segment earns
the optimizer's utility against the action whose cone contains it.
"""
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidCycleError, ScheduleError
from .game_core import simplex_grid, stackelberg
from .lp_solver import lp_solve
from ..models.control_models import (
    REGION_TOLERANCE,
    AnnotatedPolicy,
    AnnotatedStep,
    ControlState,
    CycleCertificate,
    SearchResult,
)
from ..models.game_models import ConstraintSense, Game, LinearProgram, MixedStrategy, StrategyLike, as_probs
from ..models.policy_models import Policy, PolicyStep

logger = logging.getLogger(__name__)

StateLike = Union[ControlState, Sequence[float], np.ndarray]

CROSSING_MARGIN = 1e-12
LABEL_TOLERANCE = 1e-12
CYCLE_TOLERANCE = 1e-7
ZERO_DURATION = 1e-12
CYCLE_SCALES = tuple(round(1.0 + 0.1 * i, 10) for i in range(31))


def _vector(state: StateLike) -> np.ndarray:
    if isinstance(state, ControlState):
        return state.x
    return np.asarray(state, dtype=float).reshape(-1)


def displacement(game: Game, alpha: StrategyLike) -> np.ndarray:
    """Reduced learner-utility velocity of alpha: u_L(alpha, b_j) - u_L(alpha, b_N) for j < N"""
    u = as_probs(alpha, game.num_optimizer_actions) @ game.learner_payoffs
    return u[:-1] - u[-1]


def regions_of(state: StateLike, tolerance: float = REGION_TOLERANCE) -> List[int]:
    """Indices of every region whose defining maximum is attained at state (0-based, N-1 = reference)"""
    ext = np.append(_vector(state), 0.0)
    slack = tolerance * max(1.0, float(np.abs(ext).max()))
    return [int(j) for j in np.flatnonzero(ext >= ext.max() - slack)]


def _crossings(start: np.ndarray, delta: np.ndarray) -> List[float]:
    """Fractions s in (0, 1) where two leading coordinates of start + s*delta swap"""
    roots = []
    scale = max(1.0, float(np.abs(delta).max()))
    for a, b in itertools.combinations(range(start.size), 2):
        slope = delta[a] - delta[b]
        if abs(slope) <= 1e-15 * scale:
            continue
        s = (start[b] - start[a]) / slope
        if not CROSSING_MARGIN < s < 1.0 - CROSSING_MARGIN:
            continue
        point = start + s * delta
        if point[a] >= point.max() - REGION_TOLERANCE * max(1.0, float(np.abs(point).max())):
            roots.append(float(s))
    roots.sort()
    unique: List[float] = []
    for s in roots:
        if not unique or s - unique[-1] > CROSSING_MARGIN:
            unique.append(s)
    return unique


def _optimizer_best(admissible: Sequence[int], column_values: np.ndarray) -> int:
    best = max(column_values[j] for j in admissible)
    return next(j for j in admissible if column_values[j] >= best - LABEL_TOLERANCE)


def subdivide(policy: Policy, game: Game, start: Optional[StateLike] = None) -> AnnotatedPolicy:
    """Split every step at region-boundary crossings and label each piece with the
    optimizer-best region containing both of its endpoints"""
    if policy.num_actions != game.num_optimizer_actions:
        raise ScheduleError(
            f"Policy strategies have {policy.num_actions} entries, game has {game.num_optimizer_actions} rows"
        )
    position = np.zeros(game.num_learner_actions - 1) if start is None else _vector(start).astype(float)
    waypoints = [position.copy()]
    steps: List[AnnotatedStep] = []

    for step in policy:
        if step.duration == 0:
            continue
        column_values = step.alpha.probs @ game.optimizer_payoffs
        delta = step.duration * displacement(game, step.alpha)
        cuts = [0.0] + _crossings(np.append(position, 0.0), np.append(delta, 0.0)) + [1.0]
        for low, high in zip(cuts[:-1], cuts[1:]):
            begin = position + low * delta
            end = position + delta if high == 1.0 else position + high * delta
            admissible = sorted(set(regions_of(begin)) & set(regions_of(end))) or regions_of((begin + end) / 2.0)
            label = _optimizer_best(admissible, column_values)
            steps.append(AnnotatedStep(step.alpha, (high - low) * step.duration, label, float(column_values[label])))
            waypoints.append(end)
        position = position + delta

    return AnnotatedPolicy(tuple(steps), np.array(waypoints))


def merge(policy: AnnotatedPolicy) -> AnnotatedPolicy:
    """Fuse consecutive steps with the same label into their duration-weighted average"""
    steps: List[AnnotatedStep] = []
    waypoints = [policy.waypoints[0]]
    for index, step in enumerate(policy.steps):
        if steps and steps[-1].label == step.label:
            previous = steps[-1]
            total = previous.duration + step.duration
            if total > 0:
                alpha = MixedStrategy((previous.alpha.probs * previous.duration + step.alpha.probs * step.duration) / total)
                utility = (previous.utility * previous.duration + step.utility * step.duration) / total
            else:
                alpha, utility = previous.alpha, previous.utility
            steps[-1] = AnnotatedStep(alpha, total, step.label, utility)
            waypoints[-1] = policy.waypoints[index + 1]
        else:
            steps.append(step)
            waypoints.append(policy.waypoints[index + 1])
    return AnnotatedPolicy(tuple(steps), np.array(waypoints))


def canonicalize(policy: Policy, game: Game) -> AnnotatedPolicy:
    return merge(subdivide(policy, game))


def evaluate(policy: Union[Policy, AnnotatedPolicy], game: Game) -> float:
    """Average optimizer utility per unit time of the policy started at the origin"""
    if isinstance(policy, AnnotatedPolicy):
        return policy.value()
    return subdivide(policy, game).value()


def certify_cycle(policy: Policy, start: StateLike, game: Game) -> CycleCertificate:
    """Check that policy run from start ends at lambda * start with lambda >= 1"""
    annotated = subdivide(policy, game, start)
    origin = annotated.waypoints[0]
    end = annotated.waypoints[-1]
    size = float(np.linalg.norm(origin))
    tolerance = CYCLE_TOLERANCE * max(1.0, size)

    if size <= tolerance:
        if np.linalg.norm(end) > tolerance:
            raise InvalidCycleError(f"Cycle from the origin must return to it, ended at {end.tolist()}")
        scale = 1.0
    else:
        scale = float(end @ origin) / size ** 2
        if np.linalg.norm(end - scale * origin) > tolerance:
            raise InvalidCycleError(f"Endpoint {end.tolist()} is not a multiple of the start {origin.tolist()}")
        if scale < 1.0 - CYCLE_TOLERANCE:
            raise InvalidCycleError(f"Cycle shrinks the state (lambda = {scale:.6g} < 1)")
    return CycleCertificate(annotated=annotated, scale=max(scale, 1.0), value=annotated.value())


def cycle_value(policy: Policy, start: StateLike, game: Game) -> float:
    return certify_cycle(policy, start, game).value


def _reference_offsets(num_regions: int) -> np.ndarray:
    """rows[j] maps x onto ext_j for the extended state (x, 0)"""
    offsets = np.zeros((num_regions, num_regions - 1))
    offsets[:num_regions - 1] = np.eye(num_regions - 1)
    return offsets


def _membership_rows(label: int, num_regions: int) -> np.ndarray:
    """G with G @ x >= 0 iff x lies in region label"""
    if num_regions == 1:
        return np.zeros((0, 0))
    ext = _reference_offsets(num_regions)
    rows = [ext[label] - ext[k] for k in range(num_regions) if k != label]
    return np.array(rows).reshape(-1, num_regions - 1)


def _sequence_lp(labels: Tuple[int, ...], moves: np.ndarray, values: np.ndarray,
                 scale: Optional[float]) -> LinearProgram:
    """Durations LP for fixed labels and strategies.

    scale None: path from the origin. scale 1: closed loop with a free start.
    scale > 1: the start is pinned to total displacement / (scale - 1).
    """
    steps, dims = moves.shape
    num_regions = dims + 1
    free_start = scale is not None and scale == 1.0
    num_vars = steps + (dims if free_start else 0)

    # positions[i] is the (dims x num_vars) map from variables to waypoint P_i
    base = np.zeros((dims, num_vars))
    if free_start:
        base[:, steps:] = np.eye(dims)
    elif scale is not None:
        base[:, :steps] = moves.T / (scale - 1.0)
    positions = [base]
    for index in range(steps):
        following = positions[-1].copy()
        following[:, index] += moves[index]
        positions.append(following)

    rows, bounds, senses = [], [], []
    for index, label in enumerate(labels):
        membership = _membership_rows(label, num_regions)
        for position in (positions[index], positions[index + 1]):
            block = membership @ position
            rows.extend(block)
            bounds.extend([0.0] * block.shape[0])
            senses.extend([ConstraintSense.GE] * block.shape[0])
    if free_start:
        closure = np.zeros((dims, num_vars))
        closure[:, :steps] = moves.T
        rows.extend(closure)
        bounds.extend([0.0] * dims)
        senses.extend([ConstraintSense.EQ] * dims)
    total = np.zeros(num_vars)
    total[:steps] = 1.0
    rows.append(total)
    bounds.append(1.0)
    senses.append(ConstraintSense.EQ)

    objective = np.zeros(num_vars)
    objective[:steps] = values
    return LinearProgram(
        objective=objective,
        constraint_matrix=np.array(rows).reshape(-1, num_vars),
        constraint_bounds=bounds,
        senses=senses,
        lower_bounds=[0.0] * steps + [None] * (num_vars - steps),
    )


def _search_sequence(task):
    """Best (key, payload) per certificate kind over every strategy tuple for one label sequence"""
    labels, moves_by_alpha, values_by_alpha, scales = task
    steps = len(labels)
    best = {}
    checked = 0
    for alpha_indices in itertools.product(range(len(moves_by_alpha)), repeat=steps):
        moves = moves_by_alpha[list(alpha_indices)]
        values = values_by_alpha[list(alpha_indices), list(labels)]
        for kind_rank, scale in _kinds(scales):
            checked += 1
            result = lp_solve(_sequence_lp(labels, moves, values, scale))
            if not result.is_optimal:
                continue
            key = (-round(result.objective_value, 9), kind_rank, labels, alpha_indices, scale or 0.0)
            if kind_rank not in best or key < best[kind_rank][0]:
                best[kind_rank] = (key, (labels, alpha_indices, scale, result.x, result.objective_value))
    return list(best.values()), checked


def _kinds(scales: Optional[Tuple[float, ...]]):
    yield 0, None
    if scales:
        for scale in scales:
            yield 1, scale


def _label_sequences(num_regions: int, max_steps: int) -> List[Tuple[int, ...]]:
    sequences = []
    for length in range(1, max_steps + 1):
        for labels in itertools.product(range(num_regions), repeat=length):
            if all(a != b for a, b in zip(labels, labels[1:])):
                sequences.append(labels)
    return sequences


def _candidate_strategies(game: Game, resolution: int) -> np.ndarray:
    grid = simplex_grid(game.num_optimizer_actions, resolution)
    commitment = stackelberg(game).commitment.probs
    if not np.any(np.all(np.isclose(grid, commitment, atol=1e-12), axis=1)):
        grid = np.vstack([grid, commitment])
    return grid


def search(game: Game, max_steps: int, grid_resolution: int, include_cycles: bool = False,
           workers: int = 1, scales: Sequence[float] = CYCLE_SCALES) -> SearchResult:
    """Lower-bound search over label sequences and gridded strategies with LP-optimized durations"""
    if max_steps < 1:
        raise ValueError(f"max_steps must be at least 1, got {max_steps}")
    if grid_resolution < 2:
        raise ValueError(f"grid_resolution must be at least 2, got {grid_resolution}")

    alphas = _candidate_strategies(game, grid_resolution)
    moves_by_alpha = alphas @ game.learner_payoffs
    moves_by_alpha = moves_by_alpha[:, :-1] - moves_by_alpha[:, -1:]
    values_by_alpha = alphas @ game.optimizer_payoffs
    sequences = _label_sequences(game.num_learner_actions, max_steps)
    cycle_scales = tuple(scales) if include_cycles else None
    tasks = [(labels, moves_by_alpha, values_by_alpha, cycle_scales) for labels in sequences]
    logger.info(f"🔍 Control search: {len(sequences)} label sequences x {len(alphas)} strategies, "
                f"cycles={'on' if include_cycles else 'off'}")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(_search_sequence, tasks))
    else:
        outcomes = [_search_sequence(task) for task in tasks]

    checked = sum(count for _, count in outcomes)
    candidates = sorted((item for found, _ in outcomes for item in found), key=lambda item: item[0])
    for _, payload in candidates:
        result = _build_result(game, alphas, payload, checked)
        if result is not None:
            logger.info(f"✅ Control search value {result.value:.6f} ({result.kind}, {len(result.policy)} steps)")
            return result

    logger.warning("⚠️ No label sequence admitted a feasible policy; falling back to single steps")
    return _best_single_step(game, alphas, checked)


def _build_result(game: Game, alphas: np.ndarray, payload, checked: int) -> Optional[SearchResult]:
    labels, alpha_indices, scale, x, objective = payload
    steps = len(labels)
    durations = np.clip(x[:steps], 0.0, None)
    moves = (alphas[list(alpha_indices)] @ game.learner_payoffs)
    moves = moves[:, :-1] - moves[:, -1:]
    if scale is None:
        start = np.zeros(game.num_learner_actions - 1)
    elif scale == 1.0:
        start = x[steps:]
    else:
        start = (durations @ moves) / (scale - 1.0)

    keep = [i for i in range(steps) if durations[i] > ZERO_DURATION]
    policy = Policy(tuple(PolicyStep(MixedStrategy(alphas[alpha_indices[i]]), float(durations[i])) for i in keep))
    waypoints = [start]
    for i in keep:
        waypoints.append(waypoints[-1] + durations[i] * moves[i])

    if scale is None:
        value = evaluate(policy, game)
        kind = 'path'
    else:
        try:
            value = cycle_value(policy, start, game)
        except InvalidCycleError as e:
            logger.debug(f"Discarding cycle candidate {labels}: {e}")
            return None
        kind = 'cycle'
    return SearchResult(
        value=value,
        kind=kind,
        policy=policy,
        waypoints=np.array(waypoints),
        labels=[labels[i] for i in keep],
        scale=scale,
        lp_objective=float(objective),
        candidates_checked=checked,
        learner_actions=game.learner_actions,
    )


def _best_single_step(game: Game, alphas: np.ndarray, checked: int) -> SearchResult:
    best_value, best_policy = -np.inf, None
    for alpha in alphas:
        policy = Policy((PolicyStep(MixedStrategy(alpha), 1.0),))
        value = evaluate(policy, game)
        if value > best_value:
            best_value, best_policy = value, policy
    annotated = subdivide(best_policy, game)
    return SearchResult(
        value=best_value,
        kind='path',
        policy=best_policy,
        waypoints=np.array([annotated.waypoints[0], annotated.waypoints[-1]]),
        labels=[annotated.steps[0].label],
        candidates_checked=checked,
        learner_actions=game.learner_actions,
    )
