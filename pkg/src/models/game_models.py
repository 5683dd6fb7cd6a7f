"""
Data models for bimatrix games, mixed strategies and linear programs
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import DimensionMismatchError, InvalidGameError, InvalidStrategyError, LPSolveError

PROBABILITY_TOLERANCE = 1e-9


def _frozen_array(values: Any, ndim: int, name: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise InvalidGameError(f"{name} must be a {ndim}-dimensional array, got shape {array.shape}")
    array.setflags(write=False)
    return array


class PlayerRole(str, Enum):
    """Which side of the game a utility is computed for"""
    OPTIMIZER = 'optimizer'
    LEARNER = 'learner'


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """Probability vector over one player's actions"""
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if probs.size == 0:
            raise InvalidStrategyError("Mixed strategy needs at least one action")
        if not np.all(np.isfinite(probs)):
            raise InvalidStrategyError(f"Mixed strategy has non-finite entries: {probs}")
        if np.any(probs < -PROBABILITY_TOLERANCE):
            raise InvalidStrategyError(f"Mixed strategy has negative entries: {probs}")
        if abs(probs.sum() - 1.0) > PROBABILITY_TOLERANCE:
            raise InvalidStrategyError(f"Mixed strategy sums to {probs.sum()}, expected 1")
        probs = np.clip(probs, 0.0, None)
        probs.setflags(write=False)
        object.__setattr__(self, 'probs', probs)

    @classmethod
    def pure(cls, index: int, size: int) -> 'MixedStrategy':
        if not 0 <= index < size:
            raise DimensionMismatchError(f"Action index {index} outside [0, {size})")
        probs = np.zeros(size)
        probs[index] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls, size: int) -> 'MixedStrategy':
        return cls(np.full(size, 1.0 / size))

    @property
    def size(self) -> int:
        return int(self.probs.size)

    def mix(self, other: 'MixedStrategy', weight: float) -> 'MixedStrategy':
        """(1 - weight) * self + weight * other"""
        if other.size != self.size:
            raise DimensionMismatchError(f"Cannot mix strategies of sizes {self.size} and {other.size}")
        return MixedStrategy((1.0 - weight) * self.probs + weight * other.probs)

    def support(self) -> List[int]:
        return [i for i, p in enumerate(self.probs) if p > PROBABILITY_TOLERANCE]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixedStrategy):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def __repr__(self) -> str:
        return f"MixedStrategy({np.round(self.probs, 6).tolist()})"


StrategyLike = Union[MixedStrategy, Sequence[float], np.ndarray]


def as_probs(strategy: StrategyLike, size: int) -> np.ndarray:
    """Validated probability vector of the given length"""
    if not isinstance(strategy, MixedStrategy):
        strategy = MixedStrategy(np.asarray(strategy, dtype=float))
    if strategy.size != size:
        raise DimensionMismatchError(f"Strategy has {strategy.size} entries, expected {size}")
    return strategy.probs


@dataclass(frozen=True, eq=False)
class Game:
    """Two-player bimatrix game; rows are optimizer actions, columns learner actions"""
    optimizer_payoffs: np.ndarray
    learner_payoffs: np.ndarray
    optimizer_actions: Tuple[str, ...]
    learner_actions: Tuple[str, ...]
    scale: float
    name: str = ''

    def __post_init__(self):
        optimizer_payoffs = _frozen_array(self.optimizer_payoffs, 2, 'optimizer_payoffs')
        learner_payoffs = _frozen_array(self.learner_payoffs, 2, 'learner_payoffs')
        object.__setattr__(self, 'optimizer_payoffs', optimizer_payoffs)
        object.__setattr__(self, 'learner_payoffs', learner_payoffs)
        object.__setattr__(self, 'optimizer_actions', tuple(self.optimizer_actions))
        object.__setattr__(self, 'learner_actions', tuple(self.learner_actions))
        object.__setattr__(self, 'scale', float(self.scale))

        rows, cols = optimizer_payoffs.shape
        if rows < 1 or cols < 1:
            raise InvalidGameError("Game needs at least one action per player")
        if learner_payoffs.shape != (rows, cols):
            raise InvalidGameError(
                f"Payoff shapes differ: optimizer {optimizer_payoffs.shape}, learner {learner_payoffs.shape}"
            )
        if len(self.optimizer_actions) != rows or len(self.learner_actions) != cols:
            raise InvalidGameError(
                f"Expected {rows} optimizer and {cols} learner action names, got "
                f"{len(self.optimizer_actions)} and {len(self.learner_actions)}"
            )
        for role, names in (('optimizer', self.optimizer_actions), ('learner', self.learner_actions)):
            if len(set(names)) != len(names):
                raise InvalidGameError(f"Duplicate {role} action names: {list(names)}")
        if not self.scale > 0 or not np.isfinite(self.scale):
            raise InvalidGameError(f"Scale must be a positive finite number, got {self.scale}")
        for label, matrix in (('optimizer', optimizer_payoffs), ('learner', learner_payoffs)):
            if not np.all(np.isfinite(matrix)):
                raise InvalidGameError(f"{label} payoffs contain non-finite entries")
            worst = float(np.max(np.abs(matrix)))
            if worst > self.scale:
                raise InvalidGameError(f"{label} payoff {worst} exceeds declared scale {self.scale}")

    @property
    def num_optimizer_actions(self) -> int:
        return int(self.optimizer_payoffs.shape[0])

    @property
    def num_learner_actions(self) -> int:
        return int(self.optimizer_payoffs.shape[1])

    def scaled(self, factor: float) -> 'Game':
        """Both payoff matrices (and the scale bound) multiplied by factor > 0"""
        return Game(
            optimizer_payoffs=self.optimizer_payoffs * factor,
            learner_payoffs=self.learner_payoffs * factor,
            optimizer_actions=self.optimizer_actions,
            learner_actions=self.learner_actions,
            scale=self.scale * factor,
            name=self.name,
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'optimizer_actions': list(self.optimizer_actions),
            'learner_actions': list(self.learner_actions),
            'optimizer_payoffs': self.optimizer_payoffs.tolist(),
            'learner_payoffs': self.learner_payoffs.tolist(),
            'scale': self.scale,
        }
        if self.name:
            data['name'] = self.name
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Game':
        missing = [key for key in ('optimizer_actions', 'learner_actions', 'optimizer_payoffs',
                                   'learner_payoffs', 'scale') if key not in data]
        if missing:
            raise InvalidGameError(f"Game description missing fields: {', '.join(missing)}")
        return cls(
            optimizer_payoffs=data['optimizer_payoffs'],
            learner_payoffs=data['learner_payoffs'],
            optimizer_actions=tuple(data['optimizer_actions']),
            learner_actions=tuple(data['learner_actions']),
            scale=data['scale'],
            name=data.get('name', ''),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Game):
            return NotImplemented
        return (
            np.array_equal(self.optimizer_payoffs, other.optimizer_payoffs)
            and np.array_equal(self.learner_payoffs, other.learner_payoffs)
            and self.optimizer_actions == other.optimizer_actions
            and self.learner_actions == other.learner_actions
            and self.scale == other.scale
        )

    def __hash__(self) -> int:
        return hash((self.optimizer_payoffs.tobytes(), self.learner_payoffs.tobytes(),
                     self.optimizer_actions, self.learner_actions, self.scale))


@dataclass(frozen=True)
class StackelbergSolution:
    """Optimal commitment, the learner's (optimistic) best response, and the value V"""
    commitment: MixedStrategy
    response: int
    value: float


@dataclass(frozen=True)
class Commitment:
    """Perturbed commitment that makes target_response the unique best response"""
    strategy: MixedStrategy
    target_response: int
    margin: float
    delta: float
    perturbation: Optional[MixedStrategy] = None


class ConstraintSense(str, Enum):
    LE = '<='
    GE = '>='
    EQ = '='


class LPStatus(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'
    ITERATION_LIMIT = 'iteration_limit'


@dataclass
class LinearProgram:
    """Dense LP: optimize objective @ x subject to rows of constraint_matrix and variable bounds.

    Lower bounds default to 0 and upper bounds to +inf; use -inf / None for free variables.
    """
    objective: np.ndarray
    constraint_matrix: np.ndarray
    constraint_bounds: np.ndarray
    senses: List[ConstraintSense]
    lower_bounds: Optional[np.ndarray] = None
    upper_bounds: Optional[np.ndarray] = None
    maximize: bool = True

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        num_vars = self.objective.size
        self.constraint_matrix = np.asarray(self.constraint_matrix, dtype=float).reshape(-1, num_vars)
        self.constraint_bounds = np.asarray(self.constraint_bounds, dtype=float).reshape(-1)
        self.senses = [ConstraintSense(sense) for sense in self.senses]
        rows = self.constraint_matrix.shape[0]
        if self.constraint_bounds.size != rows or len(self.senses) != rows:
            raise DimensionMismatchError(
                f"LP has {rows} constraint rows, {self.constraint_bounds.size} bounds and {len(self.senses)} senses"
            )
        self.lower_bounds = (np.zeros(num_vars) if self.lower_bounds is None
                             else np.array([-np.inf if v is None else v for v in self.lower_bounds], dtype=float))
        self.upper_bounds = (np.full(num_vars, np.inf) if self.upper_bounds is None
                             else np.array([np.inf if v is None else v for v in self.upper_bounds], dtype=float))
        if self.lower_bounds.size != num_vars or self.upper_bounds.size != num_vars:
            raise DimensionMismatchError("Variable bounds do not match the number of variables")

    @property
    def num_variables(self) -> int:
        return int(self.objective.size)


@dataclass
class LPResult:
    """Outcome of an LP solve"""
    status: LPStatus
    x: Optional[np.ndarray] = None
    objective_value: Optional[float] = None
    iterations: int = 0
    message: str = ''

    @property
    def is_optimal(self) -> bool:
        return self.status == LPStatus.OPTIMAL

    def require_optimal(self) -> 'LPResult':
        if not self.is_optimal:
            raise LPSolveError(f"LP not solved to optimality: {self.status.value} {self.message}".strip())
        return self


@dataclass(frozen=True)
class DominanceCertificate:
    """Result of the weak-dominance feasibility check for one learner action"""
    action: int
    dominated: bool
    dominating_mix: Optional[np.ndarray] = field(default=None)
