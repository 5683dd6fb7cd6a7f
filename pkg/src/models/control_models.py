"""
Data models for the control-problem view of optimizer play
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import DimensionMismatchError
from .game_models import MixedStrategy
from .policy_models import Policy, PolicyStep

REGION_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class ControlState:
    """Learner state reduced to x_i = u_i - u_N for the first N-1 actions"""
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        if not np.all(np.isfinite(x)):
            raise DimensionMismatchError(f"Control state has non-finite entries: {x}")
        x.setflags(write=False)
        object.__setattr__(self, 'x', x)

    @classmethod
    def origin(cls, num_learner_actions: int) -> 'ControlState':
        return cls(np.zeros(num_learner_actions - 1))

    @property
    def num_regions(self) -> int:
        return int(self.x.size) + 1

    def extended(self) -> np.ndarray:
        """(x_1, ..., x_{N-1}, 0): the cumulative utilities up to a common shift"""
        return np.append(self.x, 0.0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ControlState):
            return NotImplemented
        return np.array_equal(self.x, other.x)

    def __hash__(self) -> int:
        return hash(self.x.tobytes())


@dataclass(frozen=True)
class Region:
    """Cone S_j where learner action j (0-based) has maximal cumulative utility; j = N-1 is the reference action"""
    index: int
    num_regions: int

    def __post_init__(self):
        if not 0 <= self.index < self.num_regions:
            raise DimensionMismatchError(f"Region {self.index} outside [0, {self.num_regions})")

    def contains(self, state: ControlState, tolerance: float = REGION_TOLERANCE) -> bool:
        if state.num_regions != self.num_regions:
            raise DimensionMismatchError(f"State has {state.num_regions} regions, expected {self.num_regions}")
        ext = state.extended()
        top = ext.max()
        return bool(ext[self.index] >= top - tolerance * max(1.0, float(np.abs(ext).max())))


@dataclass(frozen=True)
class AnnotatedStep:
    alpha: MixedStrategy
    duration: float
    label: int
    utility: float  # u_O(alpha, b_label)


@dataclass(frozen=True, eq=False)
class AnnotatedPolicy:
    """Policy whose steps carry region labels, plus the waypoints P_0 ... P_k they connect"""
    steps: Tuple[AnnotatedStep, ...]
    waypoints: np.ndarray

    def __post_init__(self):
        steps = tuple(self.steps)
        waypoints = np.array(self.waypoints, dtype=float)
        if waypoints.ndim != 2 or waypoints.shape[0] != len(steps) + 1:
            raise DimensionMismatchError(
                f"{len(steps)} steps need {len(steps) + 1} waypoints, got array of shape {waypoints.shape}"
            )
        waypoints.setflags(write=False)
        object.__setattr__(self, 'steps', steps)
        object.__setattr__(self, 'waypoints', waypoints)

    @property
    def labels(self) -> List[int]:
        return [step.label for step in self.steps]

    @property
    def total_duration(self) -> float:
        return float(sum(step.duration for step in self.steps))

    @property
    def start(self) -> ControlState:
        return ControlState(self.waypoints[0])

    @property
    def end(self) -> ControlState:
        return ControlState(self.waypoints[-1])

    def value(self) -> float:
        """Duration-weighted average optimizer utility"""
        total = self.total_duration
        if total <= 0:
            return 0.0
        return float(sum(step.duration * step.utility for step in self.steps) / total)

    def to_policy(self) -> Policy:
        return Policy(tuple(PolicyStep(step.alpha, step.duration) for step in self.steps))


@dataclass(frozen=True)
class CycleCertificate:
    """A path from P to lambda * P (lambda >= 1) whose value lower-bounds the control value"""
    annotated: AnnotatedPolicy
    scale: float
    value: float


@dataclass
class SearchResult:
    """Best policy found by the control search; value is a lower bound, not an optimality claim"""
    value: float
    kind: str
    policy: Policy
    waypoints: np.ndarray
    labels: List[int]
    scale: Optional[float] = None
    lp_objective: Optional[float] = None
    candidates_checked: int = 0
    learner_actions: Sequence[str] = field(default_factory=tuple)

    def to_dict(self) -> Dict[str, Any]:
        labels: List[Any] = list(self.labels)
        if self.learner_actions:
            labels = [self.learner_actions[j] for j in self.labels]
        data: Dict[str, Any] = {
            'value': self.value,
            'kind': self.kind,
            'policy': self.policy.to_dict(),
            'waypoints': np.asarray(self.waypoints).tolist(),
            'labels': labels,
        }
        if self.scale is not None:
            data['lambda'] = self.scale
        return data
