"""
Data models for experiment files and command results
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..core.errors import ConfigurationError
from .control_models import SearchResult
from .game_models import StackelbergSolution
from .learner_models import AuditReport, LearnerConfig
from .match_models import SamplingMode, SweepEntry

EXPERIMENT_FIELDS = {'name', 'game', 'policy', 'commitment', 'learner', 'rounds', 'seeds', 'mode', 'export_traces'}


@dataclass
class ExperimentConfig:
    """A simulate run: one game, one optimizer plan, one learner, several seeds"""
    name: str
    game_path: Path
    learner: LearnerConfig
    rounds: int
    seeds: List[int]
    policy_path: Optional[Path] = None
    delta: Optional[float] = None
    mode: SamplingMode = SamplingMode.EXPECTED
    export_traces: bool = False

    def is_valid(self) -> bool:
        try:
            self.validate()
        except ConfigurationError:
            return False
        return True

    def validate(self):
        if not self.game_path.is_file():
            raise ConfigurationError(f"Game file not found: {self.game_path}")
        if (self.policy_path is None) == (self.delta is None):
            raise ConfigurationError("Experiment needs exactly one of 'policy' or 'commitment'")
        if self.policy_path is not None and not self.policy_path.is_file():
            raise ConfigurationError(f"Policy file not found: {self.policy_path}")
        if self.delta is not None and not 0.0 < self.delta < 1.0:
            raise ConfigurationError(f"commitment delta must lie in (0, 1), got {self.delta}")
        if self.rounds < 1:
            raise ConfigurationError(f"rounds must be at least 1, got {self.rounds}")
        if not self.seeds:
            raise ConfigurationError("seeds must be a non-empty list")

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Path) -> 'ExperimentConfig':
        unknown = set(data) - EXPERIMENT_FIELDS
        if unknown:
            raise ConfigurationError(f"Unknown experiment fields: {', '.join(sorted(unknown))}")
        for key in ('game', 'learner', 'rounds', 'seeds'):
            if key not in data:
                raise ConfigurationError(f"Experiment is missing '{key}'")
        if not isinstance(data['seeds'], list) or not all(isinstance(s, int) for s in data['seeds']):
            raise ConfigurationError("seeds must be a list of integers")

        commitment = data.get('commitment')
        if commitment is not None and (not isinstance(commitment, dict) or 'delta' not in commitment):
            raise ConfigurationError("commitment must be an object with a 'delta' field")
        try:
            mode = SamplingMode(data.get('mode', SamplingMode.EXPECTED.value))
        except ValueError:
            raise ConfigurationError(f"Unknown mode: {data.get('mode')}")

        config = cls(
            name=str(data.get('name', 'experiment')),
            game_path=(base_dir / data['game']).resolve(),
            learner=LearnerConfig.from_dict(data['learner']),
            rounds=int(data['rounds']),
            seeds=list(data['seeds']),
            policy_path=(base_dir / data['policy']).resolve() if data.get('policy') else None,
            delta=float(commitment['delta']) if commitment is not None else None,
            mode=mode,
            export_traces=bool(data.get('export_traces', False)),
        )
        config.validate()
        return config

    @classmethod
    def from_file(cls, path: Path) -> 'ExperimentConfig':
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except OSError as e:
            raise ConfigurationError(f"Cannot read experiment file {path}: {e}")
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: experiment must be a JSON object")
        return cls.from_dict(data, path.parent)


@dataclass
class StackelbergReport:
    """Result of the stackelberg command"""
    success: bool
    game_name: str
    solution: Optional[StackelbergSolution] = None
    response_name: str = ''
    dominated_actions: List[str] = field(default_factory=list)
    oracle_value: Optional[float] = None
    verified: Optional[bool] = None
    output_path: Optional[str] = None
    error_message: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {'game': self.game_name, 'success': self.success}
        if self.solution is not None:
            data.update({
                'value': self.solution.value,
                'commitment': self.solution.commitment.probs.tolist(),
                'response': self.response_name,
                'dominated_actions': self.dominated_actions,
            })
        if self.oracle_value is not None:
            data['oracle_value'] = self.oracle_value
            data['verified'] = self.verified
        if self.error_message:
            data['error'] = self.error_message
        return data


@dataclass
class SimulationReport:
    success: bool
    experiment_name: str
    entries: List[SweepEntry] = field(default_factory=list)
    stackelberg_value: Optional[float] = None
    output_files: List[str] = field(default_factory=list)
    error_message: Optional[str] = None


@dataclass
class AuditResult:
    success: bool
    trace_path: str
    report: Optional[AuditReport] = None
    output_path: Optional[str] = None
    error_message: Optional[str] = None


@dataclass
class SearchReport:
    success: bool
    game_name: str
    result: Optional[SearchResult] = None
    stackelberg_value: Optional[float] = None
    output_path: Optional[str] = None
    error_message: Optional[str] = None
