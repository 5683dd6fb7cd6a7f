"""
JSON file IO for games, policies and search results
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from ..core.errors import GameFileError, LabError
from ..models.game_models import Game
from ..models.policy_models import Policy

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _read_json(path: PathLike) -> Dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise GameFileError(str(path), f"cannot read file: {e.strerror or e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise GameFileError(str(path), e.msg, line=e.lineno, column=e.colno)
    if not isinstance(data, dict):
        raise GameFileError(str(path), f"top-level JSON value must be an object, got {type(data).__name__}")
    return data


def load_game(path: PathLike) -> Game:
    """Parse a game file; the game takes the file stem as its name when none is given"""
    data = _read_json(path)
    try:
        game = Game.from_dict(data)
    except (LabError, ValueError, TypeError) as e:
        raise GameFileError(str(path), str(e))
    if not game.name:
        game = Game.from_dict({**data, 'name': Path(path).stem})
    logger.debug(f"Loaded game {game.name}: {game.num_optimizer_actions}x{game.num_learner_actions}")
    return game


def save_game(game: Game, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(game.to_dict(), indent=2) + "\n", encoding='utf-8')
    return path


def load_policy(path: PathLike) -> Policy:
    data = _read_json(path)
    try:
        return Policy.from_dict(data)
    except (LabError, ValueError, TypeError) as e:
        raise GameFileError(str(path), str(e))


def save_policy(policy: Policy, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(policy.to_dict(), indent=2) + "\n", encoding='utf-8')
    return path


def write_json(payload: Dict[str, Any], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding='utf-8')
    return path
