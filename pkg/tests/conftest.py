"""
Shared fixtures for the learner lab test suite
"""
import sys
from pathlib import Path

import pytest

# Add the repository root so `src` imports resolve like they do for main.py
ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from src.core.game_core import matching_pennies, table1_game, two_action_learner_game  # noqa: E402

GAMES_DIR = ROOT / 'games'
POLICIES_DIR = ROOT / 'policies'
EXPERIMENTS_DIR = ROOT / 'experiments'


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long-horizon simulations (deselect with -m "not slow")')


@pytest.fixture
def table1():
    return table1_game(0.05)


@pytest.fixture
def table1_eps0():
    return table1_game(0.0)


@pytest.fixture
def pennies():
    return matching_pennies()


@pytest.fixture
def two_action():
    return two_action_learner_game()


@pytest.fixture
def games_dir():
    return GAMES_DIR


@pytest.fixture
def policies_dir():
    return POLICIES_DIR


@pytest.fixture
def experiments_dir():
    return EXPERIMENTS_DIR


LAB_VARIABLES = ('LAB_OUTPUT_DIR', 'LAB_SEED', 'LAB_WORKERS', 'LAB_LOG_FILE', 'LAB_RUN_LOG_FILE',
                 'LAB_LP_MAX_ITERATIONS')


@pytest.fixture
def clean_env(monkeypatch):
    """Unset every LAB_* variable and restore the environment afterwards, including values load_dotenv adds"""
    for name in LAB_VARIABLES:
        monkeypatch.setenv(name, '')
        monkeypatch.delenv(name)
    return monkeypatch
