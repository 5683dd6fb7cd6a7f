"""
Configuration management for the learner lab
"""
import os
import logging
from dataclasses import dataclass
from typing import Optional
from dotenv import load_dotenv

from .errors import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass
class Config:
    """Runtime settings shared by the CLI commands"""
    output_dir: str = 'results'
    seed: int = 0
    workers: int = 1
    log_file: str = 'engine.log'
    run_log_file: str = 'runs.log'
    lp_max_iterations: int = 10_000

    def with_overrides(self, seed: Optional[int] = None, output_dir: Optional[str] = None,
                       workers: Optional[int] = None) -> 'Config':
        """Copy with command-line values applied on top of the environment"""
        return Config(
            output_dir=output_dir if output_dir is not None else self.output_dir,
            seed=seed if seed is not None else self.seed,
            workers=_positive(workers, 'workers') if workers is not None else self.workers,
            log_file=self.log_file,
            run_log_file=self.run_log_file,
            lp_max_iterations=self.lp_max_iterations,
        )


def _positive(value: int, name: str) -> int:
    if value < 1:
        raise ConfigurationError(f"{name} must be at least 1, got {value}")
    return value


def _int_from_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got '{raw}'")


class ConfigLoader:
    """Load configuration from environment variables"""

    @staticmethod
    def load_from_env(config_file: str = '.env') -> Config:
        """Load configuration from environment variables, reading config_file first if present"""
        load_dotenv(config_file)

        config = Config(
            output_dir=os.getenv('LAB_OUTPUT_DIR') or 'results',
            seed=_int_from_env('LAB_SEED', 0),
            workers=_positive(_int_from_env('LAB_WORKERS', 1), 'LAB_WORKERS'),
            log_file=os.getenv('LAB_LOG_FILE') or 'engine.log',
            run_log_file=os.getenv('LAB_RUN_LOG_FILE') or 'runs.log',
            lp_max_iterations=_positive(_int_from_env('LAB_LP_MAX_ITERATIONS', 10_000), 'LAB_LP_MAX_ITERATIONS'),
        )
        if config.seed < 0:
            raise ConfigurationError(f"LAB_SEED must be non-negative, got {config.seed}")
        logger.info(f"Configuration loaded: output={config.output_dir}, seed={config.seed}, workers={config.workers}")
        return config
