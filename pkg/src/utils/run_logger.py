"""
Run Logger - Dedicated logging for match runs, sweeps and control searches
"""
import logging
import json
from datetime import datetime
from typing import Any, Dict, Optional


class RunLogger:
    """Specialized logger writing block-formatted experiment records to their own file"""

    def __init__(self, name: str = 'lab_runs'):
        self.log_file: Optional[str] = None
        self.logger = logging.getLogger(name)
        self.logger.setLevel(logging.INFO)
        self.logger.propagate = False  # Don't propagate to root logger
        if not self.logger.handlers:
            self.logger.addHandler(logging.NullHandler())

    def configure(self, log_file: str = "runs.log"):
        """Attach the file handler; records are dropped until this is called"""
        for handler in self.logger.handlers[:]:
            self.logger.removeHandler(handler)
            handler.close()

        handler = logging.FileHandler(log_file, encoding='utf-8')
        handler.setLevel(logging.INFO)
        handler.setFormatter(logging.Formatter(
            '%(asctime)s - RUN - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        self.logger.addHandler(handler)
        self.log_file = log_file

    def log_match_start(self, game_name: str, learner: str, rounds: int, seed: int, mode: str):
        self.logger.info(f"=== MATCH RUN ===")
        self.logger.info(f"Game: {game_name or '<unnamed>'}")
        self.logger.info(f"Learner: {learner}")
        self.logger.info(f"Rounds: {rounds}  Seed: {seed}  Mode: {mode}")
        self.logger.info(f"Timestamp: {datetime.now().isoformat()}")
        self.logger.info(f"=" * 50)

    def log_match_result(self, summary: Dict[str, Any]):
        """Log the headline metrics of a finished match"""
        self.logger.info(f"--- MATCH RESULT ---")
        self.logger.info(json.dumps(summary, indent=2))
        self.logger.info(f"--- END MATCH RESULT ---")
        self.logger.info(f"")

    def log_sweep(self, total: int, failed: int):
        self.logger.info(f"=== SWEEP FINISHED: {total} runs, {failed} failed ===")
        self.logger.info(f"")

    def log_search_result(self, game_name: str, payload: Dict[str, Any]):
        self.logger.info(f"=== CONTROL SEARCH ({game_name or '<unnamed>'}) ===")
        self.logger.info(json.dumps(payload, indent=2))
        self.logger.info(f"=== END CONTROL SEARCH ===")
        self.logger.info(f"")

    def log_run_error(self, run_type: str, identifier: str, error: str):
        self.logger.error(f"=== RUN ERROR ===")
        self.logger.error(f"Type: {run_type}")
        self.logger.error(f"Identifier: {identifier}")
        self.logger.error(f"Error: {error}")
        self.logger.error(f"Timestamp: {datetime.now().isoformat()}")
        self.logger.error(f"=" * 30)
        self.logger.error(f"")


# Global run logger instance
run_logger = RunLogger()
