"""
Experiment service that orchestrates the CLI commands: Stackelberg solves,
simulation sweeps, trace audits, control searches and random game generation
"""
import logging
from datetime import datetime
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from .config import Config
from .control import search
from .errors import LabError
from .game_core import brute_force_stackelberg, is_weakly_dominated, random_game, stackelberg
from .lp_solver import configure_solver
from .optimizers import build_schedule
from .regret_audit import mean_based_audit
from .simulation import sweep
from ..models.experiment_models import (
    AuditResult,
    ExperimentConfig,
    SearchReport,
    SimulationReport,
    StackelbergReport,
)
from ..models.match_models import MatchConfig
from ..utils.game_io import load_game, load_policy, save_game, write_json
from ..utils.run_logger import run_logger
from ..utils.trace_io import export_sweep_csv, export_trace_csv, load_trace_csv

logger = logging.getLogger(__name__)

VERIFY_TOLERANCE = 1e-2


class ExperimentService:
    """Runs one command at a time and writes its outputs under config.output_dir"""

    def __init__(self, config: Config, output_format: str = 'json'):
        if output_format not in ('json', 'csv'):
            raise ValueError(f"Unknown output format: {output_format}")
        self.config = config
        self.output_format = output_format
        self.output_dir = Path(config.output_dir)
        configure_solver(config.lp_max_iterations)

    def _output_path(self, stem: str, suffix: Optional[str] = None) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / f"{stem}.{suffix or self.output_format}"

    def _write_record(self, record: dict, stem: str) -> Path:
        if self.output_format == 'json':
            return write_json(record, self._output_path(stem))
        path = self._output_path(stem)
        pd.DataFrame([{k: (str(v) if isinstance(v, (list, dict)) else v) for k, v in record.items()}]).to_csv(
            path, index=False
        )
        return path

    def solve_stackelberg(self, game_path: str, verify: bool = False, resolution: int = 200) -> StackelbergReport:
        """Stackelberg commitment of a game file, with optional grid-oracle verification"""
        logger.info(f"🔍 Solving Stackelberg commitment for {game_path}")
        try:
            game = load_game(game_path)
            solution = stackelberg(game)
            dominated = [game.learner_actions[j] for j in range(game.num_learner_actions)
                         if is_weakly_dominated(game, j).dominated]
            for name in dominated:
                logger.warning(f"⚠️ Learner action {name} is weakly dominated")

            report = StackelbergReport(
                success=True,
                game_name=game.name,
                solution=solution,
                response_name=game.learner_actions[solution.response],
                dominated_actions=dominated,
            )
            if verify:
                oracle_value, _, _ = brute_force_stackelberg(game, resolution)
                report.oracle_value = oracle_value
                report.verified = abs(oracle_value - solution.value) <= VERIFY_TOLERANCE
                if not report.verified:
                    logger.warning(f"⚠️ Grid oracle value {oracle_value:.6f} differs from LP value {solution.value:.6f}")
            report.output_path = str(self._write_record(report.to_dict(), f"stackelberg_{game.name}"))
            logger.info(f"✅ Stackelberg value {solution.value:.6f} with response {report.response_name}")
            return report
        except (LabError, ValueError) as e:
            logger.error(f"❌ Stackelberg solve failed: {e}")
            return StackelbergReport(success=False, game_name=Path(game_path).stem, error_message=str(e))

    def run_experiment(self, experiment_path: str, seed: Optional[int] = None,
                       workers: Optional[int] = None) -> SimulationReport:
        """All seeds of an experiment file; seed overrides the file's seed list with a single seed"""
        logger.info(f"🚀 Running experiment {experiment_path}")
        try:
            experiment = ExperimentConfig.from_file(Path(experiment_path))
            game = load_game(experiment.game_path)
            policy = load_policy(experiment.policy_path) if experiment.policy_path else None
            schedule = build_schedule(game, experiment.rounds, policy=policy, delta=experiment.delta)
            seeds = [seed] if seed is not None else experiment.seeds
            configs = [
                MatchConfig(
                    game=game,
                    learner=experiment.learner,
                    rounds=experiment.rounds,
                    schedule=schedule,
                    seed=s,
                    mode=experiment.mode,
                    config_id=experiment.name,
                )
                for s in seeds
            ]
        except (LabError, ValueError) as e:
            logger.error(f"❌ Experiment setup failed: {e}")
            return SimulationReport(success=False, experiment_name=Path(experiment_path).stem, error_message=str(e))

        entries = sweep(configs, workers=workers or self.config.workers)
        report = SimulationReport(
            success=all(entry.success for entry in entries),
            experiment_name=experiment.name,
            entries=entries,
        )
        try:
            report.stackelberg_value = stackelberg(game).value
        except LabError as e:
            logger.warning(f"⚠️ Could not compute the Stackelberg benchmark: {e}")

        report.output_files.append(str(export_sweep_csv(entries, self._output_path(f"{experiment.name}_sweep", 'csv'))))
        if experiment.export_traces:
            for entry in entries:
                if entry.success:
                    path = self._output_path(f"{experiment.name}_trace_seed{entry.seed}", 'csv')
                    report.output_files.append(str(export_trace_csv(entry.result, path)))
        if self.output_format == 'json':
            summary = {
                'experiment': experiment.name,
                'stackelberg_value': report.stackelberg_value,
                'runs': [entry.result.summary() if entry.success else {'seed': entry.seed, 'error': entry.error_message}
                         for entry in entries],
            }
            report.output_files.append(str(write_json(summary, self._output_path(f"{experiment.name}_summary"))))
        if not report.success:
            failures = [entry.error_message for entry in entries if not entry.success]
            report.error_message = f"{len(failures)} run(s) failed: {failures[0]}"
        return report

    def audit_trace(self, trace_path: str, gamma: float) -> AuditResult:
        logger.info(f"🔍 Auditing trace {trace_path} at gamma={gamma}")
        try:
            trace, distributions = load_trace_csv(trace_path)
            report = mean_based_audit(trace, distributions, gamma)
        except (LabError, ValueError) as e:
            logger.error(f"❌ Audit failed: {e}")
            return AuditResult(success=False, trace_path=trace_path, error_message=str(e))

        stem = f"audit_{Path(trace_path).stem}"
        if self.output_format == 'json':
            payload = {
                'trace': trace_path,
                'gamma': gamma,
                'violations': [vars(v) for v in report.violations],
                'regret': report.regret,
                'swap_regret': report.swap_regret,
                'swap_function': list(report.swap_function.mapping),
            }
            output = write_json(payload, self._output_path(stem))
        else:
            output = self._output_path(stem)
            pd.DataFrame([vars(v) for v in report.violations],
                         columns=['round', 'arm', 'probability', 'deficit']).to_csv(output, index=False)
        return AuditResult(success=True, trace_path=trace_path, report=report, output_path=str(output))

    def control_search(self, game_path: str, max_steps: int, resolution: int, include_cycles: bool = False,
                       workers: Optional[int] = None) -> SearchReport:
        logger.info(f"🔍 Control search on {game_path}: max_steps={max_steps}, resolution={resolution}")
        try:
            game = load_game(game_path)
            result = search(game, max_steps, resolution, include_cycles=include_cycles,
                            workers=workers or self.config.workers)
            stackelberg_value = stackelberg(game).value
        except (LabError, ValueError) as e:
            logger.error(f"❌ Control search failed: {e}")
            return SearchReport(success=False, game_name=Path(game_path).stem, error_message=str(e))

        payload = result.to_dict()
        run_logger.log_search_result(game.name, payload)
        output = write_json(payload, self._output_path(f"control_{game.name}", 'json'))
        return SearchReport(success=True, game_name=game.name, result=result,
                            stackelberg_value=stackelberg_value, output_path=str(output))

    def generate_random(self, rows: int, cols: int, seed: Optional[int] = None) -> Path:
        seed = self.config.seed if seed is None else seed
        game = random_game(rows, cols, seed)
        path = save_game(game, self._output_path(game.name, 'json'))
        logger.info(f"✅ Random game written to {path}")
        return path

    def print_stackelberg(self, report: StackelbergReport):
        print("\n" + "=" * 80)
        print("STACKELBERG COMMITMENT")
        print("=" * 80)
        print(f"Game: {report.game_name}")
        if not report.success:
            print(f"  [FAILED] {report.error_message}")
            print("=" * 80)
            return
        solution = report.solution
        print(f"Value: {solution.value:.6f}")
        print(f"Commitment: {np.round(solution.commitment.probs, 6).tolist()}")
        print(f"Response: {report.response_name}")
        print(f"Weakly dominated learner actions: {', '.join(report.dominated_actions) or 'none'}")
        if report.oracle_value is not None:
            status = "[OK]" if report.verified else "[MISMATCH]"
            print(f"Grid oracle: {report.oracle_value:.6f} {status}")
        print(f"Output: {report.output_path}")
        print("=" * 80)

    def print_simulation(self, report: SimulationReport):
        """Average utility against the Stackelberg benchmark plus regret figures per seed"""
        print("\n" + "=" * 80)
        print("SIMULATION - RUN SUMMARY")
        print("=" * 80)
        print(f"Timestamp: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
        print(f"Experiment: {report.experiment_name}")
        if report.stackelberg_value is not None:
            print(f"Stackelberg value V: {report.stackelberg_value:.6f}")
        successful = [entry for entry in report.entries if entry.success]
        failed = [entry for entry in report.entries if not entry.success]
        print(f"Runs: {len(report.entries)}  Succeeded: {len(successful)}  Failed: {len(failed)}")
        print("-" * 80)
        for entry in successful:
            result = entry.result
            print(f"  [SUCCESS] seed {entry.seed}")
            print(f"     Optimizer average: {result.optimizer_average:.6f}")
            print(f"     Regret: {result.regret:.3f}  Swap regret: {result.swap_regret:.3f}")
            print(f"     Learner action frequencies: {np.round(result.action_frequencies(), 4).tolist()}")
        for entry in failed:
            print(f"  [FAILED] seed {entry.seed}: {entry.error_message}")
        if successful:
            averages = [entry.result.optimizer_average for entry in successful]
            print("-" * 80)
            print(f"Mean optimizer average: {np.mean(averages):.6f} (min {np.min(averages):.6f})")
        if report.error_message and not report.entries:
            print(f"  [FAILED] {report.error_message}")
        for path in report.output_files:
            print(f"Output: {path}")
        print("=" * 80)

    def print_audit(self, result: AuditResult):
        print("\n" + "=" * 80)
        print("MEAN-BASED AUDIT")
        print("=" * 80)
        print(f"Trace: {result.trace_path}")
        if not result.success:
            print(f"  [FAILED] {result.error_message}")
        else:
            print(result.report.summary())
            for violation in result.report.violations[:20]:
                print(f"  round {violation.round + 1}: arm {violation.arm + 1} p={violation.probability:.4f} "
                      f"deficit={violation.deficit:.3f}")
            if len(result.report.violations) > 20:
                print(f"  ... {len(result.report.violations) - 20} more")
            print(f"Output: {result.output_path}")
        print("=" * 80)

    def print_search(self, report: SearchReport):
        print("\n" + "=" * 80)
        print("CONTROL SEARCH")
        print("=" * 80)
        print(f"Game: {report.game_name}")
        if not report.success:
            print(f"  [FAILED] {report.error_message}")
        else:
            result = report.result
            print(f"Value (lower bound): {result.value:.6f} [{result.kind}]")
            print(f"Stackelberg value V: {report.stackelberg_value:.6f}")
            for step, label in zip(result.policy, result.labels):
                print(f"  alpha={np.round(step.alpha.probs, 4).tolist()} t={step.duration:.6f} "
                      f"region={result.learner_actions[label]}")
            print(f"LP problems solved: {result.candidates_checked}")
            print(f"Output: {report.output_path}")
        print("=" * 80)
