#!/usr/bin/env python3
"""
Learner Lab - Main Entry Point

Repeated-game engine for optimizers playing against no-regret learners:
1. Computes Stackelberg commitments of bimatrix games
2. Simulates optimizer schedules against learning algorithms
3. Audits learner traces for regret, swap regret and mean-based behaviour
4. Searches piecewise-constant control policies against mean-based learners

Usage:
    python main.py [--config .env] [--seed N] [--out-dir DIR] [--format json|csv] COMMAND ...
"""

import argparse
import logging
import sys

from src.core.config import ConfigLoader
from src.core.experiment_service import ExperimentService
from src.utils.run_logger import run_logger


class EmojiFilter(logging.Filter):
    """Filter to replace emoji characters with text for console output"""
    def filter(self, record):
        if hasattr(record, 'msg') and isinstance(record.msg, str):
            emoji_replacements = {
                '🚀': '[START]',
                '📋': '[PLAN]',
                '✅': '[OK]',
                '🔍': '[ANALYZE]',
                '📊': '[SUMMARY]',
                '❌': '[ERROR]',
                '⚠️': '[WARNING]'
            }
            msg = record.msg
            for emoji, text in emoji_replacements.items():
                msg = msg.replace(emoji, text)
            record.msg = msg
        return True


def setup_logging(log_file: str, verbose: bool = False):
    """Configure file and console logging; the file handler keeps the emoji markers"""
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.addFilter(EmojiFilter())

    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file, encoding='utf-8'),
            console_handler
        ],
        force=True
    )


logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Learner Lab. Optimizers against no-regret learners in repeated bimatrix games.'
    )
    parser.add_argument('--config', default='.env',
                        help='Path to the .env configuration file (default: .env)')
    parser.add_argument('--seed', type=int,
                        help='Seed for generated games (overrides LAB_SEED) and the single seed of a simulation')
    parser.add_argument('--out-dir', help='Directory for output files (overrides LAB_OUTPUT_DIR)')
    parser.add_argument('--format', choices=['json', 'csv'], default='json',
                        help='Format of the result files (default: json)')
    parser.add_argument('--workers', type=int, help='Worker processes for sweeps and searches')
    parser.add_argument('--verbose', action='store_true', help='Enable debug logging')

    subparsers = parser.add_subparsers(dest='command', required=True)

    stackelberg = subparsers.add_parser('stackelberg', help='Compute the Stackelberg commitment of a game')
    stackelberg.add_argument('game', help='Game JSON file')
    stackelberg.add_argument('--verify', action='store_true',
                             help='Compare against the grid brute-force oracle')
    stackelberg.add_argument('--resolution', type=int, default=200,
                             help='Grid resolution of the verification oracle (default: 200)')

    simulate = subparsers.add_parser('simulate', help='Run an experiment file against a learner')
    simulate.add_argument('experiment', help='Experiment JSON file')

    audit = subparsers.add_parser('audit', help='Audit a learner trace CSV')
    audit.add_argument('trace', help='Trace CSV file')
    audit.add_argument('--gamma', type=float, required=True, help='Mean-based slack parameter in (0, 1)')

    control = subparsers.add_parser('control-search', help='Search control policies against mean-based learners')
    control.add_argument('game', help='Game JSON file')
    control.add_argument('--max-steps', type=int, required=True, help='Maximum number of policy steps')
    control.add_argument('--resolution', type=int, required=True, help='Simplex grid resolution')
    control.add_argument('--cycles', action='store_true', help='Also search cycle certificates')

    generate = subparsers.add_parser('gen-random', help='Write a seeded random game')
    generate.add_argument('--rows', type=int, required=True, help='Number of optimizer actions')
    generate.add_argument('--cols', type=int, required=True, help='Number of learner actions')
    return parser


def dispatch(service: ExperimentService, args: argparse.Namespace) -> bool:
    """Run one command; True when it succeeded"""
    if args.command == 'stackelberg':
        report = service.solve_stackelberg(args.game, verify=args.verify, resolution=args.resolution)
        service.print_stackelberg(report)
        return report.success and report.verified is not False
    if args.command == 'simulate':
        report = service.run_experiment(args.experiment, seed=args.seed)
        service.print_simulation(report)
        return report.success
    if args.command == 'audit':
        result = service.audit_trace(args.trace, args.gamma)
        service.print_audit(result)
        return result.success
    if args.command == 'control-search':
        report = service.control_search(args.game, args.max_steps, args.resolution, include_cycles=args.cycles)
        service.print_search(report)
        return report.success
    path = service.generate_random(args.rows, args.cols)
    print(f"Random game written to {path}")
    return True


def main():
    """Main entry point"""
    args = build_parser().parse_args()

    try:
        config = ConfigLoader.load_from_env(args.config).with_overrides(
            seed=args.seed, output_dir=args.out_dir, workers=args.workers
        )
        setup_logging(config.log_file, args.verbose)
        run_logger.configure(config.run_log_file)
        logger.info(f"🚀 Running {args.command}")

        service = ExperimentService(config, output_format=args.format)
        succeeded = dispatch(service, args)
        sys.exit(0 if succeeded else 1)

    except ValueError as ve:
        logger.error(f"Configuration error: {ve}")
        print(f"Error: {ve}")
        print("Please check your .env file or command line arguments.")
        sys.exit(1)
    except KeyboardInterrupt:
        print("\nOperation cancelled by user.")
        sys.exit(130)
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        print(f"An unexpected error occurred: {e}")
        print("Check the engine log for details.")
        sys.exit(1)


if __name__ == '__main__':
    main()
