"""
Tests for the experiment service and the command-line entry point
"""
import json
import logging
import sys

import numpy as np
import pandas as pd
import pytest

import main
from src.core.config import Config
from src.core.experiment_service import ExperimentService
from src.models.learner_models import RewardTrace
from src.utils.game_io import load_game, write_json
from src.utils.trace_io import trace_frame


@pytest.fixture
def service(tmp_path):
    return ExperimentService(Config(output_dir=str(tmp_path / 'out'), seed=3))


@pytest.fixture
def csv_service(tmp_path):
    return ExperimentService(Config(output_dir=str(tmp_path / 'out')), output_format='csv')


@pytest.fixture
def always_arm0_trace(tmp_path):
    rounds = 100
    rewards = np.tile([0.0, 1.0], (rounds, 1))
    distributions = np.tile([1.0, 0.0], (rounds, 1))
    path = tmp_path / 'arm0.csv'
    trace_frame(RewardTrace(rewards, np.zeros(rounds, dtype=int)), distributions).to_csv(path, index=False)
    return path


class TestStackelbergCommand:
    def test_table1(self, service, games_dir):
        report = service.solve_stackelberg(str(games_dir / 'table1_eps005.json'))
        assert report.success
        assert report.solution.value == pytest.approx(0.0, abs=1e-9)
        assert report.response_name == 'Right'
        data = json.loads(open(report.output_path, encoding='utf-8').read())
        assert data['response'] == 'Right'
        assert data['commitment'] == pytest.approx([0.5, 0.5])

    def test_matching_pennies(self, service, games_dir):
        report = service.solve_stackelberg(str(games_dir / 'matching_pennies.json'))
        assert report.solution.value == pytest.approx(0.0, abs=1e-9)

    def test_verify_against_grid(self, service, games_dir):
        report = service.solve_stackelberg(str(games_dir / 'table1_eps005.json'), verify=True)
        assert report.verified is True
        assert report.oracle_value == pytest.approx(0.0, abs=1e-9)

    def test_verify_generated_game(self, service):
        path = service.generate_random(3, 3)
        report = service.solve_stackelberg(str(path), verify=True, resolution=60)
        assert report.success
        assert report.oracle_value <= report.solution.value + 1e-9
        assert report.verified == (abs(report.oracle_value - report.solution.value) <= 1e-2)

    def test_dominated_actions_are_listed(self, service, tmp_path):
        game = {
            'optimizer_actions': ['u', 'd'],
            'learner_actions': ['l', 'r', 'copy'],
            'optimizer_payoffs': [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            'learner_payoffs': [[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]],
            'scale': 1.0,
        }
        report = service.solve_stackelberg(str(write_json(game, tmp_path / 'dup.json')))
        assert report.success
        assert 'copy' in report.dominated_actions

    def test_csv_output(self, csv_service, games_dir):
        report = csv_service.solve_stackelberg(str(games_dir / 'table1_eps005.json'))
        frame = pd.read_csv(report.output_path)
        assert frame.loc[0, 'response'] == 'Right'

    def test_bad_file_is_reported(self, service, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"scale": }', encoding='utf-8')
        report = service.solve_stackelberg(str(path))
        assert not report.success
        assert 'broken.json:1:' in report.error_message


class TestSimulateCommand:
    def test_smoke_experiment(self, service, experiments_dir, tmp_path):
        report = service.run_experiment(str(experiments_dir / 'smoke.json'))
        assert report.success
        assert report.stackelberg_value == pytest.approx(0.0, abs=1e-9)
        names = sorted(path.split('/')[-1] for path in report.output_files)
        assert names == ['smoke_summary.json', 'smoke_sweep.csv', 'smoke_trace_seed0.csv']

        sweep_csv = pd.read_csv(tmp_path / 'out' / 'smoke_sweep.csv')
        assert sweep_csv['T'].tolist() == [1]
        trace_csv = pd.read_csv(tmp_path / 'out' / 'smoke_trace_seed0.csv')
        assert len(trace_csv) == 1
        summary = json.loads((tmp_path / 'out' / 'smoke_summary.json').read_text(encoding='utf-8'))
        assert summary['runs'][0]['T'] == 1

    def test_seed_override(self, service, experiments_dir):
        report = service.run_experiment(str(experiments_dir / 'smoke.json'), seed=12)
        assert [entry.seed for entry in report.entries] == [12]

    def test_csv_mode_skips_summary_json(self, csv_service, experiments_dir):
        report = csv_service.run_experiment(str(experiments_dir / 'smoke.json'))
        assert not any(path.endswith('.json') for path in report.output_files)

    def test_policy_experiment(self, service, tmp_path, games_dir, policies_dir):
        experiment = {
            'name': 'short_exploit',
            'game': str(games_dir / 'table1_eps005.json'),
            'policy': str(policies_dir / 'table1_exploit.json'),
            'learner': {'algorithm': 'ftl'},
            'rounds': 50,
            'seeds': [0, 1],
        }
        report = service.run_experiment(str(write_json(experiment, tmp_path / 'exp.json')))
        assert report.success
        assert [entry.seed for entry in report.entries] == [0, 1]
        assert all(entry.result.rounds == 50 for entry in report.entries)

    def test_missing_experiment_file(self, service, tmp_path):
        report = service.run_experiment(str(tmp_path / 'missing.json'))
        assert not report.success
        assert 'Cannot read' in report.error_message

    @pytest.mark.parametrize('change, message', [
        ({'game': 'nowhere.json'}, 'Game file not found'),
        ({'seeds': []}, 'non-empty'),
        ({'colour': 'red'}, 'Unknown experiment fields'),
        ({'commitment': {'delta': 1.5}}, 'delta'),
        ({'learner': {'algorithm': 'exp3', 'feedback': 'experts'}}, 'bandit'),
    ])
    def test_invalid_experiment(self, service, tmp_path, games_dir, change, message):
        experiment = {
            'name': 'bad',
            'game': str(games_dir / 'table1_eps005.json'),
            'commitment': {'delta': 0.1},
            'learner': {'algorithm': 'mw'},
            'rounds': 10,
            'seeds': [0],
        }
        experiment.update(change)
        report = service.run_experiment(str(write_json(experiment, tmp_path / 'bad.json')))
        assert not report.success
        assert message in report.error_message

    def test_bundled_experiments_parse(self, experiments_dir):
        from src.models.experiment_models import ExperimentConfig

        for path in experiments_dir.glob('*.json'):
            assert ExperimentConfig.from_file(path).is_valid()


class TestAuditCommand:
    def test_smoke_trace_passes(self, service, experiments_dir, tmp_path):
        service.run_experiment(str(experiments_dir / 'smoke.json'))
        result = service.audit_trace(str(tmp_path / 'out' / 'smoke_trace_seed0.csv'), 0.5)
        assert result.success
        assert result.report.passed

    def test_always_arm0_is_flagged(self, service, always_arm0_trace):
        result = service.audit_trace(str(always_arm0_trace), 0.1)
        assert result.success
        assert [v.round for v in result.report.violations] == list(range(11, 100))
        assert result.report.regret == pytest.approx(100.0)
        data = json.loads(open(result.output_path, encoding='utf-8').read())
        assert len(data['violations']) == 89

    def test_csv_output(self, csv_service, always_arm0_trace):
        result = csv_service.audit_trace(str(always_arm0_trace), 0.1)
        frame = pd.read_csv(result.output_path)
        assert list(frame.columns) == ['round', 'arm', 'probability', 'deficit']
        assert len(frame) == 89

    def test_malformed_trace(self, service, tmp_path):
        path = tmp_path / 'junk.csv'
        path.write_text("a,b\n1,2\n", encoding='utf-8')
        result = service.audit_trace(str(path), 0.1)
        assert not result.success
        assert 'chosen' in result.error_message

    def test_gamma_out_of_range(self, service, always_arm0_trace):
        assert not service.audit_trace(str(always_arm0_trace), 1.5).success


class TestControlSearchCommand:
    def test_table1_exploit_bound(self, service, games_dir):
        report = service.control_search(str(games_dir / 'table1_eps0.json'), max_steps=2, resolution=10)
        assert report.success
        assert report.result.value >= 1.0 - 1e-9
        assert report.stackelberg_value == pytest.approx(0.0, abs=1e-9)
        data = json.loads(open(report.output_path, encoding='utf-8').read())
        assert set(data['labels']) <= {'Left', 'Mid', 'Right'}
        assert data['kind'] == 'path'

    def test_matching_pennies(self, service, games_dir):
        report = service.control_search(str(games_dir / 'matching_pennies.json'), max_steps=2, resolution=4)
        assert report.result.value <= 1e-6

    def test_bad_arguments_are_reported(self, service, games_dir):
        report = service.control_search(str(games_dir / 'table1_eps0.json'), max_steps=0, resolution=4)
        assert not report.success


class TestGenerateRandom:
    def test_writes_a_seeded_game(self, service):
        path = service.generate_random(3, 2)
        game = load_game(path)
        assert (game.num_optimizer_actions, game.num_learner_actions) == (3, 2)
        assert game.name == 'random-3x2-seed3'

    def test_same_seed_same_game(self, service):
        assert load_game(service.generate_random(2, 2, seed=5)) == load_game(service.generate_random(2, 2, seed=5))

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            ExperimentService(Config(output_dir=str(tmp_path)), output_format='xml')


class TestCommandLine:
    def run_main(self, monkeypatch, tmp_path, *argv):
        monkeypatch.chdir(tmp_path)
        monkeypatch.setattr(sys, 'argv', ['main.py', '--config', str(tmp_path / 'none.env'),
                                          '--out-dir', str(tmp_path / 'cli'), *argv])
        with pytest.raises(SystemExit) as info:
            main.main()
        return info.value.code

    def test_parser(self):
        args = main.build_parser().parse_args(['--format', 'csv', 'control-search', 'g.json',
                                               '--max-steps', '2', '--resolution', '5', '--cycles'])
        assert (args.command, args.max_steps, args.resolution, args.cycles, args.format) == (
            'control-search', 2, 5, True, 'csv')

    def test_emoji_filter(self):
        record = logging.LogRecord('lab', logging.INFO, __file__, 1, '✅ done, ⚠️ check', None, None)
        assert main.EmojiFilter().filter(record)
        assert record.msg == '[OK] done, [WARNING] check'

    def test_dispatch_stackelberg(self, service, games_dir, capsys):
        args = main.build_parser().parse_args(['stackelberg', str(games_dir / 'table1_eps005.json')])
        assert main.dispatch(service, args)
        assert 'Response: Right' in capsys.readouterr().out

    def test_stackelberg_exit_status(self, clean_env, monkeypatch, tmp_path, games_dir):
        assert self.run_main(monkeypatch, tmp_path, 'stackelberg', str(games_dir / 'table1_eps005.json')) == 0
        assert (tmp_path / 'cli' / 'stackelberg_table1_eps005.json').is_file()
        assert (tmp_path / 'engine.log').is_file()

    def test_simulate_smoke(self, clean_env, monkeypatch, tmp_path, experiments_dir):
        assert self.run_main(monkeypatch, tmp_path, 'simulate', str(experiments_dir / 'smoke.json')) == 0
        assert (tmp_path / 'cli' / 'smoke_sweep.csv').is_file()

    def test_gen_random_uses_seed_flag(self, clean_env, monkeypatch, tmp_path):
        assert self.run_main(monkeypatch, tmp_path, '--seed', '21', 'gen-random', '--rows', '2', '--cols', '3') == 0
        assert (tmp_path / 'cli' / 'random-2x3-seed21.json').is_file()

    def test_seed_flag_overrides_simulation_seeds(self, clean_env, monkeypatch, tmp_path, experiments_dir):
        assert self.run_main(monkeypatch, tmp_path, '--seed', '7', 'simulate', str(experiments_dir / 'smoke.json')) == 0
        assert (tmp_path / 'cli' / 'smoke_trace_seed7.csv').is_file()
        assert not (tmp_path / 'cli' / 'smoke_trace_seed0.csv').exists()
        summary = json.loads((tmp_path / 'cli' / 'smoke_summary.json').read_text(encoding='utf-8'))
        assert [entry['seed'] for entry in summary['runs']] == [7]

    def test_dispatch_passes_seed_to_simulate(self, service, experiments_dir, monkeypatch):
        calls = []
        real_run = service.run_experiment

        def recording_run(path, seed=None):
            calls.append(seed)
            return real_run(path, seed)

        monkeypatch.setattr(service, 'run_experiment', recording_run)
        args = main.build_parser().parse_args(['--seed', '7', 'simulate', str(experiments_dir / 'smoke.json')])
        assert main.dispatch(service, args)
        assert calls == [7]

    def test_failed_command_exits_nonzero(self, clean_env, monkeypatch, tmp_path):
        assert self.run_main(monkeypatch, tmp_path, 'stackelberg', str(tmp_path / 'missing.json')) == 1

    def test_invalid_workers_exit(self, clean_env, monkeypatch, tmp_path, games_dir, capsys):
        code = self.run_main(monkeypatch, tmp_path, '--workers', '0', 'stackelberg',
                             str(games_dir / 'table1_eps005.json'))
        assert code == 1
        assert 'Error:' in capsys.readouterr().out
