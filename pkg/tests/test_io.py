"""
Tests for game, policy and trace file IO
"""
import json

import numpy as np
import pandas as pd
import pytest

from src.core.errors import GameFileError, TraceFormatError
from src.core.game_core import random_game, table1_game
from src.core.optimizers import exploit_policy_table1
from src.core.simulation import run, sweep
from src.models.learner_models import LearnerConfig, RewardTrace
from src.models.match_models import MatchConfig, SweepEntry
from src.models.policy_models import RoundSchedule
from src.utils.game_io import load_game, load_policy, save_game, save_policy, write_json
from src.utils.trace_io import (
    SWEEP_COLUMNS,
    export_sweep_csv,
    export_trace_csv,
    load_trace_csv,
    sweep_frame,
    trace_frame,
)


def short_match(game, rounds=40, seed=0):
    schedule = RoundSchedule.from_segments([([1.0, 0.0], rounds // 2), ([0.0, 1.0], rounds - rounds // 2)])
    return MatchConfig(game, LearnerConfig('mw'), rounds, schedule=schedule, seed=seed, config_id='short')


class TestGameFiles:
    def test_bundled_table1(self, games_dir):
        game = load_game(games_dir / 'table1_eps005.json')
        assert game == table1_game(0.05)
        assert game.name == 'table1_eps005'

    def test_all_bundled_games_parse(self, games_dir):
        names = sorted(path.stem for path in games_dir.glob('*.json'))
        assert names == ['matching_pennies', 'table1_eps0', 'table1_eps005', 'two_action_learner']
        for path in games_dir.glob('*.json'):
            assert load_game(path).num_learner_actions >= 2

    def test_name_defaults_to_file_stem(self, tmp_path):
        data = random_game(2, 2, 1).to_dict()
        del data['name']
        path = write_json(data, tmp_path / 'unnamed.json')
        assert load_game(path).name == 'unnamed'

    def test_save_and_load(self, tmp_path):
        game = random_game(3, 2, 8)
        loaded = load_game(save_game(game, tmp_path / 'nested' / 'g.json'))
        assert loaded == game
        assert loaded.name == game.name

    def test_syntax_error_reports_line_and_column(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{\n  "scale": 2,\n  oops\n}\n', encoding='utf-8')
        with pytest.raises(GameFileError) as info:
            load_game(path)
        assert (info.value.line, info.value.column) == (3, 3)
        assert f"{path}:3:3" in str(info.value)

    def test_missing_fields(self, tmp_path):
        path = write_json({'scale': 1.0}, tmp_path / 'partial.json')
        with pytest.raises(GameFileError, match='missing fields'):
            load_game(path)

    def test_scale_must_bound_payoffs(self, tmp_path):
        data = table1_game(0.05).to_dict()
        data['scale'] = 1.0
        with pytest.raises(GameFileError, match='exceeds declared scale'):
            load_game(write_json(data, tmp_path / 'small_scale.json'))

    def test_top_level_must_be_an_object(self, tmp_path):
        path = tmp_path / 'list.json'
        path.write_text('[1, 2]', encoding='utf-8')
        with pytest.raises(GameFileError, match='object'):
            load_game(path)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(GameFileError):
            load_game(tmp_path / 'nowhere.json')

    def test_game_file_error_is_a_value_error(self, tmp_path):
        with pytest.raises(ValueError):
            load_game(tmp_path / 'nowhere.json')


class TestPolicyFiles:
    def test_bundled_exploit_policy(self, policies_dir):
        assert load_policy(policies_dir / 'table1_exploit.json') == exploit_policy_table1()

    def test_save_and_load(self, tmp_path):
        policy = exploit_policy_table1().scaled(3.0)
        assert load_policy(save_policy(policy, tmp_path / 'p.json')) == policy

    def test_malformed_step(self, tmp_path):
        path = write_json({'steps': [{'alpha': [1.0, 0.0]}]}, tmp_path / 'bad.json')
        with pytest.raises(GameFileError, match="'alpha' and 't'"):
            load_policy(path)


class TestTraceCsv:
    def test_columns(self, table1):
        result = run(short_match(table1, rounds=4))
        frame = trace_frame(result.trace, result.distributions)
        assert list(frame.columns) == ['t', 'chosen', 'p_1', 'p_2', 'p_3', 'r_1', 'r_2', 'r_3',
                                       'sigma_1', 'sigma_2', 'sigma_3']
        assert frame['t'].tolist() == [1, 2, 3, 4]

    def test_export_and_load(self, table1, tmp_path):
        result = run(short_match(table1))
        trace, distributions = load_trace_csv(export_trace_csv(result, tmp_path / 'trace.csv'))
        assert trace == result.trace
        assert np.array_equal(distributions, result.distributions)

    def test_inconsistent_sigma_is_rejected(self, table1, tmp_path):
        result = run(short_match(table1))
        path = export_trace_csv(result, tmp_path / 'trace.csv')
        frame = pd.read_csv(path)
        frame.loc[10, 'sigma_2'] += 0.5
        frame.to_csv(path, index=False)
        with pytest.raises(TraceFormatError, match='sigma'):
            load_trace_csv(path)

    def test_sigma_columns_are_optional(self, tmp_path):
        trace = RewardTrace([[1.0, 0.0], [0.0, 1.0]], [0, 1])
        frame = trace_frame(trace, np.full((2, 2), 0.5)).drop(columns=['sigma_1', 'sigma_2'])
        frame.to_csv(tmp_path / 'plain.csv', index=False)
        loaded, _ = load_trace_csv(tmp_path / 'plain.csv')
        assert loaded == trace

    @pytest.mark.parametrize('drop', ['chosen', 'p_2', 'r_1'])
    def test_missing_columns(self, tmp_path, drop):
        trace = RewardTrace([[1.0, 0.0], [0.0, 1.0]], [0, 1])
        trace_frame(trace, np.full((2, 2), 0.5)).drop(columns=[drop]).to_csv(tmp_path / 'cut.csv', index=False)
        with pytest.raises(TraceFormatError):
            load_trace_csv(tmp_path / 'cut.csv')

    def test_chosen_arm_out_of_range(self, tmp_path):
        frame = trace_frame(RewardTrace([[1.0, 0.0]], [0]), [[1.0, 0.0]])
        frame.loc[0, 'chosen'] = 5
        frame.to_csv(tmp_path / 'arm.csv', index=False)
        with pytest.raises(TraceFormatError):
            load_trace_csv(tmp_path / 'arm.csv')

    def test_empty_cells(self, tmp_path):
        path = tmp_path / 'holes.csv'
        path.write_text("t,chosen,p_1,p_2,r_1,r_2\n1,0,0.5,,1,0\n", encoding='utf-8')
        with pytest.raises(TraceFormatError, match='empty'):
            load_trace_csv(path)

    def test_not_a_csv(self, tmp_path):
        path = tmp_path / 'empty.csv'
        path.write_text('', encoding='utf-8')
        with pytest.raises(TraceFormatError):
            load_trace_csv(path)


class TestSweepCsv:
    def test_columns_and_rows(self, table1, tmp_path):
        entries = sweep([short_match(table1, seed=s) for s in (4, 5)])
        path = export_sweep_csv(entries, tmp_path / 'sweep.csv')
        frame = pd.read_csv(path)
        assert list(frame.columns) == SWEEP_COLUMNS
        assert frame['seed'].tolist() == [4, 5]
        assert frame['T'].tolist() == [40, 40]
        assert frame['optimizer_avg'].tolist() == pytest.approx([e.result.optimizer_average for e in entries])

    def test_failed_runs_are_skipped(self):
        frame = sweep_frame([SweepEntry(index=0, config_id='x', seed=0, error_message='boom')])
        assert frame.empty
        assert list(frame.columns) == SWEEP_COLUMNS

    def test_summary_json(self, table1, tmp_path):
        entry = sweep([short_match(table1)])[0]
        path = write_json(entry.result.summary(), tmp_path / 'summary.json')
        data = json.loads(path.read_text(encoding='utf-8'))
        assert data['T'] == 40
        assert data['learner'] == 'mw'
        assert sum(data['action_frequencies']) == pytest.approx(1.0)
