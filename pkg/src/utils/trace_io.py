"""
CSV export and import of learner traces and sweep summaries
"""
import logging
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..core.errors import TraceFormatError
from ..models.learner_models import RewardTrace
from ..models.match_models import MatchResult, SweepEntry

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SWEEP_COLUMNS = ['config_id', 'seed', 'T', 'optimizer_avg', 'regret', 'swap_regret']


def trace_frame(trace: RewardTrace, distributions: np.ndarray) -> pd.DataFrame:
    """Columns t, chosen, p_1..p_K, r_1..r_K, sigma_1..sigma_K with 1-based arm suffixes"""
    distributions = np.asarray(distributions, dtype=float)
    if distributions.shape != trace.rewards.shape:
        raise TraceFormatError(f"Distributions {distributions.shape} do not match rewards {trace.rewards.shape}")
    arms = range(1, trace.num_arms + 1)
    frame = pd.DataFrame({'t': np.arange(1, trace.num_rounds + 1), 'chosen': trace.chosen})
    for prefix, block in (('p', distributions), ('r', trace.rewards), ('sigma', trace.cumulative)):
        for j in arms:
            frame[f"{prefix}_{j}"] = block[:, j - 1]
    return frame


def export_trace_csv(result: MatchResult, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trace_frame(result.trace, result.distributions).to_csv(path, index=False, float_format='%.17g')
    logger.debug(f"Trace written to {path}")
    return path


def _arm_columns(columns: List[str], prefix: str) -> List[str]:
    selected = sorted((c for c in columns if c.startswith(prefix + '_') and c[len(prefix) + 1:].isdigit()),
                      key=lambda c: int(c[len(prefix) + 1:]))
    expected = [f"{prefix}_{j}" for j in range(1, len(selected) + 1)]
    if selected != expected:
        raise TraceFormatError(f"Columns {prefix}_1..{prefix}_K must be contiguous, found {selected}")
    return selected


def load_trace_csv(path: PathLike) -> Tuple[RewardTrace, np.ndarray]:
    """Read a trace CSV back into (RewardTrace, distributions); sigma columns are checked, not trusted"""
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise TraceFormatError(f"{path}: cannot parse trace CSV: {e}")

    columns = list(frame.columns)
    if 'chosen' not in columns:
        raise TraceFormatError(f"{path}: missing 'chosen' column")
    prob_columns = _arm_columns(columns, 'p')
    reward_columns = _arm_columns(columns, 'r')
    if not reward_columns or len(prob_columns) != len(reward_columns):
        raise TraceFormatError(f"{path}: need matching p_* and r_* columns, got {len(prob_columns)} and "
                               f"{len(reward_columns)}")
    numeric = frame[['chosen'] + prob_columns + reward_columns]
    if numeric.isna().any().any():
        raise TraceFormatError(f"{path}: trace contains empty cells")

    try:
        trace = RewardTrace(frame[reward_columns].to_numpy(dtype=float), frame['chosen'].to_numpy(dtype=int))
    except ValueError as e:
        raise TraceFormatError(f"{path}: {e}")

    sigma_columns = [c for c in columns if c.startswith('sigma_')]
    if sigma_columns:
        sigma = frame[_arm_columns(columns, 'sigma')].to_numpy(dtype=float)
        if sigma.shape != trace.cumulative.shape or not np.allclose(sigma, trace.cumulative, atol=1e-9, rtol=0):
            raise TraceFormatError(f"{path}: sigma columns disagree with the prefix sums of the rewards")
    return trace, frame[prob_columns].to_numpy(dtype=float)


def sweep_frame(entries: Sequence[SweepEntry]) -> pd.DataFrame:
    rows = []
    for entry in entries:
        if not entry.success:
            continue
        result = entry.result
        rows.append({
            'config_id': entry.config_id,
            'seed': entry.seed,
            'T': result.rounds,
            'optimizer_avg': result.optimizer_average,
            'regret': result.regret,
            'swap_regret': result.swap_regret,
        })
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def export_sweep_csv(entries: Sequence[SweepEntry], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sweep_frame(entries).to_csv(path, index=False)
    logger.debug(f"Sweep summary written to {path}")
    return path
