"""Whole-series driver: filtered bars in, trace / positions / equity out."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backtest import EquityCurve, backtest
from .decision import DecisionConfig, PositionPath, run_decisions
from .errors import DataError
from .indicators import IndicatorConfig, IndicatorFrame, compute_indicators
from .market_data import BarSeries
from .signal_pipeline import PipelineConfig, SignalTrace, run_pipeline


@dataclass(frozen=True)
class RunResult:
    bars: BarSeries
    indicators: IndicatorFrame
    signal: SignalTrace
    valid: np.ndarray
    positions: PositionPath  # valid bars only
    equity: EquityCurve  # valid bars 1.. only

    def trace_columns(self) -> dict[str, np.ndarray]:
        """Every per-bar column of the trace, keyed by output name."""
        cols = {
            "timestamp_ms": self.bars.timestamp_ms,
            "valid": self.valid.astype(np.int8),
            "close": self.bars.close,
            "mfi": self.indicators.mfi,
            "rsi": self.indicators.rsi,
            "bb_pct": self.indicators.bb_pct,
            "macd_diff": self.indicators.macd_diff,
        }
        cols.update(self.signal.columns())
        return cols


def compute_signal(bars: BarSeries, ind_cfg: IndicatorConfig = IndicatorConfig(),
                   pipe_cfg: PipelineConfig = PipelineConfig()) -> tuple[IndicatorFrame, SignalTrace]:
    ind = compute_indicators(bars, ind_cfg)
    sig = run_pipeline(ind, pipe_cfg)
    if not np.isfinite(sig.f0_raw[ind.valid]).all():
        raise DataError("non-finite composite value; check input data")
    return ind, sig


def run_strategy(bars: BarSeries, ind_cfg: IndicatorConfig = IndicatorConfig(),
                 pipe_cfg: PipelineConfig = PipelineConfig(),
                 dec_cfg: DecisionConfig = DecisionConfig()) -> RunResult:
    """Indicators, pipeline, decisions and equity on already-filtered bars."""
    ind, sig = compute_signal(bars, ind_cfg, pipe_cfg)
    valid = ind.valid
    if valid.sum() < 2:
        raise DataError(
            f"only {int(valid.sum())} bar(s) left after indicator warm-up; need at least 2"
        )
    positions = run_decisions(sig.f[valid], dec_cfg)
    equity = backtest(bars.close[valid], positions, bars.timestamp_ms[valid])
    return RunResult(bars, ind, sig, valid, positions, equity)
