"""Strictly causal composite market signal, hysteresis decisions and backtesting."""
from .audit import AuditResult, audit_causality, causal_trace
from .backtest import (EquityCurve, EquityRecord, RegimeReport, backtest, format_metrics,
                       format_regime_table, forward_shift_diagnostic, max_drawdown, realized_equity,
                       regime_report, simple_returns)
from .config import RunConfig, dump_config, load_config
from .decision import DecisionConfig, PositionPath, PositionRecord, run_decisions, update_state
from .engine import RunResult, compute_signal, run_strategy
from .errors import ConfigError, DataError, ForwardSignalError
from .indicators import (MFI, RSI, BollingerPercent, IndicatorConfig, IndicatorEngine, IndicatorFrame,
                         IndicatorVector, MACDDiff, compute_indicators)
from .market_data import (Bar, BarSeries, ColumnSpec, SessionPolicy, filter_sessions, parse_bars,
                          session_keep, session_mask)
from .signal_pipeline import (CausalDerivative, ExpandingMedian, PipelineConfig, ScalarKalman,
                              SignalPipeline, SignalState, SignalTrace, composite, forward_operator,
                              run_pipeline)

__version__ = "0.1.0"
