"""
Command-line entry point.

    forwardsignal run --input bars.csv --timezone America/New_York --out results
    forwardsignal audit --config run.ini --cuts 50 --seed 7
    forwardsignal diagnose-shifts --config run.ini --shifts 0,1,2,3

Exit codes: 0 success / audit PASS, 1 usage or config error, 2 data error,
3 audit FAIL.
"""
from __future__ import annotations

import argparse
import os
import shutil
import sys
import tempfile
from typing import Optional, Sequence

import numpy as np
import polars as pl

from .audit import audit_causality, causal_trace
from .backtest import (NO_COST_DISCLAIMER, REGIME_COLUMNS, format_metrics,
                       format_regime_table, forward_shift_diagnostic, regime_report)
from .config import RunConfig, dump_config, ensure_writable_dir, load_config
from .engine import RunResult, compute_signal, run_strategy
from .errors import ConfigError, DataError
from .market_data import BarSeries, filter_sessions, format_timestamps, parse_bars

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_AUDIT_FAIL = 0, 1, 2, 3

TRACE_FILE = "trace.csv"
POSITIONS_FILE = "positions.csv"
EQUITY_FILE = "equity.csv"
METRICS_FILE = "metrics.txt"
REGIMES_FILE = "regimes.csv"
CONFIG_ECHO = "effective_config.ini"
SHIFTS_FILE = "shift_diagnostic.csv"


def load_bars(cfg: RunConfig) -> BarSeries:
    try:
        raw = parse_bars(cfg.input, cfg.columns)
    except OSError as exc:
        raise DataError(f"cannot read input {cfg.input}: {exc}") from None
    bars = filter_sessions(raw, cfg.session)
    if len(bars) == 0:
        raise DataError("no bars survive session filter")
    return bars


def _csv(columns: dict) -> bytes:
    frame = pl.DataFrame(columns)
    floats = [name for name, dtype in frame.schema.items() if dtype == pl.Float64]
    if floats:
        frame = frame.with_columns(pl.col(floats).fill_nan(None))
    return frame.write_csv().encode()


def trace_csv(result: RunResult, stamps: Optional[pl.Series] = None) -> bytes:
    cols = result.trace_columns()
    ts = cols.pop("timestamp_ms")
    return _csv({"timestamp": format_timestamps(ts) if stamps is None else stamps, **cols})


def positions_csv(result: RunResult, stamps: Optional[pl.Series] = None) -> bytes:
    pos = result.positions
    if stamps is None:
        stamps = format_timestamps(result.bars.timestamp_ms)
    return _csv({
        "timestamp": stamps.filter(pl.Series(result.valid)),
        "p": pos.p, "p_applied": pos.p_applied, "dp": pos.dp,
    })


def equity_csv(result: RunResult, stamps: Optional[pl.Series] = None) -> bytes:
    eq = result.equity
    if stamps is None:
        stamps = format_timestamps(result.bars.timestamp_ms)
    return _csv({
        "timestamp": stamps.filter(pl.Series(result.valid))[1:],
        "r": eq.r, "R": eq.R, "v": eq.v, "v_bench": eq.v_bench, "trades_cum": eq.trades_cum,
    })


def regimes_csv(reports) -> bytes:
    return _csv({field: [getattr(r, field) for r in reports] for field in REGIME_COLUMNS})


class _Staging:
    """Write artifacts to a scratch directory and move them in only on success."""

    def __init__(self, out_dir: str):
        ensure_writable_dir(out_dir)
        self.out_dir = out_dir
        self.tmp = tempfile.mkdtemp(prefix=".partial-", dir=out_dir)
        self.names: list[str] = []

    def write(self, name: str, data: bytes) -> None:
        with open(os.path.join(self.tmp, name), "wb") as fh:
            fh.write(data)
        self.names.append(name)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            for name in self.names:
                os.replace(os.path.join(self.tmp, name), os.path.join(self.out_dir, name))
        shutil.rmtree(self.tmp, ignore_errors=True)
        return False


def cmd_run(cfg: RunConfig) -> int:
    bars = load_bars(cfg)
    result = run_strategy(bars, cfg.indicators, cfg.pipeline, cfg.decision)
    reports = regime_report(result.equity, cfg.splits, days_per_month=cfg.days_per_month)
    stamps = format_timestamps(bars.timestamp_ms)
    with _Staging(cfg.out) as out:
        out.write(TRACE_FILE, trace_csv(result, stamps))
        out.write(POSITIONS_FILE, positions_csv(result, stamps))
        out.write(EQUITY_FILE, equity_csv(result, stamps))
        out.write(METRICS_FILE, (format_metrics(result.equity, reports) + "\n"
                                 + format_regime_table(reports)).encode())
        out.write(REGIMES_FILE, regimes_csv(reports))
        out.write(CONFIG_ECHO, dump_config(cfg).encode())
    print(format_regime_table(reports), end="")
    return EXIT_OK


def cmd_audit(cfg: RunConfig) -> int:
    bars = load_bars(cfg)
    trace = causal_trace(cfg.indicators, cfg.pipeline, cfg.decision)
    result = audit_causality(bars, cuts=cfg.cuts, seed=cfg.seed, trace=trace)
    print(result.summary())
    return EXIT_OK if result.passed else EXIT_AUDIT_FAIL


def cmd_diagnose_shifts(cfg: RunConfig) -> int:
    if not cfg.shifts:
        raise ConfigError("diagnose-shifts needs at least one shift")
    bars = load_bars(cfg)
    ind, sig = compute_signal(bars, cfg.indicators, cfg.pipeline)
    valid = ind.valid
    if valid.sum() < 2:
        raise DataError("fewer than two bars left after indicator warm-up")
    curves = forward_shift_diagnostic(sig.f[valid], bars.close[valid], cfg.shifts, cfg.decision)
    ts = bars.timestamp_ms[valid][1:]
    cols = {"timestamp": format_timestamps(ts)}
    for k, curve in curves.items():
        col = np.full(len(ts), np.nan)
        col[: len(curve)] = curve.v
        cols[f"v_shift_{k}"] = col
    header = (
        "# NON-CAUSAL diagnostic: column v_shift_k feeds the decision rule the signal k bars early.\n"
        + NO_COST_DISCLAIMER + "\n"
    )
    with _Staging(cfg.out) as out:
        out.write(SHIFTS_FILE, header.encode() + _csv(cols))
    for k, curve in curves.items():
        print(f"shift {k}: end_v = {curve.end_v!r}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "audit": cmd_audit, "diagnose-shifts": cmd_diagnose_shifts}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="forwardsignal", description="Causal forward-observable backtester.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI configuration file")
        p.add_argument("--input", help="OHLCV CSV file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--timezone", help="session timezone, e.g. America/New_York")
        p.add_argument("--theta", help="hysteresis threshold")
        p.add_argument("--seed", help="audit RNG seed")
        p.add_argument("--cuts", help="number of audit prefix cuts")
        p.add_argument("--shifts", help="comma-separated non-negative shifts")
        p.add_argument("--split", action="append", help="regime split datetime (repeatable)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "RunConfig.input": args.input,
        "RunConfig.out": args.out,
        "RunConfig.seed": args.seed,
        "RunConfig.cuts": args.cuts,
        "RunConfig.shifts": args.shifts,
        "RunConfig.splits": ",".join(args.split) if args.split else None,
        "SessionPolicy.timezone": args.timezone,
        "DecisionConfig.theta": args.theta,
    }
    return load_config(args.config, overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
