"""
Realized returns, compounded equity, drawdown and per-regime reporting.

No transaction costs are modelled anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from .decision import DecisionConfig, PositionPath, run_decisions
from .errors import DataError

DAYS_PER_MONTH = 30.44
MS_PER_DAY = 86_400_000

NO_COST_DISCLAIMER = (
    "# Gross of all trading frictions: no fees, spread, slippage or latency are modelled.\n"
    "# High turnover means even small frictions would materially reduce these figures."
)

# RegimeReport field -> column heading used in the human-readable table
REGIME_COLUMNS = {
    "period": "Period",
    "end_v": "End V",
    "cum_ret_pct": "Cum. ret. (%)",
    "mdd_pct": "MDD (%)",
    "trades_per_month": "Trades/mo",
}


def simple_returns(closes) -> np.ndarray:
    """``r[t-1] = (P[t] - P[t-1]) / P[t-1]`` for ``t = 1..n-1``."""
    p = np.asarray(closes, dtype=np.float64)
    if p.ndim != 1 or len(p) < 2:
        raise DataError("need at least two prices to form a return")
    if not (np.isfinite(p).all() and (p > 0).all()):
        raise DataError("prices must be finite and positive")
    return (p[1:] - p[:-1]) / p[:-1]


@dataclass(frozen=True)
class EquityRecord:
    r: float
    R: float
    v: float
    v_bench: float
    trades_cum: int


@dataclass(frozen=True)
class EquityCurve:
    """One row per bar ``t = 1..n-1`` of the evaluated series.

    ``start_ms`` is the timestamp of bar 0, whose close anchors the first
    return; ``timestamp_ms`` holds the bars ``1..n-1``.
    """

    r: np.ndarray
    R: np.ndarray
    v: np.ndarray
    v_bench: np.ndarray
    trades_cum: np.ndarray
    timestamp_ms: Optional[np.ndarray] = None
    start_ms: Optional[int] = None
    v0: float = 1.0

    def __len__(self) -> int:
        return len(self.r)

    def __getitem__(self, i: int) -> EquityRecord:
        return EquityRecord(float(self.r[i]), float(self.R[i]), float(self.v[i]),
                            float(self.v_bench[i]), int(self.trades_cum[i]))

    @property
    def end_v(self) -> float:
        return float(self.v[-1]) if len(self.v) else self.v0


def _compound(growth: np.ndarray, v0: float) -> np.ndarray:
    # sequential products, so v[t] == v[t-1] * (1 + R[t]) holds exactly
    return np.multiply.accumulate(np.concatenate(([v0], growth)))[1:]


def realized_equity(returns, positions: PositionPath, v0: float = 1.0,
                    timestamp_ms=None, start_ms: Optional[int] = None) -> EquityCurve:
    """Strategy and buy-and-hold equity.

    ``positions`` covers bars ``0..n-1`` and ``returns`` bars ``1..n-1``; the
    return at bar ``t`` is earned by ``positions.p_applied[t]``, i.e. the
    state decided at ``t-1``.
    """
    r = np.asarray(returns, dtype=np.float64)
    if len(positions) != len(r) + 1:
        raise DataError(
            f"misaligned inputs: {len(r)} returns need {len(r) + 1} positions, got {len(positions)}"
        )
    if not (v0 > 0):
        raise DataError("v0 must be positive")
    R = positions.p_applied[1:] * r
    trades_cum = np.cumsum(positions.dp, dtype=np.int64)[1:]
    if timestamp_ms is not None and len(timestamp_ms) != len(r):
        raise DataError("timestamps must align with returns")
    return EquityCurve(
        r=r, R=R, v=_compound(1.0 + R, v0), v_bench=_compound(1.0 + r, v0),
        trades_cum=trades_cum, timestamp_ms=timestamp_ms, start_ms=start_ms, v0=float(v0),
    )


def max_drawdown(equity) -> float:
    """Largest fractional fall from a running peak, as a value in ``[-1, 0]``."""
    v = np.asarray(equity, dtype=np.float64)
    if v.size == 0:
        raise DataError("max_drawdown of an empty curve")
    if not (v > 0).all():
        raise DataError("equity must be positive")
    return float(np.min(v / np.maximum.accumulate(v)) - 1.0)


@dataclass(frozen=True)
class RegimeReport:
    period: str
    end_v: float
    cum_ret_pct: float
    mdd_pct: float
    trades_per_month: float


def _to_ms(when) -> int:
    if isinstance(when, str):
        try:
            when = datetime.fromisoformat(when.strip().replace("Z", "+00:00"))
        except ValueError:
            raise DataError(f"bad split {when!r}; expected ISO-8601") from None
    if isinstance(when, datetime):
        if when.tzinfo is None:
            when = when.replace(tzinfo=timezone.utc)
        return int(round(when.timestamp() * 1000))
    return int(when)


def _iso(ms: int) -> str:
    return datetime.fromtimestamp(ms / 1000, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%S+00:00")


def regime_bounds(curve: EquityCurve, splits: Sequence = ()) -> list[tuple[int, int, int, int]]:
    """``(first_row, stop_row, start_ms, end_ms)`` per regime."""
    if curve.timestamp_ms is None or curve.start_ms is None or len(curve) == 0:
        raise DataError("regime reporting needs a non-empty, timestamped equity curve")
    ts = np.asarray(curve.timestamp_ms, dtype=np.int64)
    cuts = [_to_ms(s) for s in splits]
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise DataError("split points must be strictly increasing")
    for c in cuts:
        if c < curve.start_ms or c > ts[-1]:
            raise DataError(f"split {_iso(c)} outside data range {_iso(curve.start_ms)} .. {_iso(ts[-1])}")
    rows = [0] + [int(np.searchsorted(ts, c, side="left")) for c in cuts] + [len(ts)]
    edges = [int(curve.start_ms)] + cuts + [int(ts[-1])]
    out = []
    for k in range(len(rows) - 1):
        if rows[k + 1] <= rows[k]:
            raise DataError(f"regime {_iso(edges[k])} .. {_iso(edges[k + 1])} contains no bars")
        if edges[k + 1] <= edges[k]:
            raise DataError(f"regime starting {_iso(edges[k])} has zero duration")
        out.append((rows[k], rows[k + 1], edges[k], edges[k + 1]))
    return out


def regime_report(curve: EquityCurve, splits: Sequence = (), labels: Optional[Sequence[str]] = None,
                  days_per_month: float = DAYS_PER_MONTH) -> list[RegimeReport]:
    """Metrics per subperiod, each re-based to equity 1 at its own start.

    Regime ``k`` holds the bars stamped in ``[split[k-1], split[k])``. Its
    length in months is measured between its boundary times (the first
    regime starts at bar 0, the last ends at the final bar).
    """
    bounds = regime_bounds(curve, splits)
    if labels is not None and len(labels) != len(bounds):
        raise DataError(f"{len(bounds)} regimes but {len(labels)} labels")
    reports = []
    for k, (a, b, t0, t1) in enumerate(bounds):
        v = _compound(1.0 + curve.R[a:b], 1.0)
        end_v = float(v[-1])
        trades = int(curve.trades_cum[b - 1]) - (int(curve.trades_cum[a - 1]) if a > 0 else 0)
        months = (t1 - t0) / MS_PER_DAY / days_per_month
        reports.append(RegimeReport(
            period=labels[k] if labels is not None else f"{_iso(t0)}/{_iso(t1)}",
            end_v=end_v,
            cum_ret_pct=100.0 * (end_v - 1.0),
            mdd_pct=100.0 * max_drawdown(np.concatenate(([1.0], v))),
            trades_per_month=trades / months,
        ))
    return reports


def backtest(closes, positions: PositionPath, timestamp_ms=None, v0: float = 1.0) -> EquityCurve:
    """Convenience wrapper: returns from ``closes`` then :func:`realized_equity`."""
    r = simple_returns(closes)
    ts = start = None
    if timestamp_ms is not None:
        ts_all = np.asarray(timestamp_ms, dtype=np.int64)
        ts, start = ts_all[1:], int(ts_all[0])
    return realized_equity(r, positions, v0=v0, timestamp_ms=ts, start_ms=start)


def forward_shift_diagnostic(signal, closes, shifts: Sequence[int],
                             cfg: DecisionConfig = DecisionConfig()) -> dict[int, EquityCurve]:
    """Equity when the rule at bar ``t`` is fed ``signal[t + k]``.

    NON-CAUSAL: this peeks ``k`` bars ahead by construction and exists only
    to measure how much a perfectly advanced signal would have earned. The
    last ``k`` bars are dropped; accounting keeps the usual one-bar delay.
    """
    s = np.asarray(signal, dtype=np.float64)
    p = np.asarray(closes, dtype=np.float64)
    if len(s) != len(p):
        raise DataError("signal and closes must have equal length")
    curves = {}
    for k in shifts:
        if int(k) != k or k < 0:
            raise DataError(f"shift must be a non-negative integer, got {k!r}")
        k = int(k)
        if k >= len(s) - 1:
            raise DataError(f"shift {k} leaves fewer than two bars of a {len(s)}-bar series")
        curves[k] = backtest(p[: len(p) - k], run_decisions(s[k:], cfg))
    return curves


def format_metrics(curve: EquityCurve, reports: Sequence[RegimeReport], extra: Optional[dict] = None) -> str:
    """Flat ``key = value`` document: whole-period metrics then one block per regime."""
    full = np.concatenate(([curve.v0], curve.v))
    bench = np.concatenate(([curve.v0], curve.v_bench))
    lines = [NO_COST_DISCLAIMER]
    pairs = dict(extra or {})
    pairs.update({
        "bars": len(curve) + 1,
        "end_v": curve.end_v / curve.v0,
        "cum_ret_pct": 100.0 * (curve.end_v / curve.v0 - 1.0),
        "mdd_pct": 100.0 * max_drawdown(full),
        "bench_end_v": float(bench[-1]) / curve.v0,
        "bench_mdd_pct": 100.0 * max_drawdown(bench),
        "trades": int(curve.trades_cum[-1]) if len(curve) else 0,
        "regimes": len(reports),
    })
    lines += [f"{k} = {_fmt(v)}" for k, v in pairs.items()]
    for i, rep in enumerate(reports):
        for field in REGIME_COLUMNS:
            lines.append(f"regime.{i}.{field} = {_fmt(getattr(rep, field))}")
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def format_regime_table(reports: Sequence[RegimeReport]) -> str:
    """Plain-text table for the console; ``regimes.csv`` carries the unrounded values."""
    def fixed(x, digits):
        return f"{round(x, digits) + 0.0:.{digits}f}"  # + 0.0 turns -0.0 into 0.0

    head = list(REGIME_COLUMNS.values())
    rows = [[r.period, fixed(r.end_v, 2), fixed(r.cum_ret_pct, 1), fixed(r.mdd_pct, 1),
             fixed(r.trades_per_month, 0)] for r in reports]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h) for i, h in enumerate(head)]

    def line(cells):
        return "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths)))

    return "\n".join([line(head)] + [line(r) for r in rows]) + "\n"
