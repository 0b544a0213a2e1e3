"""Seeded synthetic OHLCV series for tests, demos and benchmarks."""
from __future__ import annotations

from datetime import datetime, timezone
from typing import Optional

import numpy as np
import polars as pl

from .market_data import BarSeries, format_timestamps

MONDAY = datetime(2024, 1, 1, tzinfo=timezone.utc)


def bars_from_closes(closes, seed: int = 0, start: datetime = MONDAY, step_s: int = 60,
                     wick: float = 2e-4, timestamp_ms: Optional[np.ndarray] = None) -> BarSeries:
    """Wrap a close path into consistent OHLCV bars (open = previous close)."""
    rng = np.random.default_rng(seed)
    close = np.asarray(closes, dtype=np.float64)
    n = len(close)
    open_ = np.concatenate((close[:1], close[:-1]))
    top = np.maximum(open_, close)
    bottom = np.minimum(open_, close)
    high = top * (1.0 + wick * rng.random(n))
    low = bottom * (1.0 - wick * rng.random(n))
    volume = np.round(rng.lognormal(mean=3.0, sigma=0.5, size=n), 3)
    if timestamp_ms is None:
        t0 = int(start.timestamp() * 1000)
        timestamp_ms = t0 + step_s * 1000 * np.arange(n, dtype=np.int64)
    return BarSeries(np.asarray(timestamp_ms, dtype=np.int64), open_, high, low, close, volume)


def random_walk_bars(n: int, seed: int = 0, start_price: float = 1.10, vol: float = 2e-4,
                     drift: float = 0.0, start: datetime = MONDAY, step_s: int = 60) -> BarSeries:
    """Geometric random walk with per-bar log-return volatility ``vol``."""
    rng = np.random.default_rng(seed)
    steps = drift + vol * rng.standard_normal(n)
    steps[0] = 0.0
    closes = start_price * np.exp(np.cumsum(steps))
    return bars_from_closes(closes, seed=seed + 1, start=start, step_s=step_s)


def trending_bars(n: int, seed: int = 0, leg: int = 240, slope: float = 3e-4,
                  vol: float = 5e-5, start_price: float = 1.10, start: datetime = MONDAY) -> BarSeries:
    """Alternating up/down legs of ``leg`` bars with small noise on top."""
    rng = np.random.default_rng(seed)
    sign = np.where((np.arange(n) // leg) % 2 == 0, 1.0, -1.0)
    steps = slope * sign + vol * rng.standard_normal(n)
    steps[0] = 0.0
    closes = start_price * np.exp(np.cumsum(steps))
    return bars_from_closes(closes, seed=seed + 1, start=start)


def bars_to_csv(bars: BarSeries, epoch_ms: bool = False) -> bytes:
    """Serialize bars in the input format :func:`~forwardsignal.market_data.parse_bars` reads."""
    ts = pl.Series("timestamp", bars.timestamp_ms) if epoch_ms else format_timestamps(bars.timestamp_ms)
    frame = pl.DataFrame({
        "timestamp": ts, "open": bars.open, "high": bars.high,
        "low": bars.low, "close": bars.close, "volume": bars.volume,
    })
    return frame.write_csv().encode()
