"""
Streaming RSI, MFI, MACD difference and Bollinger %B.

Every indicator is a small single-owner state object whose ``update``
consumes one observation and returns the current value, or ``None`` while
the indicator is still warming up. :func:`compute_indicators` runs the same
recursions over a whole :class:`~forwardsignal.market_data.BarSeries` in
compiled code; both paths produce bit-identical values.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ConfigError
from .market_data import Bar, BarSeries

INDICATOR_NAMES = ("mfi", "rsi", "bb_pct", "macd_diff")


@dataclass(frozen=True)
class IndicatorConfig:
    rsi_window: int = 14
    mfi_window: int = 14
    macd_fast: int = 12
    macd_slow: int = 26
    macd_signal: int = 9
    bb_window: int = 20
    bb_k: float = 2.0

    def __post_init__(self):
        for name in ("rsi_window", "mfi_window", "macd_fast", "macd_slow", "macd_signal", "bb_window"):
            value = getattr(self, name)
            if int(value) != value or value < 2:
                raise ConfigError(f"{name} must be an integer >= 2, got {value!r}")
        if self.macd_fast >= self.macd_slow:
            raise ConfigError("macd_fast must be smaller than macd_slow")
        if not self.bb_k > 0:
            raise ConfigError("bb_k must be positive")

    @property
    def warmup(self) -> int:
        """Index of the first bar at which all four indicators are valid."""
        return max(self.rsi_window, self.mfi_window, self.macd_slow - 1, self.bb_window - 1)


def ratio_index(up: float, down: float) -> float:
    """100 * (1 - 1/(1 + up/down)) with the zero-denominator limits filled in."""
    if down == 0.0:
        return 50.0 if up == 0.0 else 100.0
    if up == 0.0:
        return 0.0
    return 100.0 * (1.0 - 1.0 / (1.0 + up / down))


class RSI:
    """Relative strength index with Wilder smoothing.

    The first average gain/loss is the simple mean of the first ``window``
    close-to-close moves; afterwards ``avg = (avg*(window-1) + move)/window``.
    Valid from the ``window + 1``-th close.
    """

    def __init__(self, window: int = 14):
        self.window = window
        self._prev: Optional[float] = None
        self._n = 0
        self._gain = 0.0
        self._loss = 0.0

    @property
    def ready(self) -> bool:
        return self._n >= self.window

    def update(self, close: float) -> Optional[float]:
        if self._prev is None:
            self._prev = close
            return None
        move = close - self._prev
        self._prev = close
        gain = move if move > 0.0 else 0.0
        loss = -move if move < 0.0 else 0.0
        w = self.window
        self._n += 1
        if self._n < w:
            self._gain += gain
            self._loss += loss
            return None
        if self._n == w:
            self._gain = (self._gain + gain) / w
            self._loss = (self._loss + loss) / w
        else:
            self._gain = (self._gain * (w - 1) + gain) / w
            self._loss = (self._loss * (w - 1) + loss) / w
        return ratio_index(self._gain, self._loss)


class MFI:
    """Money flow index over the trailing ``window`` typical-price moves.

    Raw flow is typical price times volume; it counts as positive when the
    typical price rose against the previous bar, negative when it fell, and
    is ignored when unchanged.
    """

    def __init__(self, window: int = 14):
        self.window = window
        self._prev_tp: Optional[float] = None
        self._flows: deque[tuple[float, float]] = deque(maxlen=window)

    @property
    def ready(self) -> bool:
        return len(self._flows) == self.window

    def update(self, high: float, low: float, close: float, volume: float) -> Optional[float]:
        tp = (high + low + close) / 3.0
        prev = self._prev_tp
        self._prev_tp = tp
        if prev is None:
            return None
        flow = tp * volume
        if tp > prev:
            self._flows.append((flow, 0.0))
        elif tp < prev:
            self._flows.append((0.0, flow))
        else:
            self._flows.append((0.0, 0.0))
        if not self.ready:
            return None
        pos = 0.0
        neg = 0.0
        for p, n in self._flows:
            pos += p
            neg += n
        return ratio_index(pos, neg)


class EMA:
    """Exponential average with weight 2/(span+1), seeded at the first value."""

    def __init__(self, span: int):
        self.alpha = 2.0 / (span + 1.0)
        self.value: Optional[float] = None

    def update(self, x: float) -> float:
        if self.value is None:
            self.value = x
        else:
            self.value = self.value + self.alpha * (x - self.value)
        return self.value


class MACDDiff:
    """MACD line minus its signal line; valid once ``slow`` closes are seen."""

    def __init__(self, fast: int = 12, slow: int = 26, signal: int = 9):
        if fast >= slow:
            raise ConfigError("fast span must be smaller than slow span")
        self.slow = slow
        self._fast = EMA(fast)
        self._slow = EMA(slow)
        self._signal = EMA(signal)
        self._n = 0

    @property
    def ready(self) -> bool:
        return self._n >= self.slow

    def update(self, close: float) -> Optional[float]:
        self._n += 1
        line = self._fast.update(close) - self._slow.update(close)
        diff = line - self._signal.update(line)
        return diff if self.ready else None


class BollingerPercent:
    """Position of the close inside mean +/- k population std-devs of the window.

    Computed as ``0.5 + (close - mean) / (2 k sd)``, which is algebraically the
    usual ``(close - lower) / (upper - lower)`` but lands on exactly 0.5 at the
    mean. A flat window (sd == 0) reports 0.5.
    """

    def __init__(self, window: int = 20, k: float = 2.0):
        self.window = window
        self.k = k
        self._closes: deque[float] = deque(maxlen=window)

    @property
    def ready(self) -> bool:
        return len(self._closes) == self.window

    def update(self, close: float) -> Optional[float]:
        self._closes.append(close)
        if not self.ready:
            return None
        total = 0.0
        for x in self._closes:
            total += x
        mean = total / self.window
        ss = 0.0
        for x in self._closes:
            ss += (x - mean) * (x - mean)
        sd = math.sqrt(ss / self.window)
        if sd == 0.0:
            return 0.5
        return 0.5 + (close - mean) / (2.0 * self.k * sd)


@dataclass(frozen=True)
class IndicatorVector:
    mfi: float
    rsi: float
    bb_pct: float
    macd_diff: float
    valid: tuple[bool, bool, bool, bool]

    @property
    def ready(self) -> bool:
        return all(self.valid)

    def values(self) -> tuple[float, float, float, float]:
        return (self.mfi, self.rsi, self.bb_pct, self.macd_diff)


class IndicatorEngine:
    """Feeds one bar at a time to all four indicators."""

    def __init__(self, cfg: IndicatorConfig = IndicatorConfig()):
        self.cfg = cfg
        self.mfi = MFI(cfg.mfi_window)
        self.rsi = RSI(cfg.rsi_window)
        self.bb = BollingerPercent(cfg.bb_window, cfg.bb_k)
        self.macd = MACDDiff(cfg.macd_fast, cfg.macd_slow, cfg.macd_signal)

    def update(self, bar: Bar) -> IndicatorVector:
        out = (
            self.mfi.update(bar.high, bar.low, bar.close, bar.volume),
            self.rsi.update(bar.close),
            self.bb.update(bar.close),
            self.macd.update(bar.close),
        )
        return IndicatorVector(
            *(math.nan if v is None else v for v in out),
            valid=tuple(v is not None for v in out),
        )


@dataclass(frozen=True)
class IndicatorFrame:
    """Indicator columns for a whole series; NaN marks warm-up."""

    mfi: np.ndarray
    rsi: np.ndarray
    bb_pct: np.ndarray
    macd_diff: np.ndarray

    @property
    def valid(self) -> np.ndarray:
        """Per-bar flag: all four indicators past warm-up."""
        return ~(np.isnan(self.mfi) | np.isnan(self.rsi) | np.isnan(self.bb_pct) | np.isnan(self.macd_diff))

    def __len__(self) -> int:
        return len(self.mfi)


def compute_indicators(series: BarSeries, cfg: IndicatorConfig = IndicatorConfig()) -> IndicatorFrame:
    mfi, rsi, bb, macd = _kernels.indicators(
        np.ascontiguousarray(series.high, dtype=np.float64),
        np.ascontiguousarray(series.low, dtype=np.float64),
        np.ascontiguousarray(series.close, dtype=np.float64),
        np.ascontiguousarray(series.volume, dtype=np.float64),
        cfg.rsi_window, cfg.mfi_window, cfg.macd_fast, cfg.macd_slow, cfg.macd_signal,
        cfg.bb_window, float(cfg.bb_k),
    )
    return IndicatorFrame(mfi, rsi, bb, macd)
