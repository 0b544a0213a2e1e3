"""
OHLCV ingestion and the weekend session filter.

Bars are held columnar (:class:`BarSeries`) so that million-row files stay
cheap; indexing a series yields individual :class:`Bar` objects.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from datetime import datetime, time, timezone
from typing import BinaryIO, Iterator, Union
from zoneinfo import ZoneInfo, ZoneInfoNotFoundError

import numpy as np
import polars as pl

from .errors import ConfigError, DataError

MS_PER_SECOND = 1000
SECONDS_PER_DAY = 86400
SECONDS_PER_WEEK = 7 * SECONDS_PER_DAY

WEEKDAYS = ("monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday")


@dataclass(frozen=True)
class Bar:
    timestamp: datetime
    open: float
    high: float
    low: float
    close: float
    volume: float

    def __post_init__(self):
        if self.timestamp.tzinfo is None:
            raise DataError("bar timestamp must carry a timezone")
        prices = (self.open, self.high, self.low, self.close)
        if not all(np.isfinite(prices)) or min(prices) <= 0:
            raise DataError(f"non-positive price in bar at {self.timestamp.isoformat()}")
        if not np.isfinite(self.volume) or self.volume < 0:
            raise DataError(f"negative volume in bar at {self.timestamp.isoformat()}")
        if self.low > min(self.open, self.close) or self.high < max(self.open, self.close):
            raise DataError(f"inconsistent high/low in bar at {self.timestamp.isoformat()}")

    @property
    def epoch_ms(self) -> int:
        return int(round(self.timestamp.timestamp() * MS_PER_SECOND))


@dataclass(frozen=True)
class BarSeries:
    """Columnar, time-ordered bars. ``timestamp_ms`` is UTC epoch milliseconds."""

    timestamp_ms: np.ndarray
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    volume: np.ndarray

    def __post_init__(self):
        n = len(self.timestamp_ms)
        for name in ("open", "high", "low", "close", "volume"):
            if len(getattr(self, name)) != n:
                raise DataError(f"column {name!r} length differs from timestamps")

    @classmethod
    def from_bars(cls, bars) -> "BarSeries":
        bars = list(bars)
        series = cls(
            timestamp_ms=np.array([b.epoch_ms for b in bars], dtype=np.int64),
            open=np.array([b.open for b in bars], dtype=float),
            high=np.array([b.high for b in bars], dtype=float),
            low=np.array([b.low for b in bars], dtype=float),
            close=np.array([b.close for b in bars], dtype=float),
            volume=np.array([b.volume for b in bars], dtype=float),
        )
        _check_monotone(series.timestamp_ms, lines=None)
        return series

    def __len__(self) -> int:
        return len(self.timestamp_ms)

    def __iter__(self) -> Iterator[Bar]:
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, item):
        if isinstance(item, (slice, np.ndarray)):
            return BarSeries(
                self.timestamp_ms[item], self.open[item], self.high[item],
                self.low[item], self.close[item], self.volume[item],
            )
        ts = datetime.fromtimestamp(int(self.timestamp_ms[item]) / MS_PER_SECOND, tz=timezone.utc)
        return Bar(ts, float(self.open[item]), float(self.high[item]), float(self.low[item]),
                   float(self.close[item]), float(self.volume[item]))

    def timestamps_iso(self) -> pl.Series:
        return format_timestamps(self.timestamp_ms)


def format_timestamps(timestamp_ms: np.ndarray) -> pl.Series:
    """ISO-8601 UTC strings, e.g. ``2024-01-03T10:00:00+00:00``."""
    return (
        pl.Series("timestamp", np.asarray(timestamp_ms, dtype=np.int64))
        .cast(pl.Datetime("ms", "UTC"))
        .dt.strftime("%Y-%m-%dT%H:%M:%S+00:00")
    )


@dataclass(frozen=True)
class ColumnSpec:
    """Header names of the six required CSV columns."""

    timestamp: str = "timestamp"
    open: str = "open"
    high: str = "high"
    low: str = "low"
    close: str = "close"
    volume: str = "volume"

    def names(self) -> dict[str, str]:
        return {f: getattr(self, f) for f in ("timestamp", "open", "high", "low", "close", "volume")}


def parse_bars(source: Union[BinaryIO, bytes, str, os.PathLike], spec: ColumnSpec = ColumnSpec()) -> BarSeries:
    """Parse OHLCV CSV into a :class:`BarSeries`.

    ``source`` is a path, raw bytes, or a binary or text stream. Timestamps are
    either all integer epoch milliseconds or all ISO-8601
    (``YYYY-MM-DDTHH:MM:SS`` with optional ``±hh:mm`` offset; naive values
    are read as UTC). Errors name the 1-based file line (header is line 1).
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            raw = fh.read()
    elif isinstance(source, bytes):
        raw = source
    else:
        raw = source.read()
        if isinstance(raw, str):
            raw = raw.encode()

    try:
        frame = pl.read_csv(io.BytesIO(raw), infer_schema=False, has_header=True)
    except (pl.exceptions.PolarsError, ValueError) as exc:
        raise DataError(f"malformed CSV: {exc}") from None

    wanted = spec.names()
    missing = [col for col in wanted.values() if col not in frame.columns]
    if missing:
        raise DataError(f"missing column(s) in header: {', '.join(missing)}")

    ts_ms = _parse_timestamps(frame[wanted["timestamp"]])
    cols = {}
    for key in ("open", "high", "low", "close", "volume"):
        col = frame[wanted[key]].str.strip_chars().cast(pl.Float64, strict=False)
        bad = col.is_null() | col.is_nan() | col.is_infinite()
        if bad.any():
            raise DataError(f"malformed {key} value at line {_first_line(bad)}")
        cols[key] = col.to_numpy()

    prices = np.vstack([cols["open"], cols["high"], cols["low"], cols["close"]])
    bad = (prices <= 0).any(axis=0)
    if bad.any():
        raise DataError(f"non-positive price at line {_first_line(bad)}")
    bad = cols["volume"] < 0
    if bad.any():
        raise DataError(f"negative volume at line {_first_line(bad)}")
    bad = (cols["low"] > np.minimum(cols["open"], cols["close"])) | (
        cols["high"] < np.maximum(cols["open"], cols["close"])
    )
    if bad.any():
        raise DataError(f"high/low inconsistent with open/close at line {_first_line(bad)}")

    _check_monotone(ts_ms, lines=True)
    return BarSeries(ts_ms, cols["open"], cols["high"], cols["low"], cols["close"], cols["volume"])


def _first_line(mask) -> int:
    idx = int(np.flatnonzero(np.asarray(mask))[0])
    return idx + 2


def _parse_timestamps(col: pl.Series) -> np.ndarray:
    col = col.str.strip_chars()
    if col.is_null().any():
        raise DataError(f"malformed timestamp at line {_first_line(col.is_null().to_numpy())}")
    if len(col) == 0:
        return np.empty(0, dtype=np.int64)
    is_int = col.str.contains(r"^-?\d+$")
    if is_int.all():
        return col.cast(pl.Int64).to_numpy()
    if is_int.any():
        raise DataError(
            f"unknown timestamp format at line {_first_line(is_int.to_numpy())}: "
            "file mixes epoch milliseconds and ISO-8601"
        )

    iso = r"^\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}(:\d{2})?"
    has_offset = col.str.contains(iso + r"(Z|[+-]\d{2}:?\d{2})$")
    naive = col.str.contains(iso + r"$")
    unknown = ~(has_offset | naive)
    if unknown.any():
        line = _first_line(unknown.to_numpy())
        raise DataError(f"unknown timestamp format at line {line}: {col[line - 2]!r}")

    canonical = r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}([+-]\d{2}:\d{2})?$"
    norm = col
    if not col.str.contains(canonical).all():
        norm = col.str.replace(" ", "T").str.replace(r"T(\d{2}:\d{2})($|[Z+-])", "T${1}:00${2}")
        norm = norm.str.replace(r"Z$", "+00:00")

    def epoch(fmt):
        return norm.str.to_datetime(fmt, strict=False, time_unit="ms").dt.epoch("ms")

    if has_offset.all():
        ms = epoch("%Y-%m-%dT%H:%M:%S%z")
    elif naive.all():
        ms = epoch("%Y-%m-%dT%H:%M:%S")
    else:
        ms = pl.select(
            pl.when(pl.lit(has_offset))
            .then(pl.lit(epoch("%Y-%m-%dT%H:%M:%S%z")))
            .otherwise(pl.lit(epoch("%Y-%m-%dT%H:%M:%S")))
        ).to_series()
    if ms.is_null().any():
        raise DataError(f"malformed timestamp at line {_first_line(ms.is_null().to_numpy())}")
    return ms.to_numpy().astype(np.int64)


def _fmt_ms(ms: int) -> str:
    return datetime.fromtimestamp(int(ms) / MS_PER_SECOND, tz=timezone.utc).isoformat()


def _check_monotone(ts_ms: np.ndarray, lines) -> None:
    if len(ts_ms) < 2:
        return
    step = np.diff(ts_ms)
    bad = np.flatnonzero(step <= 0)
    if bad.size == 0:
        return
    i = int(bad[0])
    where = f" at line {i + 3}" if lines else ""
    kind = "duplicate" if step[i] == 0 else "non-monotone"
    raise DataError(
        f"{kind} timestamps{where}: {_fmt_ms(ts_ms[i])} followed by {_fmt_ms(ts_ms[i + 1])}"
    )


@dataclass(frozen=True)
class SessionPolicy:
    """Weekly active-hours window in a named local timezone.

    Bars strictly between ``weekend_close`` and ``weekend_open`` (local
    wall-clock, measured through the week) are dropped; bars exactly at
    either boundary are kept.
    """

    timezone: str
    weekend_open_day: str = "sunday"
    weekend_open: time = time(18, 0)
    weekend_close_day: str = "friday"
    weekend_close: time = time(18, 0)
    saturday_drop: bool = True
    _zone: ZoneInfo = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.timezone:
            raise ConfigError("session timezone is required")
        try:
            zone = ZoneInfo(self.timezone)
        except (ZoneInfoNotFoundError, ValueError):
            raise ConfigError(f"unknown timezone {self.timezone!r}") from None
        for day in (self.weekend_open_day, self.weekend_close_day):
            if day.lower() not in WEEKDAYS:
                raise ConfigError(f"unknown weekday {day!r}")
        object.__setattr__(self, "_zone", zone)

    @property
    def zone(self) -> ZoneInfo:
        return self._zone

    def _boundary(self, day: str, at: time) -> int:
        return WEEKDAYS.index(day.lower()) * SECONDS_PER_DAY + at.hour * 3600 + at.minute * 60 + at.second

    def closed(self, week_seconds):
        """Vectorized verdict on local seconds-since-Monday-00:00."""
        close = self._boundary(self.weekend_close_day, self.weekend_close)
        reopen = self._boundary(self.weekend_open_day, self.weekend_open)
        s = np.asarray(week_seconds)
        if close < reopen:
            out = (s > close) & (s < reopen)
        else:
            out = (s > close) | (s < reopen)
        if self.saturday_drop:
            out = out | (s // SECONDS_PER_DAY == 5)
        return out


def session_keep(bar: Bar, policy: SessionPolicy) -> bool:
    """True iff ``bar`` falls inside the policy's active trading hours."""
    try:
        local = bar.timestamp.astimezone(policy.zone)
    except (OverflowError, ValueError) as exc:
        raise DataError(f"cannot convert {bar.timestamp!r} to {policy.timezone}: {exc}") from None
    secs = local.weekday() * SECONDS_PER_DAY + local.hour * 3600 + local.minute * 60 + local.second
    return not bool(policy.closed(secs))


def session_mask(series: BarSeries, policy: SessionPolicy) -> np.ndarray:
    """Boolean keep-mask; same verdicts as :func:`session_keep`, vectorized."""
    if len(series) == 0:
        return np.zeros(0, dtype=bool)
    local = pl.Series(series.timestamp_ms).cast(pl.Datetime("ms", "UTC")).dt.convert_time_zone(policy.timezone)
    secs = (
        (local.dt.weekday().cast(pl.Int64) - 1) * SECONDS_PER_DAY
        + local.dt.hour().cast(pl.Int64) * 3600
        + local.dt.minute().cast(pl.Int64) * 60
        + local.dt.second().cast(pl.Int64)
    ).to_numpy()
    return ~policy.closed(secs)


def filter_sessions(series: BarSeries, policy: SessionPolicy) -> BarSeries:
    """Drop inactive-hours bars; survivors are treated as adjacent downstream."""
    return series[session_mask(series, policy)]
