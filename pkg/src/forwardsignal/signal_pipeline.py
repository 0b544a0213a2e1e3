"""
From indicator vectors to the forward observable.

Per bar, in order:

1. each indicator is centred on the median of all of its *earlier* values;
2. the centred values are scaled and averaged into the raw composite;
3. a scalar random-walk Kalman filter smooths the composite;
4. the filtered composite's first difference is averaged over a short window;
5. composite and derivative are mixed with weights that depend on the
   composite's magnitude.

Nothing in the chain ever looks at a later bar; the streaming objects here and
the compiled batch path in :func:`run_pipeline` agree bit for bit.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ConfigError, DataError
from .indicators import IndicatorFrame, IndicatorVector

FORWARD_INPUTS = ("filtered", "raw")


@dataclass(frozen=True)
class PipelineConfig:
    alpha_mfi: float = 0.02
    alpha_rsi: float = 0.02
    alpha_bb: float = 2.0
    alpha_macd: float = 1.0e4
    kalman_q: float = 0.01
    kalman_r: float = 0.1
    derivative_span: int = 4
    derivative_gain: float = 2.0
    # which composite feeds the forward operator: Kalman output or raw average
    forward_input: str = "filtered"

    def __post_init__(self):
        if not (self.kalman_q > 0 and self.kalman_r > 0):
            raise ConfigError("kalman_q and kalman_r must be positive")
        if int(self.derivative_span) != self.derivative_span or self.derivative_span < 1:
            raise ConfigError("derivative_span must be an integer >= 1")
        if self.forward_input not in FORWARD_INPUTS:
            raise ConfigError(f"forward_input must be one of {FORWARD_INPUTS}")
        for name in ("alpha_mfi", "alpha_rsi", "alpha_bb", "alpha_macd", "derivative_gain"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    @property
    def alphas(self) -> tuple[float, float, float, float]:
        return (self.alpha_mfi, self.alpha_rsi, self.alpha_bb, self.alpha_macd)


class ExpandingMedian:
    """Median of everything seen so far, kept in two heaps.

    ``_lo`` is a max-heap (stored negated) with the smaller half and holds the
    extra element when the count is odd; ``_hi`` is a min-heap.
    """

    def __init__(self):
        self._lo: list[float] = []
        self._hi: list[float] = []

    def __len__(self) -> int:
        return len(self._lo) + len(self._hi)

    def push(self, x: float) -> None:
        if not self._lo or x <= -self._lo[0]:
            heapq.heappush(self._lo, -x)
        else:
            heapq.heappush(self._hi, x)
        if len(self._lo) > len(self._hi) + 1:
            heapq.heappush(self._hi, -heapq.heappop(self._lo))
        elif len(self._hi) > len(self._lo):
            heapq.heappush(self._lo, -heapq.heappop(self._hi))

    def median(self) -> Optional[float]:
        if not self._lo:
            return None
        if len(self._lo) > len(self._hi):
            return -self._lo[0]
        return (-self._lo[0] + self._hi[0]) / 2.0

    def center(self, x: float) -> float:
        """``x`` minus the median of the values pushed so far (0 if none), then push ``x``."""
        m = self.median()
        out = 0.0 if m is None else x - m
        self.push(x)
        return out


def composite(centered, cfg: PipelineConfig = PipelineConfig()) -> float:
    """Scaled average of the four centred indicators (mfi, rsi, bb_pct, macd_diff order)."""
    m, r, b, d = centered
    return (cfg.alpha_mfi * m + cfg.alpha_rsi * r + cfg.alpha_bb * b + cfg.alpha_macd * d) / 4.0


class ScalarKalman:
    """Random-walk state, direct noisy observation.

    The first measurement initialises the estimate (with variance ``r``);
    there is no backward pass.
    """

    def __init__(self, q: float = 0.01, r: float = 0.1):
        if not (q > 0 and r > 0):
            raise ConfigError("q and r must be positive")
        self.q = q
        self.r = r
        self.x = 0.0
        self.p_var = 0.0
        self.initialized = False

    def update(self, z: float) -> float:
        if not math.isfinite(z):
            raise DataError(f"non-finite Kalman measurement {z!r}")
        if not self.initialized:
            self.x = z
            self.p_var = self.r
            self.initialized = True
            return self.x
        p = self.p_var + self.q
        k = p / (p + self.r)
        self.x = self.x + k * (z - self.x)
        self.p_var = (1.0 - k) * p
        return self.x


class CausalDerivative:
    """Simple moving average of the last ``span`` first differences (first one is 0)."""

    def __init__(self, span: int = 4):
        if span < 1:
            raise ConfigError("span must be >= 1")
        self.span = span
        self._prev: Optional[float] = None
        self._diffs: deque[float] = deque(maxlen=span)

    def update(self, x: float) -> float:
        self._diffs.append(0.0 if self._prev is None else x - self._prev)
        self._prev = x
        total = 0.0
        for d in self._diffs:
            total += d
        return total / len(self._diffs)


def forward_operator(f0: float, df0: float, gain: float = 2.0) -> tuple[float, float, float]:
    """Return ``(c1, c2, f)``: composite weight, derivative weight, mixed signal."""
    c1 = math.tanh(abs(f0))
    c2 = 1.0 - math.tanh(abs(f0 / 2.0))
    return c1, c2, c1 * f0 + gain * c2 * df0


@dataclass(frozen=True)
class SignalState:
    centered: tuple[float, float, float, float]
    f0_raw: float
    f0: float
    df0: float
    c1: float
    c2: float
    f: float


class SignalPipeline:
    """Streaming pipeline over valid indicator vectors."""

    def __init__(self, cfg: PipelineConfig = PipelineConfig()):
        self.cfg = cfg
        self.medians = [ExpandingMedian() for _ in range(4)]
        self.kalman = ScalarKalman(cfg.kalman_q, cfg.kalman_r)
        self.derivative = CausalDerivative(cfg.derivative_span)

    def update(self, v: IndicatorVector) -> SignalState:
        if not v.ready:
            raise DataError("indicator vector is still warming up")
        centered = tuple(med.center(x) for med, x in zip(self.medians, v.values()))
        f0_raw = composite(centered, self.cfg)
        f0 = self.kalman.update(f0_raw)
        base = f0 if self.cfg.forward_input == "filtered" else f0_raw
        df0 = self.derivative.update(base)
        c1, c2, f = forward_operator(base, df0, self.cfg.derivative_gain)
        return SignalState(centered, f0_raw, f0, df0, c1, c2, f)


TRACE_COLUMNS = (
    "centered_mfi", "centered_rsi", "centered_bb", "centered_macd",
    "f0_raw", "f0", "df0", "c1", "c2", "f",
)


@dataclass(frozen=True)
class SignalTrace:
    """Pipeline columns, one row per input row; rows before warm-up are NaN."""

    centered_mfi: np.ndarray
    centered_rsi: np.ndarray
    centered_bb: np.ndarray
    centered_macd: np.ndarray
    f0_raw: np.ndarray
    f0: np.ndarray
    df0: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    f: np.ndarray

    def __len__(self) -> int:
        return len(self.f)

    def __getitem__(self, i: int) -> SignalState:
        return SignalState(
            (float(self.centered_mfi[i]), float(self.centered_rsi[i]),
             float(self.centered_bb[i]), float(self.centered_macd[i])),
            float(self.f0_raw[i]), float(self.f0[i]), float(self.df0[i]),
            float(self.c1[i]), float(self.c2[i]), float(self.f[i]),
        )

    def columns(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in TRACE_COLUMNS}


def run_pipeline(ind: IndicatorFrame, cfg: PipelineConfig = PipelineConfig()) -> SignalTrace:
    """Run the pipeline over every valid row of ``ind``.

    Validity is monotone (once every indicator is warm it stays warm), so the
    valid rows form one contiguous tail.
    """
    valid = ind.valid
    if valid.any():
        start = int(np.argmax(valid))
        if not valid[start:].all():
            raise DataError("indicator validity is not a contiguous tail")
    else:
        start = len(ind)
    for name in ("mfi", "rsi", "bb_pct", "macd_diff"):
        col = getattr(ind, name)[start:]
        if not np.isfinite(col).all():
            raise DataError(f"non-finite {name} value after warm-up")
    out = _kernels.pipeline(
        np.ascontiguousarray(ind.mfi), np.ascontiguousarray(ind.rsi),
        np.ascontiguousarray(ind.bb_pct), np.ascontiguousarray(ind.macd_diff),
        start, *(float(a) for a in cfg.alphas), float(cfg.kalman_q), float(cfg.kalman_r),
        int(cfg.derivative_span), float(cfg.derivative_gain), cfg.forward_input == "raw",
    )
    return SignalTrace(*out)
