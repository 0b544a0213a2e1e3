"""Two-state (flat/long) hysteresis on the signal, with one-bar execution delay."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, DataError


@dataclass(frozen=True)
class DecisionConfig:
    theta: float = 0.06

    def __post_init__(self):
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise ConfigError(f"theta must be positive and finite, got {self.theta!r}")


def update_state(p_prev: int, s: float, theta: float) -> int:
    """Enter above ``theta``, exit below ``-theta``, hold otherwise (ties hold)."""
    if p_prev == 0 and s > theta:
        return 1
    if p_prev == 1 and s < -theta:
        return 0
    return p_prev


@dataclass(frozen=True)
class PositionRecord:
    p: int
    p_applied: int
    dp: int


@dataclass(frozen=True)
class PositionPath:
    """Columnar position records.

    ``p[t]`` is the state after seeing the signal at ``t``; ``p_applied[t]``
    is ``p[t-1]`` (0 at ``t = 0``), the state that earns the return at ``t``.
    """

    p: np.ndarray
    p_applied: np.ndarray
    dp: np.ndarray

    def __len__(self) -> int:
        return len(self.p)

    def __getitem__(self, i: int) -> PositionRecord:
        return PositionRecord(int(self.p[i]), int(self.p_applied[i]), int(self.dp[i]))

    @property
    def trades(self) -> int:
        return int(self.dp.sum())


def positions_from_states(p: np.ndarray, p_init: int = 0) -> PositionPath:
    p = np.asarray(p, dtype=np.int8)
    applied = np.empty_like(p)
    if len(p):
        applied[0] = p_init
        applied[1:] = p[:-1]
    dp = np.abs(p - applied).astype(np.int8)
    return PositionPath(p, applied, dp)


def run_decisions(signal, cfg: DecisionConfig = DecisionConfig()) -> PositionPath:
    """Fold :func:`update_state` over ``signal`` starting flat."""
    s = np.ascontiguousarray(signal, dtype=np.float64)
    if not np.isfinite(s).all():
        raise DataError("signal contains non-finite values")
    return positions_from_states(_kernels.hysteresis(s, float(cfg.theta), 0))
