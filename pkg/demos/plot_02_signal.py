"""
From indicators to the forward signal
=====================================

Four indicators are centred on their causal running median, blended,
smoothed with a scalar Kalman filter and pushed forward with the
tanh-weighted derivative term.
"""

import numpy as np

from forwardsignal import IndicatorConfig, PipelineConfig, compute_indicators, run_pipeline
from forwardsignal.synthetic import trending_bars

bars = trending_bars(3000, seed=3)
ind = compute_indicators(bars, IndicatorConfig())
print("first fully valid bar:", int(np.argmax(ind.valid)))

# indicator snapshot at a few bars
for t in (30, 500, 2999):
    print(t, f"mfi={ind.mfi[t]:.2f} rsi={ind.rsi[t]:.2f} bb%={ind.bb_pct[t]:.3f} macd={ind.macd_diff[t]:.2e}")

###############################################################################
# The pipeline only looks backwards. ``f0`` is the filtered composite and
# ``f`` the forward estimate that drives the decisions.

sig = run_pipeline(ind, PipelineConfig())
valid = ind.valid
print("f0 std:", sig.f0[valid].std(), " f std:", sig.f[valid].std())

# where f0 turns, the derivative term has already moved f the other way
turns = np.flatnonzero(np.diff(np.sign(np.diff(sig.f0[valid])))) + 1
t = int(turns[len(turns) // 2])
print("around an f0 turn:", np.round(sig.f0[valid][t - 3 : t + 3], 4))
print("f over the same bars:", np.round(sig.f[valid][t - 3 : t + 3], 4))

###############################################################################
# Streaming use: feed one bar at a time and read the same numbers.

from forwardsignal import IndicatorEngine, SignalPipeline

engine, pipe = IndicatorEngine(), SignalPipeline()
for bar in bars[:200]:
    vec = engine.update(bar)
    state = pipe.update(vec) if vec.ready else None
print("streamed f at bar 199:", state.f, " batch:", sig.f[199])
