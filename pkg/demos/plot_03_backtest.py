"""
Positions, equity and the regime table
======================================

The hysteresis rule goes long when the signal rises above ``theta`` and
flat when it falls below ``-theta``. Each position is applied to the next
bar's return, so the strategy never trades on the close it just saw.
"""

from datetime import datetime, timezone

import numpy as np

from forwardsignal import DecisionConfig, format_regime_table, regime_report, run_strategy
from forwardsignal.synthetic import trending_bars

bars = trending_bars(20_000, seed=0)
result = run_strategy(bars, dec_cfg=DecisionConfig(theta=0.06))
eq = result.equity

print("trades:", result.positions.trades)
print(f"strategy end value {eq.end_v:.4f}, buy-and-hold {eq.v_bench[-1]:.4f}")

###############################################################################
# A regime report restarts the equity at 1 on each boundary. The product of
# regime end values recovers the full-period end value.

split = datetime(2024, 1, 8, tzinfo=timezone.utc)
reports = regime_report(eq, [split], labels=["week 1", "rest"])
print(format_regime_table(reports))
print("product of regimes:", np.prod([r.end_v for r in reports]), " full:", eq.end_v)
