"""
What a better forecast would be worth
=====================================

Feeding the decision rule the signal ``k`` bars early is not something a
live strategy can do. As a diagnostic it shows how much equity is on the
table if the forward estimate were more forward.
"""

from forwardsignal import compute_signal, forward_shift_diagnostic
from forwardsignal.synthetic import trending_bars

bars = trending_bars(20_000, seed=2)
ind, sig = compute_signal(bars)
valid = ind.valid

curves = forward_shift_diagnostic(sig.f[valid], bars.close[valid], shifts=[0, 1, 2, 3])
for k, curve in curves.items():
    print(f"shift {k}: end value {curve.end_v:.4f}")

###############################################################################
# The command-line equivalent writes one equity column per shift::
#
#     forwardsignal diagnose-shifts --input bars.csv --timezone UTC --shifts 0,1,2,3
